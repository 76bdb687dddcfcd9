#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace memlab::numerics {

// Thrown when operand shapes disagree; the message names both shapes.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when a non-finite value is found where a finite one is required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense row-major tensor. `grad`, when non-empty, has the same element count
// as `values`.
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<double> values;
  std::vector<double> grad;

  Tensor() = default;
  Tensor(std::vector<std::int64_t> shape_in, std::vector<double> values_in);

  static Tensor zeros(std::vector<std::int64_t> shape);

  std::int64_t numel() const { return static_cast<std::int64_t>(values.size()); }
  std::int64_t dim(std::size_t i) const { return shape.at(i); }

  // Allocates the gradient buffer (zero-filled) if absent.
  void ensure_grad();
  void zero_grad();
  bool has_grad() const { return !grad.empty(); }

  std::string shape_str() const;
};

// Named parameter map. std::map keeps iteration deterministically sorted.
using ParameterStore = std::map<std::string, Tensor>;

std::int64_t total_parameters(const ParameterStore& params);

// Adam moment buffers, congruent with the parameters they belong to.
struct AdamState {
  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
  };
  std::map<std::string, Moments> moments;
  std::int64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState init(const ParameterStore& params);
};

// out = a(m x k) * b(k x n). Throws ShapeError on inner-dimension mismatch.
Tensor matmul(const Tensor& a, const Tensor& b);

// Accumulates d(out)/da and d(out)/db into a.grad and b.grad given the
// gradient of the loss with respect to the matmul output.
void matmul_backward(Tensor& a, Tensor& b, const Tensor& out_grad);

struct CrossEntropyResult {
  double loss = 0.0;       // mean over positions of -log softmax(target)
  Tensor logits_grad;      // (softmax - one_hot) / T
};

// logits: [T x V], targets: T ids in [0, V).
CrossEntropyResult softmax_cross_entropy(const Tensor& logits,
                                         std::span<const std::int32_t> targets);

// Bias-corrected Adam update. `grads` holds gradient values keyed like
// `params`. Aborts with the parameter name on any non-finite gradient.
void adam_step(ParameterStore& params, const ParameterStore& grads,
               AdamState& state, double lr);

// Central differences (f(x+h e_i) - f(x-h e_i)) / 2h, the gradient oracle.
Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f,
                                  const Tensor& x, double h);

}  // namespace memlab::numerics
