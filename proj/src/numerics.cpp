#include "memlab/numerics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace memlab::numerics {

namespace {

using MatrixMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatrixMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

std::int64_t shape_product(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

void require_matrix(const Tensor& t, const char* name) {
  if (t.shape.size() != 2) {
    throw ShapeError(std::string(name) + " must be 2-d, got shape " + t.shape_str());
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::int64_t> shape_in, std::vector<double> values_in)
    : shape(std::move(shape_in)), values(std::move(values_in)) {
  if (shape_product(shape) != static_cast<std::int64_t>(values.size())) {
    throw ShapeError("tensor shape " + shape_str() + " does not match " +
                     std::to_string(values.size()) + " values");
  }
}

Tensor Tensor::zeros(std::vector<std::int64_t> shape) {
  const auto n = shape_product(shape);
  Tensor t;
  t.shape = std::move(shape);
  t.values.assign(static_cast<std::size_t>(n), 0.0);
  return t;
}

void Tensor::ensure_grad() {
  if (grad.empty()) grad.assign(values.size(), 0.0);
}

void Tensor::zero_grad() { grad.assign(values.size(), 0.0); }

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

std::int64_t total_parameters(const ParameterStore& params) {
  std::int64_t n = 0;
  for (const auto& [name, t] : params) n += t.numel();
  return n;
}

AdamState AdamState::init(const ParameterStore& params) {
  AdamState st;
  for (const auto& [name, t] : params) {
    Moments mom;
    mom.m.assign(t.values.size(), 0.0);
    mom.v.assign(t.values.size(), 0.0);
    st.moments.emplace(name, std::move(mom));
  }
  return st;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul lhs");
  require_matrix(b, "matmul rhs");
  if (a.shape[1] != b.shape[0]) {
    throw ShapeError("matmul dimension mismatch: " + a.shape_str() + " x " +
                     b.shape_str());
  }
  const auto m = a.shape[0], k = a.shape[1], n = b.shape[1];
  Tensor out = Tensor::zeros({m, n});
  ConstMatrixMap am(a.values.data(), m, k);
  ConstMatrixMap bm(b.values.data(), k, n);
  MatrixMap om(out.values.data(), m, n);
  om.noalias() = am * bm;
  return out;
}

void matmul_backward(Tensor& a, Tensor& b, const Tensor& out_grad) {
  require_matrix(out_grad, "matmul out_grad");
  const auto m = a.shape[0], k = a.shape[1], n = b.shape[1];
  if (out_grad.shape[0] != m || out_grad.shape[1] != n) {
    throw ShapeError("matmul out_grad shape " + out_grad.shape_str() +
                     " does not match product shape [" + std::to_string(m) + "x" +
                     std::to_string(n) + "]");
  }
  a.ensure_grad();
  b.ensure_grad();
  ConstMatrixMap am(a.values.data(), m, k);
  ConstMatrixMap bm(b.values.data(), k, n);
  ConstMatrixMap gm(out_grad.values.data(), m, n);
  MatrixMap ga(a.grad.data(), m, k);
  MatrixMap gb(b.grad.data(), k, n);
  ga.noalias() += gm * bm.transpose();
  gb.noalias() += am.transpose() * gm;
}

CrossEntropyResult softmax_cross_entropy(const Tensor& logits,
                                         std::span<const std::int32_t> targets) {
  require_matrix(logits, "logits");
  const auto t_count = logits.shape[0];
  const auto vocab = logits.shape[1];
  if (static_cast<std::int64_t>(targets.size()) != t_count) {
    throw ShapeError("expected " + std::to_string(t_count) + " targets, got " +
                     std::to_string(targets.size()));
  }
  CrossEntropyResult result;
  result.logits_grad = Tensor::zeros({t_count, vocab});

  double loss_sum = 0.0;
  const double inv_t = 1.0 / static_cast<double>(t_count);
  for (std::int64_t t = 0; t < t_count; ++t) {
    const std::int32_t target = targets[static_cast<std::size_t>(t)];
    if (target < 0 || target >= vocab) {
      throw NumericError("target id " + std::to_string(target) +
                         " out of range [0, " + std::to_string(vocab) + ")");
    }
    const double* row = logits.values.data() + t * vocab;
    double* grow = result.logits_grad.values.data() + t * vocab;

    double max_logit = row[0];
    for (std::int64_t v = 1; v < vocab; ++v) max_logit = std::max(max_logit, row[v]);
    double sum_exp = 0.0;
    for (std::int64_t v = 0; v < vocab; ++v) {
      grow[v] = std::exp(row[v] - max_logit);
      sum_exp += grow[v];
    }
    const double inv_sum = 1.0 / sum_exp;
    for (std::int64_t v = 0; v < vocab; ++v) grow[v] *= inv_sum;  // softmax row
    loss_sum += -(std::log(grow[target]));
    for (std::int64_t v = 0; v < vocab; ++v) grow[v] *= inv_t;
    grow[target] -= inv_t;
  }
  result.loss = loss_sum * inv_t;
  return result;
}

void adam_step(ParameterStore& params, const ParameterStore& grads,
               AdamState& state, double lr) {
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);

  for (auto& [name, param] : params) {
    const auto git = grads.find(name);
    if (git == grads.end()) {
      throw ShapeError("missing gradient for parameter '" + name + "'");
    }
    const Tensor& g = git->second;
    if (g.values.size() != param.values.size()) {
      throw ShapeError("gradient shape " + g.shape_str() + " for '" + name +
                       "' does not match parameter shape " + param.shape_str());
    }
    auto& mom = state.moments.at(name);
    for (std::size_t i = 0; i < param.values.size(); ++i) {
      const double gi = g.values[i];
      if (!std::isfinite(gi)) {
        throw NumericError("non-finite gradient in parameter '" + name +
                           "' at flat index " + std::to_string(i));
      }
      mom.m[i] = state.beta1 * mom.m[i] + (1.0 - state.beta1) * gi;
      mom.v[i] = state.beta2 * mom.v[i] + (1.0 - state.beta2) * gi * gi;
      const double m_hat = mom.m[i] / bc1;
      const double v_hat = mom.v[i] / bc2;
      param.values[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f,
                                  const Tensor& x, double h) {
  if (!(h > 0.0)) throw NumericError("finite difference step must be positive");
  Tensor grad = Tensor::zeros(x.shape);
  Tensor probe = x;
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const double original = probe.values[i];
    probe.values[i] = original + h;
    const double fp = f(probe);
    probe.values[i] = original - h;
    const double fm = f(probe);
    probe.values[i] = original;
    grad.values[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

}  // namespace memlab::numerics
