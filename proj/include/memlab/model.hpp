#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "memlab/numerics.hpp"
#include "memlab/rng.hpp"

namespace memlab::model {

// Byte-level vocabulary: 256 byte tokens plus BOS/EOS/PAD.
struct Vocabulary {
  static constexpr std::int32_t kBos = 256;
  static constexpr std::int32_t kEos = 257;
  static constexpr std::int32_t kPad = 258;
  static constexpr std::int32_t kSize = 259;

  static bool is_special(std::int32_t id) { return id >= 256; }
};

struct TransformerConfig {
  int n_layers = 4;
  int d_model = 128;
  int n_heads = 4;
  int context_len = 128;
  int vocab_size = Vocabulary::kSize;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TokenSequence {
  std::vector<std::int32_t> ids;
  bool truncated = false;

  std::int64_t size() const { return static_cast<std::int64_t>(ids.size()); }
};

// BOS + bytes + EOS, truncated from the right to context_len tokens.
// context_len <= 0 disables truncation.
TokenSequence tokenize(std::string_view text, int context_len);

// Inverse of tokenize with specials stripped.
std::string detokenize(const TokenSequence& seq);

struct LossDetail {
  double mean = 0.0;  // nats per predicted token
  double sum = 0.0;   // total nats
  std::int64_t predicted_tokens = 0;
};

struct PretrainOptions {
  std::int64_t token_budget = 0;
  int batch_size = 16;
  double lr = 5e-4;
  std::uint64_t seed = 0;
  int log_interval = 50;
  std::ostream* log = nullptr;  // "step<TAB>loss" lines
};

// A causal decoder-only transformer: learned positional embeddings, pre-norm
// blocks, GELU MLP, untied output head. The full training state (parameters,
// Adam moments, step counter, RNG) lives in this object; save/load round-trips
// it byte-exactly.
class Transformer {
 public:
  explicit Transformer(const TransformerConfig& cfg);

  ~Transformer();
  Transformer(const Transformer& other);
  Transformer& operator=(const Transformer& other);
  Transformer(Transformer&&) noexcept;
  Transformer& operator=(Transformer&&) noexcept;

  const TransformerConfig& config() const { return cfg_; }

  // Mean per-token negative log-likelihood of tokens 2..n given the prefix.
  double sequence_loss(const TokenSequence& seq) const;
  LossDetail sequence_loss_detail(const TokenSequence& seq) const;

  // One Adam update per batch on the mean of per-sequence (per-token mean)
  // losses. Returns the per-batch losses. Aborts naming the batch index if a
  // loss turns non-finite.
  std::vector<double> train_steps(const std::vector<std::vector<TokenSequence>>& batches,
                                  double lr);

  // Appends exactly n_new greedy tokens; ties resolve to the lowest token id.
  TokenSequence greedy_decode(const TokenSequence& prompt, int n_new) const;

  // Packs `sentences` into context_len chunks and trains until token_budget
  // tokens have been consumed.
  void pretrain(const std::vector<std::string>& sentences, const PretrainOptions& opts);

  void save_checkpoint(const std::string& path) const;
  static Transformer load_checkpoint(const std::string& path);

  const numerics::ParameterStore& params() const { return params_; }
  numerics::ParameterStore& mutable_params() { return params_; }
  std::int64_t train_step_count() const { return step_count_; }

  // FNV-1a over the raw parameter bytes; used to assert probes do not write.
  std::uint64_t parameter_checksum() const;

  // Fingerprints (fnv1a64) of the sentences this model was pretrained on.
  const std::vector<std::uint64_t>& pretrain_fingerprints() const {
    return pretrain_fingerprints_;
  }

  int threads() const { return threads_; }
  void set_threads(int n) { threads_ = n < 1 ? 1 : n; }

  // Exposes logits for one forward pass; test hook for the causality check.
  std::vector<double> forward_logits(const TokenSequence& seq) const;

  // Gradient of sequence_loss with respect to every parameter; the analytic
  // side of the finite-difference check.
  numerics::ParameterStore loss_gradients(const TokenSequence& seq) const;

 private:
  struct TrainBuffers;

  void init_parameters();
  TrainBuffers& train_buffers();

  TransformerConfig cfg_;
  numerics::ParameterStore params_;
  numerics::AdamState adam_;
  std::int64_t step_count_ = 0;
  Rng rng_;
  std::vector<std::uint64_t> pretrain_fingerprints_;
  int threads_ = 2;

  std::unique_ptr<TrainBuffers> buffers_;
};

}  // namespace memlab::model
