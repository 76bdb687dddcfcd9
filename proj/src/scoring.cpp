#include "memlab/scoring.hpp"

#include <cmath>
#include <stdexcept>

#include "memlab/numerics.hpp"

namespace memlab::scoring {

bool recognition_trial(double loss_s, double loss_f) {
  if (!std::isfinite(loss_s) || !std::isfinite(loss_f)) {
    throw numerics::NumericError("recognition_trial requires finite losses");
  }
  return loss_s < loss_f;
}

double recognition_accuracy(const std::vector<RecognitionOutcome>& outcomes) {
  if (outcomes.empty()) {
    throw std::invalid_argument("recognition_accuracy over an empty trial list");
  }
  std::int64_t correct = 0;
  for (const auto& o : outcomes) correct += o.correct ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(outcomes.size());
}

std::int64_t lcs_length(std::span<const std::int32_t> a, std::span<const std::int32_t> b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0 || m == 0) return 0;
  // single rolling row
  std::vector<std::int64_t> prev(m + 1, 0), cur(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      if (a[i - 1] == b[j - 1]) {
        cur[j] = prev[j - 1] + 1;
      } else {
        cur[j] = std::max(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

std::int64_t longest_common_substring(std::span<const std::int32_t> a,
                                      std::span<const std::int32_t> b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0 || m == 0) return 0;
  std::vector<std::int64_t> prev(m + 1, 0), cur(m + 1, 0);
  std::int64_t best = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      if (a[i - 1] == b[j - 1]) {
        cur[j] = prev[j - 1] + 1;
        best = std::max(best, cur[j]);
      } else {
        cur[j] = 0;
      }
    }
    std::swap(prev, cur);
  }
  return best;
}

double rouge_l(std::span<const std::int32_t> reference,
               std::span<const std::int32_t> hypothesis) {
  if (reference.empty()) {
    throw std::invalid_argument("rouge_l requires a non-empty reference");
  }
  return static_cast<double>(lcs_length(reference, hypothesis)) /
         static_cast<double>(reference.size());
}

}  // namespace memlab::scoring
