#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace memlab::scoring {

// One two-alternative recognition trial. `correct` uses the per-token mean
// losses; the summed losses are kept alongside so the choice of aggregation
// stays auditable.
struct RecognitionOutcome {
  std::string trial_id;
  double loss_study_mean = 0.0;
  double loss_foil_mean = 0.0;
  double loss_study_sum = 0.0;
  double loss_foil_sum = 0.0;
  bool correct = false;
};

struct RecallOutcome {
  std::string sentence_id;
  std::int64_t prompt_token_count = 0;
  std::vector<std::int32_t> reference;   // content tokens, no specials
  std::vector<std::int32_t> hypothesis;  // prompt + completion, same length
  double rouge_l = 0.0;
  bool perfect = false;
  std::int64_t common_substring_len = 0;  // contiguous-match variant, recorded
                                          // alongside the subsequence score
};

// true iff loss_s < loss_f; a tie counts as incorrect. Throws on non-finite
// inputs.
bool recognition_trial(double loss_s, double loss_f);

// Fraction of correct outcomes; throws on an empty list.
double recognition_accuracy(const std::vector<RecognitionOutcome>& outcomes);

std::int64_t lcs_length(std::span<const std::int32_t> a, std::span<const std::int32_t> b);

std::int64_t longest_common_substring(std::span<const std::int32_t> a,
                                      std::span<const std::int32_t> b);

// lcs_length(reference, hypothesis) / |reference|. Throws on an empty
// reference.
double rouge_l(std::span<const std::int32_t> reference,
               std::span<const std::int32_t> hypothesis);

}  // namespace memlab::scoring
