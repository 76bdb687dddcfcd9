#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "memlab/model.hpp"
#include "memlab/protocol.hpp"

namespace memlab::runspec {

struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The fully defaulted run specification. Unknown keys in the source document
// are rejected; the resolved form is echoed into every RunRecord.
struct RunSpec {
  std::uint64_t seed = 1;
  std::string out_dir = "runs";
  int workers = 0;  // 0 = library default

  model::TransformerConfig model;
  std::string checkpoint;  // input checkpoint path

  // pretrain
  std::string pretrain_corpus;
  std::int64_t pretrain_token_budget = 2'000'000;
  int pretrain_batch_size = 16;
  double pretrain_lr = 1e-3;
  int pretrain_log_interval = 50;
  std::string pretrain_out;  // output checkpoint path

  // stimuli resources
  std::string sentences_path;
  std::string paraphrases_path;
  std::string synonyms_path;
  std::string vocab_path;
  std::int64_t random_word_count = 25;

  std::vector<int> experiments = {1, 2, 3, 4, 5, 6};
  std::int64_t trials = 600;

  protocol::StudyPhaseConfig study;
  std::string study_out;  // optional studied-checkpoint path

  protocol::SweepGrid sweep = protocol::SweepGrid::defaults();

  protocol::ProbeSchedule retention_schedule = protocol::ProbeSchedule::desk_default();
  std::optional<double> retention_lr;  // defaults to study.lr
  int retention_batch_size = 16;
  std::string interference_path;

  int replications = 4;

  std::optional<double> human_reference;  // optional line in the summary figure

  nlohmann::ordered_json resolved() const;
};

// Parses and validates a spec document; missing file -> SpecError with path.
RunSpec load_spec(const std::string& path);

// Parses from an in-memory document (used by tests and defaults).
RunSpec parse_spec(const nlohmann::json& doc, const std::string& origin);

}  // namespace memlab::runspec
