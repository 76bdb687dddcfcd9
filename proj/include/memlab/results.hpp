#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "memlab/protocol.hpp"
#include "memlab/scoring.hpp"

namespace memlab::results {

struct VersionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

// One run, self-contained: config, seeds, outcomes and aggregates. The
// document is the source of truth; accessors are views over it.
struct RunRecord {
  nlohmann::ordered_json doc;

  std::string id() const { return doc.at("run_id").get<std::string>(); }
  std::string kind() const { return doc.at("kind").get<std::string>(); }
  const nlohmann::ordered_json& config() const { return doc.at("config"); }
  const nlohmann::ordered_json& aggregates() const { return doc.at("aggregates"); }
};

// Builds the record skeleton; run_id hashes the config together with the
// seed so distinct runs never share a filename.
RunRecord make_record(const std::string& kind, const nlohmann::ordered_json& config,
                      std::uint64_t seed, const std::string& timestamp);

// Current UTC time, or the MEMLAB_TIMESTAMP environment override for
// byte-reproducible records.
std::string record_timestamp();

// Writes <dir>/<run_id>.json and returns the path.
std::string write_record(const RunRecord& record, const std::string& dir);

RunRecord read_record(const std::string& path);

struct AggregateSummary {
  std::string metric;
  std::vector<double> values;  // per replication
  double mean = 0.0;
  double stderr_ = 0.0;  // sample sd / sqrt(n)
};

AggregateSummary summarize(const std::string& metric, std::vector<double> values);

// json conversions for outcome payloads
nlohmann::ordered_json to_json(const scoring::RecognitionOutcome& o);
nlohmann::ordered_json to_json(const scoring::RecallOutcome& o);
nlohmann::ordered_json to_json(const protocol::RecognitionProbeResult& r);
nlohmann::ordered_json to_json(const protocol::RecallProbeResult& r);
nlohmann::ordered_json to_json(const protocol::RetentionSeries& s);

struct EmitResult {
  std::string csv_path;
  std::string svg_path;  // empty when the figure was skipped
};

// Figure-1 style table and grouped bars: experiment x exposures, mean and
// stderr over replications. `human_reference` draws a horizontal line.
EmitResult emit_recognition_summary(const std::vector<RunRecord>& records,
                                    const std::string& out_dir,
                                    std::optional<double> human_reference);

// Figure-2 style overlaid loss histograms, before/after exposure.
EmitResult emit_loss_histograms(const std::vector<double>& pre_study,
                                const std::vector<double>& pre_foil,
                                const std::vector<double>& post_study,
                                const std::vector<double>& post_foil, int experiment,
                                const std::string& out_dir);

// Figure-4 style three-panel comparison of perfectly recalled sentences vs
// the rest: token lengths, pre-exposure losses, post-exposure losses.
EmitResult emit_perfect_recall_analysis(
    const std::vector<scoring::RecallOutcome>& outcomes,
    const std::map<std::string, double>& pre_losses,
    const std::map<std::string, double>& post_losses, const std::string& out_dir);

// Figure-5 style retention curves on a log-x axis with the step-0 baseline
// drawn as a star left of the axis.
EmitResult emit_retention_curves(const std::vector<protocol::RetentionSeries>& series,
                                 const std::string& out_dir);

}  // namespace memlab::results
