#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "memlab/model.hpp"
#include "memlab/scoring.hpp"
#include "memlab/stimuli.hpp"

namespace memlab::protocol {

struct StudyPhaseConfig {
  int exposures = 1;  // epochs over the study set, 1..3
  double lr = 1e-3;
  int batch_size = 16;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SweepGrid {
  std::vector<double> lrs;
  std::vector<int> batch_sizes;
  std::string metric = "recognition_accuracy";  // or "mean_rouge_l"

  static SweepGrid defaults();
  void validate() const;
};

struct ProbeSchedule {
  std::vector<std::int64_t> steps;  // strictly increasing, step 0 present

  static ProbeSchedule desk_default();
  void validate() const;
};

struct StudyPhaseReport {
  std::vector<std::string> pretrain_overlap_ids;  // studied items found in the
                                                  // pretraining corpus
  std::vector<double> epoch_batch_losses;         // flattened, in step order
  std::int64_t optimizer_steps = 0;
};

// Per-epoch snapshot hook: called with (epoch index starting at 1, model
// after that epoch).
using EpochCallback = std::function<void(int, const model::Transformer&)>;

// Trains `exposures` epochs over the study set, shuffling item order each
// epoch from cfg.seed. The input model is untouched; the studied copy is
// returned.
model::Transformer run_study_phase(const model::Transformer& base,
                                   const stimuli::StudySet& study_set,
                                   const StudyPhaseConfig& cfg,
                                   StudyPhaseReport* report = nullptr,
                                   const EpochCallback& per_epoch = {});

struct RecognitionProbeResult {
  std::vector<scoring::RecognitionOutcome> outcomes;
  double accuracy = 0.0;
  double mean_study_loss = 0.0;
  double mean_foil_loss = 0.0;
};

RecognitionProbeResult probe_recognition(const model::Transformer& checkpoint,
                                         const std::vector<stimuli::TrialPair>& trials);

struct RecallProbeResult {
  std::vector<scoring::RecallOutcome> outcomes;
  double mean_rouge_l = 0.0;
  std::vector<std::string> perfect_ids;
  std::int64_t skipped_truncated = 0;
};

// Prompts with the first floor(n/2) content tokens of each study sentence and
// greedily decodes the remainder.
RecallProbeResult probe_recall(const model::Transformer& checkpoint,
                               const stimuli::StudySet& study_set);

struct RetentionProbes {
  std::map<int, std::vector<stimuli::TrialPair>> recognition_trials;
  std::map<std::string, stimuli::StudySet> recall_sets;  // keyed by kind name
};

struct RetentionTrainConfig {
  double lr = 1e-3;
  int batch_size = 16;
  std::uint64_t seed = 0;
};

struct RetentionPoint {
  std::int64_t step = 0;
  std::map<int, double> recognition_accuracy;
  std::map<int, double> mean_study_loss;
  std::map<int, double> mean_foil_loss;
  std::map<std::string, double> recall_rouge_l;  // keyed by stimulus kind
};

struct RetentionSeries {
  std::vector<RetentionPoint> points;
  std::int64_t corpus_wraps = 0;
  // per-trial outcomes from the step-0 baseline
  std::map<int, RecognitionProbeResult> baseline_recognition;
  std::map<std::string, RecallProbeResult> baseline_recall;
};

// Continues training the studied model one interference batch per update and
// probes at every scheduled step, starting with the step-0 baseline.
RetentionSeries run_retention(const model::Transformer& studied,
                              const stimuli::Corpus& interference,
                              const ProbeSchedule& schedule,
                              const RetentionTrainConfig& train_cfg,
                              const RetentionProbes& probes);

struct SweepCell {
  double lr = 0.0;
  int batch_size = 0;
  double metric = 0.0;
  bool failed = false;
  std::string error;
  std::map<int, double> per_experiment;  // metric per experiment id
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::size_t best_index = 0;
  std::map<int, std::size_t> best_per_experiment;
};

struct StudyMaterial {
  stimuli::StudySet study;
  std::vector<stimuli::TrialPair> trials;
  std::int64_t dropped = 0;
};

// Builds one experiment's study set and trials from shared resources.
StudyMaterial build_material(int experiment, const stimuli::FoilResources& resources,
                             std::int64_t n, std::uint64_t seed);

// One study+probe run per grid cell, all from the same base checkpoint. Cell
// metric is the mean over experiments; ties rank by lower lr then smaller
// batch.
SweepResult run_sweep(
    const model::Transformer& base, const std::vector<int>& experiments,
    const std::function<StudyMaterial(int experiment)>& material_for,
    const SweepGrid& grid, int exposures, std::uint64_t seed);

struct ReplicateResult {
  std::vector<std::map<std::string, double>> per_rep;
  std::map<std::string, double> mean;
  std::map<std::string, double> stderr_;
  std::vector<std::uint64_t> rep_seeds;
};

// Runs `run` once per replication with derived seeds and aggregates every
// returned metric as mean and stderr = sd/sqrt(n).
ReplicateResult replicate(
    int n_reps, std::uint64_t master_seed,
    const std::function<std::map<std::string, double>(int, std::uint64_t)>& run);

}  // namespace memlab::protocol
