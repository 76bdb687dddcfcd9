#include "memlab/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <unordered_set>

#include "memlab/parallel.hpp"
#include "memlab/rng.hpp"

namespace memlab::protocol {

void StudyPhaseConfig::validate() const {
  if (exposures < 1 || exposures > 3) {
    throw std::invalid_argument("exposures must be 1, 2 or 3");
  }
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw std::invalid_argument("study lr must be finite and >= 0");
  }
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
}

SweepGrid SweepGrid::defaults() {
  SweepGrid g;
  // geometric 1e-5 .. 1e-2, 7 points (sqrt(10) spacing)
  g.lrs = {1e-5, 3.1622776601683795e-5, 1e-4, 3.1622776601683795e-4,
           1e-3, 3.1622776601683795e-3, 1e-2};
  g.batch_sizes = {8, 16, 32, 64};
  g.metric = "recognition_accuracy";
  return g;
}

void SweepGrid::validate() const {
  if (lrs.empty() || batch_sizes.empty()) {
    throw std::invalid_argument("sweep grid must not be empty");
  }
  if (metric != "recognition_accuracy" && metric != "mean_rouge_l") {
    throw std::invalid_argument("unknown sweep metric: " + metric);
  }
}

ProbeSchedule ProbeSchedule::desk_default() {
  return ProbeSchedule{{0, 1, 3, 10, 30, 100, 300, 1000, 3000, 10000}};
}

void ProbeSchedule::validate() const {
  if (steps.empty() || steps.front() != 0) {
    throw std::invalid_argument("probe schedule must start at step 0");
  }
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i] <= steps[i - 1]) {
      throw std::invalid_argument("probe schedule must be strictly increasing");
    }
  }
}

namespace {

std::vector<std::vector<model::TokenSequence>> make_epoch_batches(
    const stimuli::StudySet& study_set, int batch_size, int context_len, Rng& rng) {
  std::vector<std::size_t> order(study_set.items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<std::vector<model::TokenSequence>> batches;
  std::vector<model::TokenSequence> batch;
  batch.reserve(batch_size);
  for (std::size_t idx : order) {
    batch.push_back(model::tokenize(study_set.items[idx].text, context_len));
    if (static_cast<int>(batch.size()) == batch_size) {
      batches.push_back(std::move(batch));
      batch.clear();
      batch.reserve(batch_size);
    }
  }
  if (!batch.empty()) batches.push_back(std::move(batch));
  return batches;
}

}  // namespace

model::Transformer run_study_phase(const model::Transformer& base,
                                   const stimuli::StudySet& study_set,
                                   const StudyPhaseConfig& cfg,
                                   StudyPhaseReport* report,
                                   const EpochCallback& per_epoch) {
  cfg.validate();
  if (study_set.items.empty()) {
    throw std::invalid_argument("study set is empty");
  }

  StudyPhaseReport local_report;
  StudyPhaseReport& rep = report ? *report : local_report;

  const auto& fingerprints = base.pretrain_fingerprints();
  if (!fingerprints.empty()) {
    for (const auto& item : study_set.items) {
      const auto h = fnv1a64(item.text);
      if (std::binary_search(fingerprints.begin(), fingerprints.end(), h)) {
        rep.pretrain_overlap_ids.push_back(item.id);
      }
    }
    if (!rep.pretrain_overlap_ids.empty()) {
      std::cerr << "warning: " << rep.pretrain_overlap_ids.size()
                << " study sentences appear verbatim in the pretraining corpus\n";
    }
  }

  model::Transformer studied(base);
  const int context_len = studied.config().context_len;
  for (int epoch = 1; epoch <= cfg.exposures; ++epoch) {
    Rng rng(derive_seed(cfg.seed, "study-epoch", static_cast<std::uint64_t>(epoch)));
    auto batches = make_epoch_batches(study_set, cfg.batch_size, context_len, rng);
    const auto losses = studied.train_steps(batches, cfg.lr);
    rep.optimizer_steps += static_cast<std::int64_t>(losses.size());
    rep.epoch_batch_losses.insert(rep.epoch_batch_losses.end(), losses.begin(),
                                  losses.end());
    if (per_epoch) per_epoch(epoch, studied);
  }
  return studied;
}

RecognitionProbeResult probe_recognition(const model::Transformer& checkpoint,
                                         const std::vector<stimuli::TrialPair>& trials) {
  RecognitionProbeResult result;
  result.outcomes.resize(trials.size());
  const int context_len = checkpoint.config().context_len;

  run_parallel(trials.size(), checkpoint.threads(), [&](std::size_t i) {
    const auto& trial = trials[i];
    const auto study_seq = model::tokenize(trial.study.text, context_len);
    const auto foil_seq = model::tokenize(trial.foil.text, context_len);
    const auto study_loss = checkpoint.sequence_loss_detail(study_seq);
    const auto foil_loss = checkpoint.sequence_loss_detail(foil_seq);
    auto& o = result.outcomes[i];
    o.trial_id = trial.study.id + "/" + trial.foil.id;
    o.loss_study_mean = study_loss.mean;
    o.loss_foil_mean = foil_loss.mean;
    o.loss_study_sum = study_loss.sum;
    o.loss_foil_sum = foil_loss.sum;
    o.correct = scoring::recognition_trial(o.loss_study_mean, o.loss_foil_mean);
  });

  result.accuracy = scoring::recognition_accuracy(result.outcomes);
  double study_sum = 0.0, foil_sum = 0.0;
  for (const auto& o : result.outcomes) {
    study_sum += o.loss_study_mean;
    foil_sum += o.loss_foil_mean;
  }
  result.mean_study_loss = study_sum / static_cast<double>(result.outcomes.size());
  result.mean_foil_loss = foil_sum / static_cast<double>(result.outcomes.size());
  return result;
}

RecallProbeResult probe_recall(const model::Transformer& checkpoint,
                               const stimuli::StudySet& study_set) {
  RecallProbeResult result;
  const int context_len = checkpoint.config().context_len;

  struct Task {
    const stimuli::StimulusItem* item;
    model::TokenSequence reference_seq;
  };
  std::vector<Task> tasks;
  for (const auto& item : study_set.items) {
    auto seq = model::tokenize(item.text, context_len);
    if (seq.truncated) {
      result.skipped_truncated += 1;
      continue;
    }
    tasks.push_back(Task{&item, std::move(seq)});
  }

  result.outcomes.resize(tasks.size());
  run_parallel(tasks.size(), checkpoint.threads(), [&](std::size_t i) {
    const auto& task = tasks[i];
    // content tokens: strip BOS and EOS
    std::vector<std::int32_t> reference(task.reference_seq.ids.begin() + 1,
                                        task.reference_seq.ids.end() - 1);
    const auto n = static_cast<std::int64_t>(reference.size());
    const std::int64_t prompt_len = n / 2;
    const std::int64_t n_new = n - prompt_len;

    model::TokenSequence prompt;
    prompt.ids.push_back(model::Vocabulary::kBos);
    prompt.ids.insert(prompt.ids.end(), reference.begin(), reference.begin() + prompt_len);

    const auto decoded = checkpoint.greedy_decode(prompt, static_cast<int>(n_new));
    std::vector<std::int32_t> hypothesis(decoded.ids.begin() + 1, decoded.ids.end());

    auto& o = result.outcomes[i];
    o.sentence_id = task.item->id;
    o.prompt_token_count = prompt_len;
    o.reference = std::move(reference);
    o.hypothesis = std::move(hypothesis);
    o.rouge_l = scoring::rouge_l(o.reference, o.hypothesis);
    o.perfect = o.rouge_l == 1.0;
    o.common_substring_len = scoring::longest_common_substring(o.reference, o.hypothesis);
  });

  double sum = 0.0;
  for (const auto& o : result.outcomes) {
    sum += o.rouge_l;
    if (o.perfect) result.perfect_ids.push_back(o.sentence_id);
  }
  result.mean_rouge_l =
      result.outcomes.empty() ? 0.0 : sum / static_cast<double>(result.outcomes.size());
  return result;
}

namespace {

RetentionPoint probe_point(std::int64_t step, const model::Transformer& snapshot,
                           const RetentionProbes& probes,
                           RetentionSeries* baseline_sink) {
  RetentionPoint point;
  point.step = step;
  for (const auto& [experiment, trials] : probes.recognition_trials) {
    auto res = probe_recognition(snapshot, trials);
    point.recognition_accuracy[experiment] = res.accuracy;
    point.mean_study_loss[experiment] = res.mean_study_loss;
    point.mean_foil_loss[experiment] = res.mean_foil_loss;
    if (baseline_sink) baseline_sink->baseline_recognition[experiment] = std::move(res);
  }
  for (const auto& [kind, set] : probes.recall_sets) {
    auto res = probe_recall(snapshot, set);
    point.recall_rouge_l[kind] = res.mean_rouge_l;
    if (baseline_sink) baseline_sink->baseline_recall[kind] = std::move(res);
  }
  return point;
}

}  // namespace

RetentionSeries run_retention(const model::Transformer& studied,
                              const stimuli::Corpus& interference,
                              const ProbeSchedule& schedule,
                              const RetentionTrainConfig& train_cfg,
                              const RetentionProbes& probes) {
  schedule.validate();
  if (train_cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (interference.items.empty()) {
    throw std::invalid_argument("interference corpus is empty");
  }

  // interference must not contain any studied sentence
  std::unordered_set<std::string> studied_texts;
  for (const auto& [kind, set] : probes.recall_sets) {
    for (const auto& item : set.items) studied_texts.insert(item.text);
  }
  for (const auto& [experiment, trials] : probes.recognition_trials) {
    for (const auto& t : trials) studied_texts.insert(t.study.text);
  }
  for (const auto& item : interference.items) {
    if (studied_texts.count(item.text)) {
      throw std::invalid_argument("interference corpus contains studied sentence " +
                                  item.id);
    }
  }

  RetentionSeries series;
  model::Transformer current(studied);
  const int context_len = current.config().context_len;

  series.points.push_back(probe_point(0, current, probes, &series));

  Rng order_rng(derive_seed(train_cfg.seed, "interference-order"));
  std::vector<std::size_t> order(interference.items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  order_rng.shuffle(order);
  std::size_t cursor = 0;

  std::int64_t update = 0;
  const std::int64_t max_step = schedule.steps.back();
  std::size_t next_probe = 1;
  while (update < max_step) {
    std::vector<std::vector<model::TokenSequence>> one_batch(1);
    auto& batch = one_batch[0];
    batch.reserve(train_cfg.batch_size);
    for (int i = 0; i < train_cfg.batch_size; ++i) {
      if (cursor >= order.size()) {
        cursor = 0;
        order_rng.shuffle(order);
        series.corpus_wraps += 1;
      }
      batch.push_back(
          model::tokenize(interference.items[order[cursor++]].text, context_len));
    }
    current.train_steps(one_batch, train_cfg.lr);
    update += 1;
    if (next_probe < schedule.steps.size() && update == schedule.steps[next_probe]) {
      series.points.push_back(probe_point(update, current, probes, nullptr));
      next_probe += 1;
    }
  }
  return series;
}

StudyMaterial build_material(int experiment, const stimuli::FoilResources& resources,
                             std::int64_t n, std::uint64_t seed) {
  auto build = stimuli::build_trials(experiment, resources, n, seed);
  StudyMaterial material;
  material.trials = std::move(build.trials);
  material.dropped = build.dropped;
  material.study = stimuli::study_set_of(material.trials, experiment, seed);
  return material;
}

SweepResult run_sweep(
    const model::Transformer& base, const std::vector<int>& experiments,
    const std::function<StudyMaterial(int experiment)>& material_for,
    const SweepGrid& grid, int exposures, std::uint64_t seed) {
  grid.validate();
  if (experiments.empty()) throw std::invalid_argument("sweep needs >= 1 experiment");

  std::map<int, StudyMaterial> materials;
  for (int e : experiments) materials.emplace(e, material_for(e));

  SweepResult result;
  for (double lr : grid.lrs) {
    for (int batch_size : grid.batch_sizes) {
      SweepCell cell;
      cell.lr = lr;
      cell.batch_size = batch_size;
      try {
        double metric_sum = 0.0;
        for (int e : experiments) {
          const auto& material = materials.at(e);
          StudyPhaseConfig cfg;
          cfg.exposures = exposures;
          cfg.lr = lr;
          cfg.batch_size = batch_size;
          cfg.seed = derive_seed(seed, "sweep-study", static_cast<std::uint64_t>(e));
          auto studied = run_study_phase(base, material.study, cfg);
          double metric = 0.0;
          if (grid.metric == "mean_rouge_l") {
            metric = probe_recall(studied, material.study).mean_rouge_l;
          } else {
            metric = probe_recognition(studied, material.trials).accuracy;
          }
          cell.per_experiment[e] = metric;
          metric_sum += metric;
        }
        cell.metric = metric_sum / static_cast<double>(experiments.size());
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
        cell.metric = 0.0;
      }
      result.cells.push_back(std::move(cell));
    }
  }

  // first strictly-better cell wins; grid order already ranks ties by lower
  // lr then smaller batch
  bool found = false;
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const auto& c = result.cells[i];
    if (c.failed) continue;
    if (!found || c.metric > result.cells[result.best_index].metric) {
      result.best_index = i;
      found = true;
    }
  }
  if (!found) throw std::runtime_error("every sweep cell failed");

  for (int e : experiments) {
    bool first = true;
    std::size_t best = 0;
    for (std::size_t i = 0; i < result.cells.size(); ++i) {
      const auto& c = result.cells[i];
      if (c.failed || !c.per_experiment.count(e)) continue;
      if (first || c.per_experiment.at(e) > result.cells[best].per_experiment.at(e)) {
        best = i;
        first = false;
      }
    }
    if (!first) result.best_per_experiment[e] = best;
  }
  return result;
}

ReplicateResult replicate(
    int n_reps, std::uint64_t master_seed,
    const std::function<std::map<std::string, double>(int, std::uint64_t)>& run) {
  if (n_reps < 2) throw std::invalid_argument("replicate needs n_reps >= 2");
  ReplicateResult result;
  for (int rep = 0; rep < n_reps; ++rep) {
    const auto rep_seed =
        derive_seed(master_seed, "replication", static_cast<std::uint64_t>(rep));
    result.rep_seeds.push_back(rep_seed);
    result.per_rep.push_back(run(rep, rep_seed));
  }

  std::map<std::string, std::vector<double>> series;
  for (const auto& rep : result.per_rep) {
    for (const auto& [key, value] : rep) series[key].push_back(value);
  }
  for (const auto& [key, values] : series) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const auto n = static_cast<double>(values.size());
    const double sd = values.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    result.mean[key] = mean;
    result.stderr_[key] = sd / std::sqrt(n);
  }
  return result;
}

}  // namespace memlab::protocol
