#include "memlab/runspec.hpp"

#include <fstream>
#include <set>

namespace memlab::runspec {

namespace {

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw SpecError("unknown key '" + key + "' in " + where);
    }
  }
}

template <class T>
T get_or(const nlohmann::json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SpecError("bad value for '" + std::string(key) + "': " + e.what());
  }
}

}  // namespace

RunSpec parse_spec(const nlohmann::json& doc, const std::string& origin) {
  if (!doc.is_object()) throw SpecError("run spec must be a JSON object: " + origin);
  reject_unknown(doc,
                 {"seed", "out_dir", "workers", "model", "checkpoint", "pretrain",
                  "stimuli", "experiments", "trials", "study", "study_out", "sweep",
                  "retention", "replications", "human_reference"},
                 origin);

  RunSpec spec;
  spec.seed = get_or<std::uint64_t>(doc, "seed", 1);
  spec.out_dir = get_or<std::string>(doc, "out_dir", "runs");
  spec.workers = get_or<int>(doc, "workers", 0);
  spec.checkpoint = get_or<std::string>(doc, "checkpoint", "");
  spec.study_out = get_or<std::string>(doc, "study_out", "");
  spec.trials = get_or<std::int64_t>(doc, "trials", 600);
  spec.replications = get_or<int>(doc, "replications", 4);
  if (doc.contains("human_reference")) {
    spec.human_reference = doc.at("human_reference").get<double>();
  }
  if (doc.contains("experiments")) {
    spec.experiments = doc.at("experiments").get<std::vector<int>>();
    for (int e : spec.experiments) {
      if (e < 1 || e > 6) throw SpecError("experiments must be in 1..6");
    }
    if (spec.experiments.empty()) throw SpecError("experiments must not be empty");
  }

  if (doc.contains("model")) {
    const auto& m = doc.at("model");
    reject_unknown(m, {"n_layers", "d_model", "n_heads", "context_len"},
                   origin + ".model");
    spec.model.n_layers = get_or<int>(m, "n_layers", 4);
    spec.model.d_model = get_or<int>(m, "d_model", 128);
    spec.model.n_heads = get_or<int>(m, "n_heads", 4);
    spec.model.context_len = get_or<int>(m, "context_len", 128);
  }
  spec.model.seed = spec.seed;

  if (doc.contains("pretrain")) {
    const auto& p = doc.at("pretrain");
    reject_unknown(p,
                   {"corpus", "token_budget", "batch_size", "lr", "log_interval", "out"},
                   origin + ".pretrain");
    spec.pretrain_corpus = get_or<std::string>(p, "corpus", "");
    spec.pretrain_token_budget = get_or<std::int64_t>(p, "token_budget", 2'000'000);
    spec.pretrain_batch_size = get_or<int>(p, "batch_size", 16);
    spec.pretrain_lr = get_or<double>(p, "lr", 1e-3);
    spec.pretrain_log_interval = get_or<int>(p, "log_interval", 50);
    spec.pretrain_out = get_or<std::string>(p, "out", "");
  }

  if (doc.contains("stimuli")) {
    const auto& s = doc.at("stimuli");
    reject_unknown(s, {"sentences", "paraphrases", "synonyms", "vocab",
                       "random_word_count"},
                   origin + ".stimuli");
    spec.sentences_path = get_or<std::string>(s, "sentences", "");
    spec.paraphrases_path = get_or<std::string>(s, "paraphrases", "");
    spec.synonyms_path = get_or<std::string>(s, "synonyms", "");
    spec.vocab_path = get_or<std::string>(s, "vocab", "");
    spec.random_word_count = get_or<std::int64_t>(s, "random_word_count", 25);
    if (spec.random_word_count < 1) throw SpecError("random_word_count must be >= 1");
  }

  spec.study.seed = spec.seed;
  if (doc.contains("study")) {
    const auto& s = doc.at("study");
    reject_unknown(s, {"exposures", "lr", "batch_size"}, origin + ".study");
    spec.study.exposures = get_or<int>(s, "exposures", 3);
    spec.study.lr = get_or<double>(s, "lr", 1e-3);
    spec.study.batch_size = get_or<int>(s, "batch_size", 16);
  } else {
    spec.study.exposures = 3;
  }
  spec.study.validate();

  if (doc.contains("sweep")) {
    const auto& s = doc.at("sweep");
    reject_unknown(s, {"lrs", "batch_sizes", "metric"}, origin + ".sweep");
    if (s.contains("lrs")) spec.sweep.lrs = s.at("lrs").get<std::vector<double>>();
    if (s.contains("batch_sizes")) {
      spec.sweep.batch_sizes = s.at("batch_sizes").get<std::vector<int>>();
    }
    spec.sweep.metric = get_or<std::string>(s, "metric", "recognition_accuracy");
  }
  spec.sweep.validate();

  if (doc.contains("retention")) {
    const auto& r = doc.at("retention");
    reject_unknown(r, {"schedule", "lr", "batch_size", "interference"},
                   origin + ".retention");
    if (r.contains("schedule")) {
      spec.retention_schedule.steps = r.at("schedule").get<std::vector<std::int64_t>>();
    }
    if (r.contains("lr")) spec.retention_lr = r.at("lr").get<double>();
    spec.retention_batch_size = get_or<int>(r, "batch_size", 16);
    spec.interference_path = get_or<std::string>(r, "interference", "");
  }
  spec.retention_schedule.validate();

  return spec;
}

RunSpec load_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError("cannot open spec file: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError("malformed spec " + path + ": " + e.what());
  }
  return parse_spec(doc, path);
}

nlohmann::ordered_json RunSpec::resolved() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["out_dir"] = out_dir;
  j["workers"] = workers;
  j["model"] = {{"n_layers", model.n_layers},
                {"d_model", model.d_model},
                {"n_heads", model.n_heads},
                {"context_len", model.context_len},
                {"vocab_size", model.vocab_size}};
  j["checkpoint"] = checkpoint;
  j["pretrain"] = {{"corpus", pretrain_corpus},
                   {"token_budget", pretrain_token_budget},
                   {"batch_size", pretrain_batch_size},
                   {"lr", pretrain_lr},
                   {"log_interval", pretrain_log_interval},
                   {"out", pretrain_out}};
  j["stimuli"] = {{"sentences", sentences_path},
                  {"paraphrases", paraphrases_path},
                  {"synonyms", synonyms_path},
                  {"vocab", vocab_path},
                  {"random_word_count", random_word_count}};
  j["experiments"] = experiments;
  j["trials"] = trials;
  j["study"] = {{"exposures", study.exposures},
                {"lr", study.lr},
                {"batch_size", study.batch_size}};
  j["study_out"] = study_out;
  j["sweep"] = {{"lrs", sweep.lrs},
                {"batch_sizes", sweep.batch_sizes},
                {"metric", sweep.metric}};
  j["retention"] = {{"schedule", retention_schedule.steps},
                    {"lr", retention_lr ? *retention_lr : study.lr},
                    {"batch_size", retention_batch_size},
                    {"interference", interference_path}};
  j["replications"] = replications;
  if (human_reference) j["human_reference"] = *human_reference;
  return j;
}

}  // namespace memlab::runspec
