#include "memlab/stimuli.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "memlab/rng.hpp"

namespace memlab::stimuli {

namespace {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

nlohmann::json parse_json(const std::string& content, const std::string& path) {
  try {
    return nlohmann::json::parse(content);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("parse error in " + path + ": " + e.what());
  }
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!cur.empty()) {
        words.push_back(std::move(cur));
        cur.clear();
      }
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view kind_name(StimulusKind kind) {
  switch (kind) {
    case StimulusKind::normal_sentence: return "normal_sentence";
    case StimulusKind::paraphrase: return "paraphrase";
    case StimulusKind::synonym_substitute: return "synonym_substitute";
    case StimulusKind::random_words: return "random_words";
    case StimulusKind::random_string: return "random_string";
  }
  return "unknown";
}

StimulusKind kind_from_name(std::string_view name) {
  if (name == "normal_sentence") return StimulusKind::normal_sentence;
  if (name == "paraphrase") return StimulusKind::paraphrase;
  if (name == "synonym_substitute") return StimulusKind::synonym_substitute;
  if (name == "random_words") return StimulusKind::random_words;
  if (name == "random_string") return StimulusKind::random_string;
  throw std::invalid_argument("unknown stimulus kind: " + std::string(name));
}

Corpus load_sentences(const std::string& path) {
  const std::string content = read_file(path);
  const auto doc = parse_json(content, path);
  if (!doc.is_array()) {
    throw std::runtime_error("sentence file must be a JSON array of strings: " + path);
  }
  if (doc.empty()) throw std::runtime_error("sentence file is empty: " + path);

  Corpus corpus;
  corpus.source_path = path;
  corpus.checksum = hex64(fnv1a64(content.data(), content.size()));
  corpus.items.reserve(doc.size());
  std::unordered_set<std::string> seen;
  std::size_t index = 0;
  for (const auto& entry : doc) {
    if (!entry.is_string()) {
      throw std::runtime_error("sentence file entry " + std::to_string(index) +
                               " is not a string: " + path);
    }
    StimulusItem item;
    item.text = entry.get<std::string>();
    if (item.text.empty()) {
      throw std::runtime_error("empty sentence at index " + std::to_string(index) +
                               " in " + path);
    }
    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "s%06zu", index);
    item.id = idbuf;
    item.kind = StimulusKind::normal_sentence;
    if (!seen.insert(item.text).second) corpus.duplicate_count += 1;
    corpus.items.push_back(std::move(item));
    ++index;
  }
  if (corpus.duplicate_count > 0) {
    std::cerr << "warning: " << corpus.duplicate_count
              << " duplicate sentences retained from " << path << "\n";
  }
  return corpus;
}

ParaphrasePairFile load_paraphrases(const std::string& path) {
  const std::string content = read_file(path);
  const auto doc = parse_json(content, path);
  if (!doc.is_array()) {
    throw std::runtime_error("paraphrase file must be a JSON array of pairs: " + path);
  }
  ParaphrasePairFile file;
  file.checksum = hex64(fnv1a64(content.data(), content.size()));
  std::size_t index = 0;
  for (const auto& entry : doc) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() ||
        !entry[1].is_string()) {
      throw std::runtime_error("paraphrase entry " + std::to_string(index) +
                               " must be [original, paraphrase]: " + path);
    }
    auto original = entry[0].get<std::string>();
    auto paraphrase = entry[1].get<std::string>();
    if (original == paraphrase) {
      throw std::runtime_error("paraphrase entry " + std::to_string(index) +
                               " is identical to its original: " + path);
    }
    file.pairs.emplace_back(std::move(original), std::move(paraphrase));
    ++index;
  }
  if (file.pairs.empty()) throw std::runtime_error("paraphrase file is empty: " + path);
  return file;
}

SynonymLexicon load_synonyms(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon: " + path);
  SynonymLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("lexicon line " + std::to_string(lineno) +
                               " has no tab separator: " + path);
    }
    const std::string word = lower(line.substr(0, tab));
    std::vector<std::string> synonyms;
    std::string syn;
    for (char c : line.substr(tab + 1)) {
      if (c == ',') {
        if (!syn.empty()) synonyms.push_back(std::move(syn)), syn.clear();
      } else {
        syn.push_back(c);
      }
    }
    if (!syn.empty()) synonyms.push_back(std::move(syn));
    for (const auto& s : synonyms) {
      if (lower(s) == word) {
        throw std::runtime_error("lexicon maps '" + word + "' to itself at line " +
                                 std::to_string(lineno) + ": " + path);
      }
    }
    if (word.empty() || synonyms.empty()) {
      throw std::runtime_error("malformed lexicon line " + std::to_string(lineno) +
                               ": " + path);
    }
    lex.entries[word] = std::move(synonyms);
  }
  if (lex.entries.empty()) throw std::runtime_error("lexicon is empty: " + path);
  return lex;
}

std::vector<std::string> load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary: " + path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) words.push_back(line);
  }
  if (words.empty()) throw std::runtime_error("vocabulary is empty: " + path);
  return words;
}

std::pair<StudySet, std::vector<StimulusItem>> sample_disjoint(const Corpus& corpus,
                                                               std::int64_t n_study,
                                                               std::int64_t n_foil,
                                                               std::uint64_t seed) {
  const std::int64_t total = n_study + n_foil;
  if (total > corpus.size()) {
    throw std::invalid_argument("sample_disjoint needs " + std::to_string(total) +
                                " sentences but corpus has " +
                                std::to_string(corpus.size()));
  }
  // partial Fisher-Yates over the index vector
  Rng rng(seed);
  std::vector<std::int64_t> indices(corpus.items.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = static_cast<std::int64_t>(i);
  for (std::int64_t i = 0; i < total; ++i) {
    const auto j = i + static_cast<std::int64_t>(rng.below(indices.size() - i));
    std::swap(indices[i], indices[j]);
  }

  StudySet study;
  study.replication_seed = seed;
  study.items.reserve(n_study);
  for (std::int64_t i = 0; i < n_study; ++i) {
    study.items.push_back(corpus.items[static_cast<std::size_t>(indices[i])]);
  }
  std::vector<StimulusItem> foils;
  foils.reserve(n_foil);
  for (std::int64_t i = n_study; i < total; ++i) {
    foils.push_back(corpus.items[static_cast<std::size_t>(indices[i])]);
  }
  return {std::move(study), std::move(foils)};
}

StimulusItem gen_random_words(const std::vector<std::string>& vocab_words,
                              std::int64_t k, std::uint64_t seed) {
  if (vocab_words.empty()) {
    throw std::invalid_argument("gen_random_words requires a non-empty vocabulary");
  }
  if (k < 1) throw std::invalid_argument("gen_random_words requires k >= 1");
  Rng rng(seed);
  std::vector<std::string> words;
  words.reserve(k);
  for (std::int64_t i = 0; i < k; ++i) {
    words.push_back(vocab_words[rng.below(vocab_words.size())]);
  }
  StimulusItem item;
  item.id = "rw-" + hex64(seed);
  item.text = join_words(words);
  item.kind = StimulusKind::random_words;
  return item;
}

StimulusItem scramble_sentence(const StimulusItem& sentence, std::uint64_t seed) {
  auto words = split_words(sentence.text);
  if (words.empty()) {
    throw std::invalid_argument("scramble_sentence requires at least one word");
  }
  Rng rng(seed);
  rng.shuffle(words);
  for (auto& w : words) {
    std::vector<char> chars(w.begin(), w.end());
    rng.shuffle(chars);
    w.assign(chars.begin(), chars.end());
  }
  StimulusItem item;
  item.id = sentence.id + "-scr";
  item.text = join_words(words);
  item.kind = StimulusKind::random_string;
  return item;
}

namespace {

// Splits a token into leading punctuation, core word, trailing punctuation.
void split_token(const std::string& token, std::string& lead, std::string& core,
                 std::string& tail) {
  std::size_t begin = 0, end = token.size();
  auto is_word_char = [](unsigned char c) { return std::isalnum(c) || c == '\''; };
  while (begin < end && !is_word_char(static_cast<unsigned char>(token[begin]))) ++begin;
  while (end > begin && !is_word_char(static_cast<unsigned char>(token[end - 1]))) --end;
  lead = token.substr(0, begin);
  core = token.substr(begin, end - begin);
  tail = token.substr(end);
}

std::string apply_case_pattern(const std::string& pattern, const std::string& word) {
  if (pattern.empty() || word.empty()) return word;
  std::string out = word;
  const bool all_upper =
      std::all_of(pattern.begin(), pattern.end(), [](unsigned char c) {
        return !std::isalpha(c) || std::isupper(c);
      }) &&
      std::any_of(pattern.begin(), pattern.end(),
                  [](unsigned char c) { return std::isupper(c); });
  if (all_upper && pattern.size() > 1) {
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
  }
  if (std::isupper(static_cast<unsigned char>(pattern[0]))) {
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  }
  return out;
}

}  // namespace

std::optional<StimulusItem> substitute_synonym(const StimulusItem& sentence,
                                               const SynonymLexicon& lexicon,
                                               std::uint64_t seed) {
  auto tokens = split_words(sentence.text);
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string lead, core, tail;
    split_token(tokens[i], lead, core, tail);
    if (!core.empty() && lexicon.entries.count(lower(core))) eligible.push_back(i);
  }
  if (eligible.empty()) return std::nullopt;

  Rng rng(seed);
  const std::size_t pick = eligible[rng.below(eligible.size())];
  std::string lead, core, tail;
  split_token(tokens[pick], lead, core, tail);
  const auto& synonyms = lexicon.entries.at(lower(core));
  const std::string& synonym = synonyms[rng.below(synonyms.size())];
  tokens[pick] = lead + apply_case_pattern(core, synonym) + tail;

  StimulusItem item;
  item.id = sentence.id + "-syn";
  item.text = join_words(tokens);
  item.kind = StimulusKind::synonym_substitute;
  if (item.text == sentence.text) return std::nullopt;  // degenerate substitution
  return item;
}

TrialBuild build_trials(int experiment, const FoilResources& res, std::int64_t n,
                        std::uint64_t seed) {
  if (experiment < 1 || experiment > 6) {
    throw std::invalid_argument("experiment must be in 1..6, got " +
                                std::to_string(experiment));
  }
  auto need_sentences = [&]() -> const Corpus& {
    if (!res.sentences) {
      throw std::invalid_argument("experiment " + std::to_string(experiment) +
                                  " requires a sentence corpus");
    }
    return *res.sentences;
  };
  auto need_vocab = [&]() -> const std::vector<std::string>& {
    if (!res.vocab_words || res.vocab_words->empty()) {
      throw std::invalid_argument("experiment " + std::to_string(experiment) +
                                  " requires a word vocabulary");
    }
    return *res.vocab_words;
  };

  TrialBuild build;
  build.trials.reserve(n);

  switch (experiment) {
    case 1: {
      const auto& corpus = need_sentences();
      // oversample foils so duplicate texts in the corpus can be skipped
      const std::int64_t slack = std::min<std::int64_t>(corpus.size() - 2 * n, n / 2 + 8);
      auto [study, foils] =
          sample_disjoint(corpus, n, n + std::max<std::int64_t>(0, slack), seed);
      std::unordered_set<std::string> study_texts;
      for (const auto& s : study.items) study_texts.insert(s.text);
      std::size_t fi = 0;
      for (std::int64_t i = 0; i < n; ++i) {
        while (fi < foils.size() && study_texts.count(foils[fi].text)) {
          ++fi;
          build.dropped += 1;
        }
        if (fi >= foils.size()) {
          throw std::invalid_argument("experiment 1: not enough distinct foils");
        }
        build.trials.push_back(TrialPair{study.items[static_cast<std::size_t>(i)],
                                         foils[fi++], 1});
      }
      break;
    }
    case 2: {
      if (!res.paraphrases) {
        throw std::invalid_argument("experiment 2 requires a paraphrase pair file");
      }
      const auto& pairs = res.paraphrases->pairs;
      if (static_cast<std::int64_t>(pairs.size()) < n) {
        throw std::invalid_argument("experiment 2 needs " + std::to_string(n) +
                                    " paraphrase pairs, file has " +
                                    std::to_string(pairs.size()));
      }
      Rng rng(derive_seed(seed, "exp2-sample"));
      std::vector<std::size_t> idx(pairs.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      for (std::int64_t i = 0; i < n; ++i) {
        const auto j = i + static_cast<std::int64_t>(rng.below(idx.size() - i));
        std::swap(idx[i], idx[j]);
      }
      for (std::int64_t i = 0; i < n; ++i) {
        const auto& [original, paraphrase] = pairs[idx[static_cast<std::size_t>(i)]];
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "p%06zu", idx[static_cast<std::size_t>(i)]);
        StimulusItem study{idbuf, original, StimulusKind::normal_sentence};
        StimulusItem foil{std::string(idbuf) + "-par", paraphrase,
                          StimulusKind::paraphrase};
        build.trials.push_back(TrialPair{std::move(study), std::move(foil), 2});
      }
      break;
    }
    case 3: {
      const auto& corpus = need_sentences();
      if (!res.lexicon) {
        throw std::invalid_argument("experiment 3 requires a synonym lexicon");
      }
      auto [candidates, unused] =
          sample_disjoint(corpus, corpus.size(), 0, derive_seed(seed, "exp3-sample"));
      std::int64_t made = 0;
      for (std::size_t ci = 0; ci < candidates.items.size() && made < n; ++ci) {
        const auto& sent = candidates.items[ci];
        auto foil = substitute_synonym(sent, *res.lexicon,
                                       derive_seed(seed, "exp3-sub", ci));
        if (!foil) {
          build.dropped += 1;
          continue;
        }
        build.trials.push_back(TrialPair{sent, std::move(*foil), 3});
        made += 1;
      }
      break;
    }
    case 4: {
      const auto& vocab = need_vocab();
      std::unordered_set<std::string> study_texts;
      for (std::int64_t i = 0; i < n; ++i) {
        auto study = gen_random_words(vocab, res.random_word_count,
                                      derive_seed(seed, "exp4-study", i));
        study_texts.insert(study.text);
        build.trials.push_back(TrialPair{std::move(study), StimulusItem{}, 4});
      }
      for (std::int64_t i = 0; i < n; ++i) {
        // retry on the rare draw that collides with a study text
        for (std::uint64_t attempt = 0;; ++attempt) {
          auto foil = gen_random_words(
              vocab, res.random_word_count,
              derive_seed(seed, "exp4-foil", static_cast<std::uint64_t>(i) +
                                                 (attempt << 32)));
          if (study_texts.count(foil.text)) {
            if (attempt > 64) {
              throw std::invalid_argument(
                  "experiment 4: vocabulary too small to draw distinct foils");
            }
            build.dropped += 1;
            continue;
          }
          foil.id += "-f";
          build.trials[static_cast<std::size_t>(i)].foil = std::move(foil);
          break;
        }
      }
      break;
    }
    case 5: {
      const auto& vocab = need_vocab();
      const auto& corpus = need_sentences();
      auto [foil_set, unused] =
          sample_disjoint(corpus, n, 0, derive_seed(seed, "exp5-foils"));
      for (std::int64_t i = 0; i < n; ++i) {
        auto study = gen_random_words(vocab, res.random_word_count,
                                      derive_seed(seed, "exp5-study", i));
        auto foil = foil_set.items[static_cast<std::size_t>(i)];
        build.trials.push_back(TrialPair{std::move(study), std::move(foil), 5});
      }
      break;
    }
    case 6: {
      const auto& corpus = need_sentences();
      auto [candidates, unused] =
          sample_disjoint(corpus, corpus.size(), 0, derive_seed(seed, "exp6-sample"));
      std::int64_t made = 0;
      for (std::size_t ci = 0; ci < candidates.items.size() && made < n; ++ci) {
        const auto& sent = candidates.items[ci];
        auto scrambled = scramble_sentence(sent, derive_seed(seed, "exp6-scr", ci));
        if (scrambled.text == sent.text) {
          build.dropped += 1;  // too short to scramble into something new
          continue;
        }
        build.trials.push_back(TrialPair{std::move(scrambled), sent, 6});
        made += 1;
      }
      break;
    }
    default:
      break;
  }

  // paired-design experiments derive the foil from the study item; the others
  // must never leak a study text into the foil list
  std::unordered_set<std::string> study_texts;
  for (const auto& t : build.trials) study_texts.insert(t.study.text);
  for (const auto& t : build.trials) {
    if (t.study.text == t.foil.text) {
      throw std::runtime_error("trial with identical study and foil text in experiment " +
                               std::to_string(experiment));
    }
    if (study_texts.count(t.foil.text)) {
      throw std::runtime_error("study text appears in the foil list of experiment " +
                               std::to_string(experiment));
    }
  }
  return build;
}

StudySet study_set_of(const std::vector<TrialPair>& trials, int experiment,
                      std::uint64_t seed) {
  StudySet set;
  set.experiment = experiment;
  set.replication_seed = seed;
  set.items.reserve(trials.size());
  for (const auto& t : trials) set.items.push_back(t.study);
  return set;
}

}  // namespace memlab::stimuli
