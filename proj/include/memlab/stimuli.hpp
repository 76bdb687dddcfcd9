#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memlab::stimuli {

enum class StimulusKind {
  normal_sentence,
  paraphrase,
  synonym_substitute,
  random_words,
  random_string,
};

std::string_view kind_name(StimulusKind kind);
StimulusKind kind_from_name(std::string_view name);

struct StimulusItem {
  std::string id;
  std::string text;
  StimulusKind kind = StimulusKind::normal_sentence;
};

struct Corpus {
  std::vector<StimulusItem> items;
  std::string source_path;
  std::string checksum;  // fnv1a64 of the file bytes, hex
  std::int64_t duplicate_count = 0;

  std::int64_t size() const { return static_cast<std::int64_t>(items.size()); }
};

struct TrialPair {
  StimulusItem study;
  StimulusItem foil;
  int experiment = 1;
};

struct StudySet {
  std::vector<StimulusItem> items;
  std::uint64_t replication_seed = 0;
  int experiment = 1;
};

struct SynonymLexicon {
  std::map<std::string, std::vector<std::string>> entries;
};

struct ParaphrasePairFile {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string checksum;
};

// Sentence file: UTF-8 JSON array of strings.
Corpus load_sentences(const std::string& path);

// Paraphrase file: JSON array of [original, paraphrase] string pairs.
ParaphrasePairFile load_paraphrases(const std::string& path);

// Lexicon file: lines of "word<TAB>synonym1,synonym2,...".
SynonymLexicon load_synonyms(const std::string& path);

// Vocabulary file: one word per line.
std::vector<std::string> load_vocabulary(const std::string& path);

// Uniform sampling without replacement; study and foil index sets disjoint.
std::pair<StudySet, std::vector<StimulusItem>> sample_disjoint(const Corpus& corpus,
                                                               std::int64_t n_study,
                                                               std::int64_t n_foil,
                                                               std::uint64_t seed);

// k words drawn i.i.d. uniformly with replacement, space-joined.
StimulusItem gen_random_words(const std::vector<std::string>& vocab_words,
                              std::int64_t k, std::uint64_t seed);

// Shuffles word order, then the characters inside each word.
StimulusItem scramble_sentence(const StimulusItem& sentence, std::uint64_t seed);

// Replaces one uniformly chosen eligible word occurrence with a uniformly
// chosen synonym. nullopt when no word of the sentence is in the lexicon.
std::optional<StimulusItem> substitute_synonym(const StimulusItem& sentence,
                                               const SynonymLexicon& lexicon,
                                               std::uint64_t seed);

struct FoilResources {
  const Corpus* sentences = nullptr;
  const ParaphrasePairFile* paraphrases = nullptr;
  const SynonymLexicon* lexicon = nullptr;
  const std::vector<std::string>* vocab_words = nullptr;
  std::int64_t random_word_count = 25;
};

struct TrialBuild {
  std::vector<TrialPair> trials;
  std::int64_t dropped = 0;  // experiment-3 sentences with no lexicon hit, etc.
};

// Experiment designs:
//   1 normal vs normal      4 random words vs random words
//   2 normal vs paraphrase  5 random words vs normal
//   3 normal vs synonym     6 random string vs its source sentence
TrialBuild build_trials(int experiment, const FoilResources& resources, std::int64_t n,
                        std::uint64_t seed);

// The study items of a trial list, as the set to train on.
StudySet study_set_of(const std::vector<TrialPair>& trials, int experiment,
                      std::uint64_t seed);

}  // namespace memlab::stimuli
