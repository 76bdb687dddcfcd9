#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace memlab::testsupport {

// Deterministic synthetic corpora: template-grammar sentences over a small
// English word list, plus pseudo-words for the random-word vocabulary. The
// three sentence pools are mutually disjoint.
struct FixtureCorpora {
  std::vector<std::string> pretrain;
  std::vector<std::string> stimuli;
  std::vector<std::string> interference;
  std::vector<std::string> vocab;  // real + pseudo words, one per entry
  std::vector<std::pair<std::string, std::string>> paraphrases;  // of stimuli
  std::string synonyms_tsv;
};

FixtureCorpora make_fixtures(std::uint64_t seed, std::size_t n_pretrain,
                             std::size_t n_stimuli, std::size_t n_interference);

// Writes sentences.json, interference.json, pretrain.json, vocab.txt,
// paraphrases.json and synonyms.tsv under dir.
void write_fixture_files(const FixtureCorpora& fx, const std::string& dir);

// Total bytes across the pretraining sentences (to size token budgets).
std::size_t pretrain_bytes(const FixtureCorpora& fx);

}  // namespace memlab::testsupport
