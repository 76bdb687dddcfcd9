#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "memlab/rng.hpp"
#include "memlab/stimuli.hpp"
#include "support/fixtures.hpp"

using namespace memlab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("memlab_stimuli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) {
    const auto p = path / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p.string();
  }
};

std::vector<std::string> words_of(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::multiset<char> char_multiset(const std::string& text) {
  std::multiset<char> out;
  for (char c : text) {
    if (c != ' ') out.insert(c);
  }
  return out;
}

}  // namespace

TEST_SUITE("stimuli") {

TEST_CASE("load_sentences parses an array of strings in order") {
  TempDir dir;
  const auto path = dir.file("two.json", R"(["a","b"])");
  const auto corpus = stimuli::load_sentences(path);
  CHECK(corpus.size() == 2);
  CHECK(corpus.items[0].text == "a");
  CHECK(corpus.items[1].text == "b");
  CHECK(corpus.items[0].id != corpus.items[1].id);
  CHECK_FALSE(corpus.checksum.empty());
}

TEST_CASE("load_sentences retains duplicates and counts them") {
  TempDir dir;
  const auto path = dir.file("dup.json", R"(["same","same","other"])");
  const auto corpus = stimuli::load_sentences(path);
  CHECK(corpus.size() == 3);
  CHECK(corpus.duplicate_count == 1);
}

TEST_CASE("load_sentences reload gives an identical checksum") {
  TempDir dir;
  const auto path = dir.file("c.json", R"(["x","y","z"])");
  const auto first = stimuli::load_sentences(path).checksum;
  CHECK(stimuli::load_sentences(path).checksum == first);
}

TEST_CASE("load_sentences error paths") {
  TempDir dir;
  CHECK_THROWS_WITH_AS(stimuli::load_sentences(dir.file("bad.json", "[\"a\",")),
                       doctest::Contains("parse error"), std::runtime_error);
  CHECK_THROWS(stimuli::load_sentences(dir.file("empty.json", "[]")));
  CHECK_THROWS(stimuli::load_sentences(dir.file("notarray.json", R"({"a":1})")));
}

TEST_CASE("sample_disjoint draws disjoint study and foil sets") {
  TempDir dir;
  std::string content = "[";
  for (int i = 0; i < 50; ++i) {
    content += (i ? "," : "") + std::string("\"sentence ") + std::to_string(i) + "\"";
  }
  content += "]";
  const auto corpus = stimuli::load_sentences(dir.file("pool.json", content));

  auto [study, foils] = stimuli::sample_disjoint(corpus, 20, 20, 5);
  CHECK(study.items.size() == 20);
  CHECK(foils.size() == 20);
  std::set<std::string> all;
  for (const auto& s : study.items) all.insert(s.text);
  for (const auto& f : foils) all.insert(f.text);
  CHECK(all.size() == 40);  // fully distinct

  // deterministic per seed, different across seeds
  auto [study2, foils2] = stimuli::sample_disjoint(corpus, 20, 20, 5);
  CHECK(study2.items.size() == study.items.size());
  for (std::size_t i = 0; i < study.items.size(); ++i) {
    CHECK(study2.items[i].text == study.items[i].text);
  }
  auto [study3, foils3] = stimuli::sample_disjoint(corpus, 20, 20, 6);
  bool any_difference = false;
  for (std::size_t i = 0; i < study.items.size(); ++i) {
    if (study3.items[i].text != study.items[i].text) any_difference = true;
  }
  CHECK(any_difference);

  // study set can exhaust the corpus
  auto [all_study, none] = stimuli::sample_disjoint(corpus, corpus.size(), 0, 9);
  CHECK(all_study.items.size() == static_cast<std::size_t>(corpus.size()));
  std::set<std::string> texts;
  for (const auto& s : all_study.items) texts.insert(s.text);
  CHECK(texts.size() == static_cast<std::size_t>(corpus.size()));

  CHECK_THROWS(stimuli::sample_disjoint(corpus, 40, 20, 1));
}

TEST_CASE("gen_random_words draws k space-joined words") {
  const std::vector<std::string> vocab = {"alpha", "beta", "gamma"};
  const auto item = stimuli::gen_random_words(vocab, 25, 11);
  CHECK(item.kind == stimuli::StimulusKind::random_words);
  const auto words = words_of(item.text);
  CHECK(words.size() == 25);
  for (const auto& w : words) {
    CHECK(std::find(vocab.begin(), vocab.end(), w) != vocab.end());
  }

  const auto single = stimuli::gen_random_words({"x"}, 1, 3);
  CHECK(single.text == "x");
  CHECK_THROWS(stimuli::gen_random_words({}, 5, 3));
}

TEST_CASE("gen_random_words unigram distribution is uniform (chi-squared)") {
  const int vocab_size = 50;
  std::vector<std::string> vocab;
  for (int i = 0; i < vocab_size; ++i) vocab.push_back("w" + std::to_string(i));

  std::map<std::string, std::int64_t> counts;
  const int draws_per_item = 25;
  const int items = 4000;  // 100k draws
  for (int i = 0; i < items; ++i) {
    const auto item = stimuli::gen_random_words(vocab, draws_per_item, 1000 + i);
    for (const auto& w : words_of(item.text)) counts[w] += 1;
  }
  const double total = static_cast<double>(draws_per_item) * items;
  const double expected = total / vocab_size;
  double chi2 = 0.0;
  for (const auto& w : vocab) {
    const double diff = static_cast<double>(counts[w]) - expected;
    chi2 += diff * diff / expected;
  }
  // dof = 49, p > 0.01 <=> chi2 below the 0.99 quantile 74.919
  CHECK(chi2 < 74.919);
}

TEST_CASE("scramble preserves the character multiset and word count") {
  stimuli::StimulusItem one{"id1", "q", stimuli::StimulusKind::normal_sentence};
  CHECK(stimuli::scramble_sentence(one, 4).text == "q");

  Rng rng(55);
  const auto fx = testsupport::make_fixtures(3, 0, 1000, 0);
  for (std::size_t i = 0; i < fx.stimuli.size(); ++i) {
    stimuli::StimulusItem item{"s" + std::to_string(i), fx.stimuli[i],
                               stimuli::StimulusKind::normal_sentence};
    const auto scrambled = stimuli::scramble_sentence(item, rng.next_u64());
    CHECK(scrambled.kind == stimuli::StimulusKind::random_string);
    CHECK(words_of(scrambled.text).size() == words_of(item.text).size());
    CHECK(char_multiset(scrambled.text) == char_multiset(item.text));
  }
}

TEST_CASE("substitute_synonym replaces exactly one word") {
  stimuli::SynonymLexicon lexicon;
  lexicon.entries["obligation"] = {"duty"};

  stimuli::StimulusItem sent{"s1", "no obligation to give",
                             stimuli::StimulusKind::normal_sentence};
  const auto result = stimuli::substitute_synonym(sent, lexicon, 8);
  REQUIRE(result.has_value());
  CHECK(result->text == "no duty to give");
  CHECK(result->kind == stimuli::StimulusKind::synonym_substitute);

  stimuli::StimulusItem miss{"s2", "nothing matches here",
                             stimuli::StimulusKind::normal_sentence};
  CHECK_FALSE(stimuli::substitute_synonym(miss, lexicon, 8).has_value());
}

TEST_CASE("substitute_synonym keeps the case pattern and punctuation") {
  stimuli::SynonymLexicon lexicon;
  lexicon.entries["big"] = {"large"};
  stimuli::StimulusItem sent{"s1", "Big dogs, big hearts.",
                             stimuli::StimulusKind::normal_sentence};
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto out = stimuli::substitute_synonym(sent, lexicon, seed);
    REQUIRE(out.has_value());
    const bool first = out->text == "Large dogs, big hearts.";
    const bool second = out->text == "Big dogs, large hearts.";
    CHECK((first || second));
  }
}

TEST_CASE("substituted sentences differ in exactly one word (500 pairs)") {
  const auto fx = testsupport::make_fixtures(9, 0, 2000, 0);
  stimuli::SynonymLexicon lexicon;
  {
    std::istringstream in(fx.synonyms_tsv);
    std::string line;
    while (std::getline(in, line)) {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) continue;
      lexicon.entries[line.substr(0, tab)] = {line.substr(tab + 1)};
    }
  }
  int made = 0;
  for (std::size_t i = 0; i < fx.stimuli.size() && made < 500; ++i) {
    stimuli::StimulusItem item{"s" + std::to_string(i), fx.stimuli[i],
                               stimuli::StimulusKind::normal_sentence};
    const auto out = stimuli::substitute_synonym(item, lexicon, 100 + i);
    if (!out) continue;
    ++made;
    const auto before = words_of(item.text);
    const auto after = words_of(out->text);
    REQUIRE(before.size() == after.size());
    int diffs = 0;
    for (std::size_t w = 0; w < before.size(); ++w) {
      if (before[w] != after[w]) ++diffs;
    }
    CHECK(diffs == 1);
  }
  CHECK(made == 500);
}

TEST_CASE("build_trials honors each experiment's design") {
  const auto fx = testsupport::make_fixtures(13, 0, 400, 0);
  TempDir dir;
  std::string sentences_json = "[";
  for (std::size_t i = 0; i < fx.stimuli.size(); ++i) {
    sentences_json += (i ? "," : "") + nlohmann::json(fx.stimuli[i]).dump();
  }
  sentences_json += "]";
  const auto corpus = stimuli::load_sentences(dir.file("s.json", sentences_json));

  nlohmann::json para = nlohmann::json::array();
  for (const auto& [a, b] : fx.paraphrases) para.push_back({a, b});
  const auto paraphrases =
      stimuli::load_paraphrases(dir.file("p.json", para.dump()));
  const auto lexicon = stimuli::load_synonyms(dir.file("syn.tsv", fx.synonyms_tsv));

  stimuli::FoilResources res;
  res.sentences = &corpus;
  res.paraphrases = &paraphrases;
  res.lexicon = &lexicon;
  res.vocab_words = &fx.vocab;

  SUBCASE("experiment 1: both kinds normal, all texts distinct") {
    const auto build = stimuli::build_trials(1, res, 100, 21);
    CHECK(build.trials.size() == 100);
    std::set<std::string> texts;
    for (const auto& t : build.trials) {
      CHECK(t.study.kind == stimuli::StimulusKind::normal_sentence);
      CHECK(t.foil.kind == stimuli::StimulusKind::normal_sentence);
      texts.insert(t.study.text);
      texts.insert(t.foil.text);
    }
    CHECK(texts.size() == 200);
  }

  SUBCASE("experiment 2: foil is the paraphrase of its own study item") {
    const auto build = stimuli::build_trials(2, res, 50, 22);
    CHECK(build.trials.size() == 50);
    std::map<std::string, std::string> para_of(fx.paraphrases.begin(),
                                               fx.paraphrases.end());
    for (const auto& t : build.trials) {
      CHECK(t.foil.kind == stimuli::StimulusKind::paraphrase);
      CHECK(para_of.at(t.study.text) == t.foil.text);
    }
  }

  SUBCASE("experiment 3: paired synonym foils, drops counted") {
    const auto build = stimuli::build_trials(3, res, 50, 23);
    CHECK(build.trials.size() == 50);
    for (const auto& t : build.trials) {
      CHECK(t.foil.kind == stimuli::StimulusKind::synonym_substitute);
      CHECK(words_of(t.study.text).size() == words_of(t.foil.text).size());
    }
  }

  SUBCASE("experiment 4: random words on both sides") {
    const auto build = stimuli::build_trials(4, res, 40, 24);
    CHECK(build.trials.size() == 40);
    for (const auto& t : build.trials) {
      CHECK(t.study.kind == stimuli::StimulusKind::random_words);
      CHECK(t.foil.kind == stimuli::StimulusKind::random_words);
      CHECK(words_of(t.study.text).size() == 25);
      CHECK(words_of(t.foil.text).size() == 25);
    }
  }

  SUBCASE("experiment 5: random-word study vs normal-sentence foil") {
    const auto build = stimuli::build_trials(5, res, 40, 25);
    CHECK(build.trials.size() == 40);
    for (const auto& t : build.trials) {
      CHECK(t.study.kind == stimuli::StimulusKind::random_words);
      CHECK(t.foil.kind == stimuli::StimulusKind::normal_sentence);
    }
  }

  SUBCASE("experiment 6: foil is the source sentence of the scramble") {
    const auto build = stimuli::build_trials(6, res, 40, 26);
    CHECK(build.trials.size() == 40);
    for (const auto& t : build.trials) {
      CHECK(t.study.kind == stimuli::StimulusKind::random_string);
      CHECK(t.foil.kind == stimuli::StimulusKind::normal_sentence);
      CHECK(char_multiset(t.study.text) == char_multiset(t.foil.text));
      CHECK(t.study.text != t.foil.text);
    }
  }

  SUBCASE("missing resources raise configuration errors naming the experiment") {
    stimuli::FoilResources bare;
    bare.sentences = &corpus;
    CHECK_THROWS_WITH_AS(stimuli::build_trials(2, bare, 10, 1),
                         doctest::Contains("experiment 2"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(stimuli::build_trials(4, bare, 10, 1),
                         doctest::Contains("experiment 4"), std::invalid_argument);
    stimuli::FoilResources no_sentences;
    no_sentences.vocab_words = &fx.vocab;
    CHECK_THROWS_WITH_AS(stimuli::build_trials(5, no_sentences, 10, 1),
                         doctest::Contains("experiment 5"), std::invalid_argument);
  }

  SUBCASE("generation is byte-identical under the same seed") {
    for (int e : {1, 2, 3, 4, 5, 6}) {
      const auto a = stimuli::build_trials(e, res, 30, 31);
      const auto b = stimuli::build_trials(e, res, 30, 31);
      REQUIRE(a.trials.size() == b.trials.size());
      for (std::size_t i = 0; i < a.trials.size(); ++i) {
        CHECK(a.trials[i].study.text == b.trials[i].study.text);
        CHECK(a.trials[i].foil.text == b.trials[i].foil.text);
      }
    }
  }
}

TEST_CASE("lexicon loader rejects self-mappings") {
  TempDir dir;
  CHECK_THROWS(stimuli::load_synonyms(dir.file("bad.tsv", "word\tword\n")));
  const auto lex = stimuli::load_synonyms(dir.file("ok.tsv", "big\tlarge,huge\n"));
  CHECK(lex.entries.at("big").size() == 2);
}

TEST_CASE("paraphrase loader rejects identical pairs") {
  TempDir dir;
  CHECK_THROWS(stimuli::load_paraphrases(dir.file("bad.json", R"([["a","a"]])")));
  CHECK(stimuli::load_paraphrases(dir.file("ok.json", R"([["a","b"]])")).pairs.size() == 1);
}

}  // TEST_SUITE
