#include "support/fixtures.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "memlab/rng.hpp"

namespace memlab::testsupport {

namespace {

using memlab::Rng;

const std::vector<std::string> kDeterminers = {"the", "a", "every", "this", "that",
                                               "each", "some"};

const std::vector<std::string> kAdjectives = {
    "big",    "small",  "quick",  "quiet",  "old",     "young",  "happy",
    "sad",    "bright", "dark",   "cold",   "warm",    "strong", "gentle",
    "clever", "plain",  "narrow", "wide",   "heavy",   "light",  "early",
    "late",   "clean",  "dusty",  "golden", "silver",  "wooden", "stone",
    "green",  "blue",   "red",    "yellow", "curious", "tired",  "patient",
    "brave",  "calm",   "busy",   "lonely", "famous"};

const std::vector<std::string> kNouns = {
    "farmer",   "sailor",  "teacher",  "painter", "doctor",  "baker",   "miller",
    "hunter",   "weaver",  "merchant", "soldier", "singer",  "writer",  "gardener",
    "child",    "woman",   "man",      "friend",  "stranger", "neighbor",
    "dog",      "cat",     "horse",    "bird",    "fox",      "rabbit",  "sheep",
    "basket",   "lantern", "letter",   "ladder",  "hammer",   "kettle",  "mirror",
    "carpet",   "candle",  "bottle",   "bucket",  "ribbon",   "saddle",  "wagon",
    "bridge",   "tower",   "cottage",  "barrel",  "anchor",   "compass", "engine",
    "violin",   "trumpet", "drum",     "apple",   "carrot",   "loaf",    "cheese",
    "coin",     "map",     "rope",     "sail",    "wheel",    "stone"};

const std::vector<std::string> kPlaces = {
    "garden",  "harbor",  "valley",  "market",  "kitchen", "library",
    "meadow",  "station", "village", "forest",  "orchard", "courtyard",
    "cellar",  "attic",   "river",   "shore",   "field",   "workshop",
    "square",  "mill"};

const std::vector<std::string> kVerbsT = {
    "carried", "watched",  "painted", "repaired", "borrowed", "counted",
    "cleaned", "followed", "found",   "lifted",   "measured", "mended",
    "moved",   "opened",   "packed",  "polished", "pulled",   "pushed",
    "sold",    "sharpened", "stacked", "studied",  "traded",   "wrapped",
    "weighed", "brought",  "dropped", "gathered", "guarded",  "hid"};

const std::vector<std::string> kVerbsI = {
    "slept",    "waited",   "whistled", "wandered", "rested",  "arrived",
    "stumbled", "hurried",  "paused",   "listened", "smiled",  "laughed",
    "nodded",   "shivered", "dozed",    "lingered", "vanished", "returned"};

const std::vector<std::string> kAdverbs = {
    "slowly",   "quickly",  "quietly", "carefully", "suddenly", "gladly",
    "patiently", "secretly", "proudly", "calmly",    "brightly", "eagerly"};

const std::vector<std::string> kPreps = {"in",     "near",   "behind", "beside",
                                         "under",  "above",  "along",  "outside",
                                         "inside", "beyond"};

const std::vector<std::string> kOpeners = {
    "yesterday", "at dawn", "after lunch", "before sunset", "last winter",
    "that evening", "in the morning", "around noon"};

// synonym pairs drawn from the adjective/verb lists above
const std::vector<std::pair<std::string, std::string>> kSynonymPairs = {
    {"big", "large"},      {"small", "tiny"},     {"quick", "fast"},
    {"quiet", "silent"},   {"old", "ancient"},    {"happy", "glad"},
    {"sad", "gloomy"},     {"bright", "shiny"},   {"dark", "dim"},
    {"cold", "chilly"},    {"warm", "mild"},      {"strong", "sturdy"},
    {"clever", "smart"},   {"tired", "weary"},    {"brave", "bold"},
    {"calm", "peaceful"},  {"busy", "occupied"},  {"famous", "renowned"},
    {"carried", "hauled"}, {"watched", "observed"}, {"repaired", "fixed"},
    {"found", "discovered"}, {"moved", "shifted"},  {"hid", "concealed"},
};

const std::string& pick(const std::vector<std::string>& pool, Rng& rng) {
  return pool[rng.below(pool.size())];
}

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 32);
  return s;
}

std::string generate_sentence(Rng& rng) {
  const int form = static_cast<int>(rng.below(6));
  std::string s;
  switch (form) {
    case 0:
      s = capitalize(pick(kDeterminers, rng)) + " " + pick(kAdjectives, rng) + " " +
          pick(kNouns, rng) + " " + pick(kVerbsT, rng) + " the " + pick(kNouns, rng) +
          " " + pick(kPreps, rng) + " the " + pick(kPlaces, rng) + ".";
      break;
    case 1:
      s = capitalize(pick(kOpeners, rng)) + " the " + pick(kNouns, rng) + " " +
          pick(kVerbsT, rng) + " a " + pick(kAdjectives, rng) + " " +
          pick(kNouns, rng) + ".";
      break;
    case 2:
      s = "The " + pick(kNouns, rng) + " " + pick(kPreps, rng) + " the " +
          pick(kPlaces, rng) + " " + pick(kVerbsI, rng) + " " + pick(kAdverbs, rng) +
          ".";
      break;
    case 3:
      s = capitalize(pick(kDeterminers, rng)) + " " + pick(kNouns, rng) + " " +
          pick(kVerbsI, rng) + " " + pick(kAdverbs, rng) + " " + pick(kPreps, rng) +
          " the " + pick(kAdjectives, rng) + " " + pick(kPlaces, rng) + ".";
      break;
    case 4:
      s = "The " + pick(kAdjectives, rng) + " " + pick(kNouns, rng) + " " +
          pick(kAdverbs, rng) + " " + pick(kVerbsT, rng) + " the " +
          pick(kNouns, rng) + ".";
      break;
    default:
      s = capitalize(pick(kOpeners, rng)) + " a " + pick(kAdjectives, rng) + " " +
          pick(kNouns, rng) + " " + pick(kVerbsI, rng) + " " + pick(kPreps, rng) +
          " the " + pick(kPlaces, rng) + ".";
      break;
  }
  return s;
}

std::string make_pseudo_word(Rng& rng) {
  static const std::vector<std::string> onsets = {"b",  "d",  "f",  "g",  "k",  "l",
                                                  "m",  "n",  "p",  "r",  "s",  "t",
                                                  "v",  "z",  "br", "dr", "fl", "gr",
                                                  "kl", "pl", "sn", "st", "tr", "vr"};
  static const std::vector<std::string> vowels = {"a", "e", "i", "o", "u", "ai",
                                                  "ou", "ea"};
  static const std::vector<std::string> codas = {"",  "",  "n", "r", "s", "t",
                                                 "l", "m", "sk", "nd"};
  const int syllables = 2 + static_cast<int>(rng.below(2));
  std::string w;
  for (int i = 0; i < syllables; ++i) {
    w += onsets[rng.below(onsets.size())];
    w += vowels[rng.below(vowels.size())];
  }
  w += codas[rng.below(codas.size())];
  return w;
}

// Moves a trailing "PREP the PLACE." phrase to the front, or prepends a
// filler; then applies one synonym swap when possible. Always differs from
// the source sentence.
std::string paraphrase_of(const std::string& sentence, Rng& rng) {
  std::string para = sentence;

  for (const auto& [a, b] : kSynonymPairs) {
    const std::string target = " " + a + " ";
    const auto at = para.find(target);
    if (at != std::string::npos) {
      para = para.substr(0, at) + " " + b + " " + para.substr(at + target.size());
      break;
    }
  }

  // split off a trailing prepositional phrase when one exists
  for (const auto& prep : kPreps) {
    const std::string marker = " " + prep + " the ";
    const auto at = para.rfind(marker);
    if (at != std::string::npos && para.back() == '.') {
      const std::string head = para.substr(0, at);
      std::string phrase = para.substr(at + 1, para.size() - at - 2);  // drop '.'
      std::string moved = capitalize(phrase) + ", " + head;
      // lower-case the old sentence head unless it starts a proper template
      if (moved.size() > phrase.size() + 2) {
        char& c = moved[phrase.size() + 2];
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
      }
      moved += ".";
      para = moved;
      break;
    }
  }

  if (para == sentence) {
    static const std::vector<std::string> fillers = {"In fact, ", "Reportedly, ",
                                                     "As it happened, "};
    std::string tail = sentence;
    if (!tail.empty() && tail[0] >= 'A' && tail[0] <= 'Z') {
      tail[0] = static_cast<char>(tail[0] + 32);
    }
    para = fillers[rng.below(fillers.size())] + tail;
  }
  return para;
}

}  // namespace

FixtureCorpora make_fixtures(std::uint64_t seed, std::size_t n_pretrain,
                             std::size_t n_stimuli, std::size_t n_interference) {
  FixtureCorpora fx;
  Rng rng(derive_seed(seed, "fixtures"));

  const std::size_t total = n_pretrain + n_stimuli + n_interference;
  std::unordered_set<std::string> seen;
  std::vector<std::string> sentences;
  sentences.reserve(total);
  std::size_t guard = 0;
  while (sentences.size() < total) {
    auto s = generate_sentence(rng);
    if (seen.insert(s).second) {
      sentences.push_back(std::move(s));
    } else if (++guard > total * 200) {
      throw std::runtime_error("fixture grammar exhausted while deduplicating");
    }
  }
  fx.pretrain.assign(sentences.begin(), sentences.begin() + n_pretrain);
  fx.stimuli.assign(sentences.begin() + n_pretrain,
                    sentences.begin() + n_pretrain + n_stimuli);
  fx.interference.assign(sentences.begin() + n_pretrain + n_stimuli, sentences.end());

  // vocabulary: every grammar word plus pseudo-words the model never saw
  std::unordered_set<std::string> vocab_set;
  for (const auto* pool : {&kDeterminers, &kAdjectives, &kNouns, &kPlaces, &kVerbsT,
                           &kVerbsI, &kAdverbs, &kPreps}) {
    for (const auto& w : *pool) vocab_set.insert(w);
  }
  Rng pseudo_rng(derive_seed(seed, "pseudo-words"));
  while (vocab_set.size() < 2200) {
    vocab_set.insert(make_pseudo_word(pseudo_rng));
  }
  fx.vocab.assign(vocab_set.begin(), vocab_set.end());
  std::sort(fx.vocab.begin(), fx.vocab.end());

  Rng para_rng(derive_seed(seed, "paraphrases"));
  for (const auto& s : fx.stimuli) {
    fx.paraphrases.emplace_back(s, paraphrase_of(s, para_rng));
  }

  std::string tsv;
  for (const auto& [a, b] : kSynonymPairs) {
    tsv += a + "\t" + b + "\n";
    tsv += b + "\t" + a + "\n";
  }
  fx.synonyms_tsv = tsv;
  return fx;
}

std::size_t pretrain_bytes(const FixtureCorpora& fx) {
  std::size_t n = 0;
  for (const auto& s : fx.pretrain) n += s.size() + 2;  // + BOS/EOS
  return n;
}

void write_fixture_files(const FixtureCorpora& fx, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto dump = [&](const std::string& name, const nlohmann::json& j) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write fixture " + name);
    out << j.dump(1) << "\n";
  };
  dump("pretrain.json", nlohmann::json(fx.pretrain));
  dump("sentences.json", nlohmann::json(fx.stimuli));
  dump("interference.json", nlohmann::json(fx.interference));

  nlohmann::json para = nlohmann::json::array();
  for (const auto& [a, b] : fx.paraphrases) para.push_back({a, b});
  dump("paraphrases.json", para);

  {
    std::ofstream out(fs::path(dir) / "vocab.txt", std::ios::binary);
    for (const auto& w : fx.vocab) out << w << "\n";
  }
  {
    std::ofstream out(fs::path(dir) / "synonyms.tsv", std::ios::binary);
    out << fx.synonyms_tsv;
  }
}

}  // namespace memlab::testsupport
