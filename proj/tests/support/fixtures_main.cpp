// Writes the synthetic fixture corpora used by the smoke and acceptance runs.
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include "support/fixtures.hpp"

int main(int argc, char** argv) {
  std::string out_dir = "fixtures";
  std::uint64_t seed = 7;
  std::size_t n_pretrain = 40000, n_stimuli = 6000, n_interference = 20000;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto next = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::cerr << "missing value for " << arg << "\n";
        std::exit(1);
      }
      return argv[++i];
    };
    if (arg == "--out") out_dir = next();
    else if (arg == "--seed") seed = std::strtoull(next().c_str(), nullptr, 10);
    else if (arg == "--pretrain") n_pretrain = std::strtoull(next().c_str(), nullptr, 10);
    else if (arg == "--stimuli") n_stimuli = std::strtoull(next().c_str(), nullptr, 10);
    else if (arg == "--interference") n_interference = std::strtoull(next().c_str(), nullptr, 10);
    else {
      std::cerr << "usage: memlab_fixtures [--out DIR] [--seed S] [--pretrain N]"
                   " [--stimuli N] [--interference N]\n";
      return 1;
    }
  }
  const auto fx = memlab::testsupport::make_fixtures(seed, n_pretrain, n_stimuli,
                                                     n_interference);
  memlab::testsupport::write_fixture_files(fx, out_dir);
  std::cout << "fixtures written to " << out_dir << " (pretrain bytes ~"
            << memlab::testsupport::pretrain_bytes(fx) << ")\n";
  return 0;
}
