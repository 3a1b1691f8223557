#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ckt::cli {

// Exit codes: 0 success, 2 validation error, 3 non-convergence.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SelfCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Fast invariant suite behind the selftest subcommand.
std::vector<SelfCheck> selftest_suite(std::uint64_t seed);

}  // namespace ckt::cli
