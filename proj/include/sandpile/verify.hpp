#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sandpile {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Invariant suite on tiny domains: group structure, relaxation, potentials,
// periodicity, the extended model, the chain and the codec. Each check
// catches its own exceptions and reports them as failures.
std::vector<CheckResult> verify_suite(std::uint64_t seed = 1);

}  // namespace sandpile
