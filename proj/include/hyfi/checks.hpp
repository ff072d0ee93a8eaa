#pragma once

// Randomized property suites behind `hyfi check`. Each suite draws its cases
// from a seeded stream and reports how many of them violated the property.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hyfi::checks {

struct SuiteResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  double worst = 0.0;  // largest error seen, in the suite's own units
  double seconds = 0.0;
  std::string note;

  bool passed() const { return failures == 0; }
};

/// Suite names accepted by run(), excluding the aggregate "all".
std::vector<std::string> suite_names();

/// Runs one suite, or every suite for "all". `trials` = 0 picks each suite's
/// default size. Throws std::invalid_argument for unknown names.
std::vector<SuiteResult> run(std::string_view name, std::size_t trials, std::uint64_t seed);

SuiteResult geometry(std::size_t trials, std::uint64_t seed);
SuiteResult interpolation(std::size_t trials, std::uint64_t seed);
SuiteResult compression(std::size_t trials, std::uint64_t seed);
SuiteResult gradient(std::size_t trials, std::uint64_t seed);
SuiteResult model(std::size_t trials, std::uint64_t seed);
SuiteResult retrieval(std::size_t trials, std::uint64_t seed);
SuiteResult augmentation(std::size_t trials, std::uint64_t seed);
SuiteResult optimizer(std::size_t trials, std::uint64_t seed);

}  // namespace hyfi::checks
