#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace steinlab {

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::vector<std::string> details;  // one line per check, with margins
};

/// stein_identity, mehler, tikhonov_path, bootstrap_exhaustive, fourier_ksd_mc, eigen_decay.
const std::vector<std::string>& oracle_suite_names();

SuiteResult run_oracle_suite(const std::string& name, std::uint64_t seed = 0);

/// Empty selector runs every suite; unknown names throw std::invalid_argument.
std::vector<SuiteResult> run_oracle_suites(const std::string& selector, std::uint64_t seed = 0);

}  // namespace steinlab
