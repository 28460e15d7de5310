#pragma once

// Command-line front end: `run`, `check`, `demo`.

#include <iosfwd>
#include <string>
#include <vector>

namespace dsc::cli {

enum ExitCode : int {
  kPass = 0,
  kFail = 1,
  kConfigError = 2,
  kExistenceFailure = 3,
};

/// Seed used when a randomized run gets no --seed flag.
inline constexpr unsigned long long kDefaultSeed = 20040608ULL;

/// `args` excludes the program name. Summaries go to `out`, diagnostics to
/// `err`; all files land under the --out directory.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main_entry(int argc, char** argv);

}  // namespace dsc::cli
