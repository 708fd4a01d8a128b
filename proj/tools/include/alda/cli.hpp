#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace alda::cli {

enum ExitCode { kOk = 0, kRuntimeError = 1, kCompileError = 2, kUsageError = 3 };

struct RunConfig {
  std::string subcommand;  // run, check, kernel, bench
  std::string program_path;
  std::vector<std::pair<std::string, std::string>> facts;  // global name, fact file
  bool trace_maintenance = false;
  std::optional<std::uint64_t> seed;
  bool json = false;
  bool flagged_only = true;  // maintain only at flagged update sites

  // bench
  std::string suite;
  std::size_t nodes = 500;
  std::string graph = "cycle";
  double density = 0.01;
  std::size_t users = 500;
  std::size_t roles = 50;
  std::size_t updates = 50;
  int reps = 1;
};

/// Runs one configured command, writing program output and reports to `out`
/// and diagnostics to `err`.
int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses the command line and runs it.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace alda::cli
