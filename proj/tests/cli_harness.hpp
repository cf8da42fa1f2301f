#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "mglab/cli.hpp"

namespace mglab::testing {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

inline CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mglab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Value of the first `field<TAB>value` row with the given field.
inline std::string report_field(const std::string& report, const std::string& field) {
  std::istringstream in(report);
  for (std::string line; std::getline(in, line);) {
    const auto tab = line.find('\t');
    if (tab != std::string::npos && line.compare(0, tab, field) == 0) return line.substr(tab + 1);
  }
  return {};
}

}  // namespace mglab::testing
