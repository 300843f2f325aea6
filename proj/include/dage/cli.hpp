#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace dage {

// Exit codes: 0 ok, 1 usage, 2 data or format, 3 failed self-check.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Flat `key = value` text; '#' starts a comment. Duplicate keys are errors.
std::map<std::string, std::string> parse_config_text(const std::string& text);  // UsageError
std::map<std::string, std::string> read_config_file(const std::string& path);    // IoError, UsageError

// File names inside a data directory.
inline constexpr const char* kTrainGraphFile = "kg-train.tsv";
inline constexpr const char* kFullGraphFile = "kg-full.tsv";

}  // namespace dage
