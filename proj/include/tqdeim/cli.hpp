#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tqdeim/tensor.hpp"

namespace tqdeim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumerical = 4;

// Runs one command line (args excludes the program name). Machine-readable
// summaries go to `out` as a single JSON line, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "2:9", "3,8,10", "2:4,8" -> sorted, deduplicated ranks.
std::vector<Index> parse_ranks(const std::string& spec);

} // namespace tqdeim::cli
