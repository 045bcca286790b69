#pragma once

// Command-line front end: wb <parse|eval|enumerate|integrate|transfer|bound|zsum> ...
//
// Reports go to `out` as one JSON envelope
//   {"tool": "wb", "version": ..., "command": ..., "config": {...}, "result": {...}}
// (or CSV for `transfer --format csv`); errors go to `err` as JSON.
// Exit codes: 0 success, 1 input error, 2 resource limit, 3 inconclusive.

#include <iosfwd>
#include <string>
#include <vector>

namespace wb {

inline constexpr const char* kVersion = "1.0.0";

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace wb
