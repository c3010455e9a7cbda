#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tcal::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit status: 0 ok, 1 input error, 2 semantic error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tcal::cli
