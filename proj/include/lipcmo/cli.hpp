#pragma once

#include <iosfwd>

namespace lipcmo {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 2 validation error, 3 numeric or domain error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace lipcmo
