#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sis::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;

// Entry point shared by the executable and the tests. Output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sis::cli
