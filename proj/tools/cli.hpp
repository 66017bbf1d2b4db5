#pragma once

#include <iosfwd>

namespace ndc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one `ndc` invocation. Reports go to `out`, diagnostics and usage
/// text to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ndc::cli
