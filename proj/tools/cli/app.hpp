#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace canard::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kNumerical = 3 };

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "CANARD_OUT_DIR";

/// Entry point; args excludes the program name.
/// Exit 0 on success, 2 on invalid input, 3 on a numerical failure (partial
/// output is kept and flagged in the manifest).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace canard::cli
