#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rxva::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "RXVA_OUT";

/// Entry point behind the rxva executable. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rxva::cli
