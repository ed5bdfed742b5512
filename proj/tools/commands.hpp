#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace atombench::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitIo = 4;

// Runs one invocation; args exclude the program name. Progress goes to out,
// failures to err as a single line:
//   atombench: error {"code":"SchemaError","exit":3,"kind":"data","message":"..."}
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace atombench::cli
