#ifndef GSO_CLI_H_
#define GSO_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace gso {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

// Runs one command line (args exclude the program name). Output goes to
// `out`, diagnostics to `err`.
int RunCli(const std::vector<std::string> &args, std::ostream &out,
           std::ostream &err);

}  // namespace gso

#endif  // GSO_CLI_H_
