#ifndef FARMSIM_CLI_HPP_
#define FARMSIM_CLI_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace farmsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitPartial = 2;  // unconverged or not-certified cells

// 64-bit FNV-1a, used for the config hash in every output row.
std::uint64_t Fnv1a(const std::string& text);

std::vector<int> ParseIntList(const std::string& text);
std::vector<std::string> ParseNameList(const std::string& text);

// Entry point shared by the binary and the tests.
int Main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int Main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace farmsim::cli

#endif  // FARMSIM_CLI_HPP_
