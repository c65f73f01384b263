#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mpsrg/fixed_point.hpp"
#include "mpsrg/tensor.hpp"

namespace mpsrg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

/// What an input file holds: a tensor, a branch decomposition or a chain. Generator
/// objects ({"generator": "aklt" | "aklt-spin1" | "ghz" | "g-family", "g" or "xi"}) yield a tensor.
struct Input {
  std::optional<SiteTensor> tensor;
  std::optional<CanonicalDecomposition> decomposition;
  std::optional<MpsChain> chain;
};

Input load_input(const std::string& path);

/// "2:12", "8:32:2" or "2,3,5".
std::vector<int> parse_int_list(const std::string& text);

/// Runs one command line (args exclude the program name); returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mpsrg::cli
