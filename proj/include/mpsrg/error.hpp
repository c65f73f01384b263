#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mpsrg {

enum class ErrorCode {
  InvalidArgument,
  NonSquareBond,
  NumericalFailure,
  NotNormal,
  IllConditioned,
  SizeOverflow,
  ShapeMismatch,
  InjectivityImpossible,
  RankCollapse,
  DimensionMismatch,
  NotDivisible,
  UnsupportedScheme,
  NotPositive,
  BranchOverlap,
  IndexOutOfRange,
  TooLarge,
  AncillaNotZero,
  ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; the code carries the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Failures of the numerics rather than of the inputs.
  bool is_numerical() const noexcept {
    return code_ == ErrorCode::NumericalFailure || code_ == ErrorCode::IllConditioned ||
           code_ == ErrorCode::RankCollapse;
  }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace mpsrg
