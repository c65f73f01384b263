#include "mpsrg/error.hpp"

namespace mpsrg {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonSquareBond: return "NonSquareBond";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::NotNormal: return "NotNormal";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::SizeOverflow: return "SizeOverflow";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InjectivityImpossible: return "InjectivityImpossible";
    case ErrorCode::RankCollapse: return "RankCollapse";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotDivisible: return "NotDivisible";
    case ErrorCode::UnsupportedScheme: return "UnsupportedScheme";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::BranchOverlap: return "BranchOverlap";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::AncillaNotZero: return "AncillaNotZero";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace mpsrg
