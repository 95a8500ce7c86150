#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mtd {

enum class Errc {
  ShapeMismatch,
  NonMarkovGenerator,
  DetailedBalanceViolation,
  NonPositiveMeasure,
  NotNormalized,
  ZeroDensity,
  DomainError,
  NotMeanZero,
  ReducibleChain,
  NegativeTime,
  BoundaryMassLoss,
  NonPositiveRate,
  BadSize,
  SizeOverflow,
  InfeasiblePath,
  NonPositiveDensity,
  RootFindFailure,
  DegenerateMap,
  XiDomainError,
  BadDimension,
  BadTimes,
  GeodesicQuality,
  NotProductForm,
  BadExponent,
  BadParameters,
  ConfigError,
};

inline std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonMarkovGenerator: return "NonMarkovGenerator";
    case Errc::DetailedBalanceViolation: return "DetailedBalanceViolation";
    case Errc::NonPositiveMeasure: return "NonPositiveMeasure";
    case Errc::NotNormalized: return "NotNormalized";
    case Errc::ZeroDensity: return "ZeroDensity";
    case Errc::DomainError: return "DomainError";
    case Errc::NotMeanZero: return "NotMeanZero";
    case Errc::ReducibleChain: return "ReducibleChain";
    case Errc::NegativeTime: return "NegativeTime";
    case Errc::BoundaryMassLoss: return "BoundaryMassLoss";
    case Errc::NonPositiveRate: return "NonPositiveRate";
    case Errc::BadSize: return "BadSize";
    case Errc::SizeOverflow: return "SizeOverflow";
    case Errc::InfeasiblePath: return "InfeasiblePath";
    case Errc::NonPositiveDensity: return "NonPositiveDensity";
    case Errc::RootFindFailure: return "RootFindFailure";
    case Errc::DegenerateMap: return "DegenerateMap";
    case Errc::XiDomainError: return "XiDomainError";
    case Errc::BadDimension: return "BadDimension";
    case Errc::BadTimes: return "BadTimes";
    case Errc::GeodesicQuality: return "GeodesicQuality";
    case Errc::NotProductForm: return "NotProductForm";
    case Errc::BadExponent: return "BadExponent";
    case Errc::BadParameters: return "BadParameters";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the `Errc` kinds.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace mtd
