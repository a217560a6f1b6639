#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace ckn {

inline constexpr const char* kVersion = "0.1.0";

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AdmissibilityError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct OriginError : Error { using Error::Error; };
struct OriginOnBoundaryError : Error { using Error::Error; };
struct DegenerateFrameError : Error { using Error::Error; };
struct ConstructionError : Error { using Error::Error; };
struct RegimeError : Error { using Error::Error; };
struct PositivityError : Error { using Error::Error; };
struct SupportError : Error { using Error::Error; };
struct SolverResidualTooLarge : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct StencilOutOfRange : Error { using Error::Error; };
struct BlowupError : Error { using Error::Error; };
struct StiffnessError : Error { using Error::Error; };

inline double sq(double x) { return x * x; }

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace ckn
