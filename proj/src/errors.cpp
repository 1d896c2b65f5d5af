#include "glmscale/errors.hpp"

namespace glmscale {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
      return "invalid_argument";
    case ErrorKind::Domain:
      return "domain";
    case ErrorKind::DegenerateCanonicalization:
      return "degenerate_canonicalization";
    case ErrorKind::SingularDesign:
      return "singular_design";
    case ErrorKind::CurvatureOverflow:
      return "curvature_overflow";
    case ErrorKind::NoRoot:
      return "no_root";
    case ErrorKind::NonConvergence:
      return "non_convergence";
    case ErrorKind::StalledLineSearch:
      return "stalled_linesearch";
    case ErrorKind::Parse:
      return "parse";
    case ErrorKind::MissingColumn:
      return "missing_column";
    case ErrorKind::InsufficientData:
      return "insufficient_data";
    case ErrorKind::Io:
      return "io";
    case ErrorKind::Config:
      return "config";
  }
  return "unknown";
}

}  // namespace glmscale
