#include "osc/error.hpp"

namespace osc {

const char *to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::invalid_flavor: return "invalid-flavor";
  case ErrorKind::missing_truncation: return "missing-truncation";
  case ErrorKind::smoothness: return "smoothness";
  case ErrorKind::invalid_mesh: return "invalid-mesh";
  case ErrorKind::capability: return "capability";
  case ErrorKind::invalid_smoothness: return "invalid-smoothness";
  case ErrorKind::degenerate_space: return "degenerate-space";
  case ErrorKind::conditioning: return "conditioning";
  case ErrorKind::band: return "band";
  case ErrorKind::profile: return "profile";
  case ErrorKind::accuracy: return "accuracy";
  case ErrorKind::hypothesis_violation: return "hypothesis-violation";
  case ErrorKind::span: return "span";
  case ErrorKind::config: return "config";
  case ErrorKind::invalid_argument: return "invalid-argument";
  }
  return "unknown";
}

} // namespace osc
