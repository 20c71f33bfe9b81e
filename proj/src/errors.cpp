#include "gsindy/error.hpp"

namespace gsindy {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument:
      return "invalid-argument";
    case ErrorKind::InvalidState:
      return "invalid-state";
    case ErrorKind::NonFiniteInput:
      return "non-finite-input";
    case ErrorKind::IntegrationFailure:
      return "integration-failure";
    case ErrorKind::IllConditioned:
      return "ill-conditioned";
    case ErrorKind::EmptyModel:
      return "empty-model";
    case ErrorKind::Infeasible:
      return "infeasible";
    case ErrorKind::DuplicateTerm:
      return "duplicate-term";
    case ErrorKind::DegenerateTrack:
      return "degenerate-track";
    case ErrorKind::Parse:
      return "parse-error";
    case ErrorKind::Io:
      return "io-error";
  }
  return "error";
}

}  // namespace gsindy
