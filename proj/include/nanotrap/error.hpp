#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nanotrap {

enum class Errc {
  domain,
  bracket,
  evaluation,
  degenerate_fit,
  no_mode,
  state,
  selection_rule,
  validity,
  near_resonance,
  undefined_point,
  no_trap,
  saddle,
  non_unique_steady_state,
  stiffness,
  config,
};

std::string_view to_string(Errc code) noexcept;

// Every failure raised by the library carries one of the codes above; the
// message names the operation (and key, for configuration problems).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::domain: return "domain error";
    case Errc::bracket: return "bracket error";
    case Errc::evaluation: return "evaluation error";
    case Errc::degenerate_fit: return "degenerate fit";
    case Errc::no_mode: return "no guided mode";
    case Errc::state: return "state error";
    case Errc::selection_rule: return "selection-rule error";
    case Errc::validity: return "validity error";
    case Errc::near_resonance: return "near-resonance error";
    case Errc::undefined_point: return "undefined point";
    case Errc::no_trap: return "no trap";
    case Errc::saddle: return "saddle point";
    case Errc::non_unique_steady_state: return "non-unique steady state";
    case Errc::stiffness: return "stiffness error";
    case Errc::config: return "config error";
  }
  return "error";
}

}  // namespace nanotrap
