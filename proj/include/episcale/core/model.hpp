#pragma once

#include <cmath>
#include <stdexcept>
#include <variant>

#include "episcale/kernels/interaction.hpp"

namespace episcale {

struct MeanFieldRegime {
  InteractionKernel kernel = InteractionKernel::constant(1.0);
};

struct LocalRegime {
  double beta = 0.25;
  /// d in N^(beta / d); the plane gives 2. Exposed for sensitivity runs.
  double exponent_divisor = 2.0;
};

using Regime = std::variant<MeanFieldRegime, LocalRegime>;

/// Recovery rate p, contact scale q, horizon T and interaction regime.
/// p = q = 0 is accepted: it freezes the chain, which the sampling-error
/// experiments rely on.
struct ModelParams {
  double p = 1.0;
  double q = 1.0;
  double horizon = 1.0;
  Regime regime = MeanFieldRegime{};

  bool is_local() const noexcept { return std::holds_alternative<LocalRegime>(regime); }

  void validate() const {
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("p must be finite and >= 0");
    if (!(q >= 0.0) || !std::isfinite(q)) throw std::invalid_argument("q must be finite and >= 0");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
      throw std::invalid_argument("horizon must be finite and > 0");
    if (const auto* local = std::get_if<LocalRegime>(&regime)) {
      if (!(local->beta > 0.0 && local->beta < 1.0 / 3.0))
        throw std::invalid_argument("beta must lie in (0, 1/3)");
      if (!(local->exponent_divisor > 0.0))
        throw std::invalid_argument("exponent divisor must be > 0");
    }
  }
};

}  // namespace episcale
