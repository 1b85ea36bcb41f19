"""Map cavity-QED parameters onto the effective Raman rates."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import ConfigError
from .trajectory import CollapseSpec

VALIDITY_FACTOR = 10.0
EQUAL_RATE_RTOL = 1e-12


class AdiabaticValidityWarning(UserWarning):
    """Parameters sit outside the regime where the effective two-level model holds."""


@dataclass(frozen=True)
class PhysicalParams:
    """Couplings, Rabi frequencies, detunings and cavity decay in one angular-frequency unit."""

    g_r: float
    g_s: float
    zeta_r: float
    zeta_s: float
    delta_r: float
    delta_s: float
    kappa: float


def _raman_rate(zeta: float, g: float, delta: float, kappa: float) -> float:
    return abs(zeta * g / (2.0 * delta)) ** 2 / kappa


def derive_rates(p: PhysicalParams) -> CollapseSpec:
    """gamma01 = |zeta_s g_s / 2 Delta_s|^2 / kappa, gamma10 = |zeta_r g_r / 2 Delta_r|^2 / kappa.

    The result is ``scaled`` when the two rates agree to 1e-12 relative;
    both rates are then set to their mean so the equal-rate invariant is exact.
    """
    if not (p.kappa > 0 and math.isfinite(p.kappa)):
        raise ConfigError("kappa must be positive")
    if p.delta_r == 0 or p.delta_s == 0:
        raise ConfigError("detunings must be nonzero")

    for name, delta, g, zeta in (("r", p.delta_r, p.g_r, p.zeta_r), ("s", p.delta_s, p.g_s, p.zeta_s)):
        if abs(delta) < VALIDITY_FACTOR * max(abs(g), abs(zeta)):
            warnings.warn(
                f"|Delta_{name}| = {abs(delta):.3g} is not >> max(|g_{name}|, |zeta_{name}|); "
                "adiabatic elimination of the excited states is doubtful",
                AdiabaticValidityWarning,
                stacklevel=2,
            )

    gamma01 = _raman_rate(p.zeta_s, p.g_s, p.delta_s, p.kappa)
    gamma10 = _raman_rate(p.zeta_r, p.g_r, p.delta_r, p.kappa)
    if max(gamma01, gamma10) * VALIDITY_FACTOR > p.kappa:
        warnings.warn(
            f"Raman rates ({gamma01:.3g}, {gamma10:.3g}) are not << kappa = {p.kappa:.3g}; "
            "eliminating the cavity mode is doubtful",
            AdiabaticValidityWarning,
            stacklevel=2,
        )

    scale = max(gamma01, gamma10)
    equal = scale == 0 or abs(gamma01 - gamma10) <= EQUAL_RATE_RTOL * scale
    if equal:
        mean = 0.5 * (gamma01 + gamma10)
        return CollapseSpec(mean, mean, scaled=True)
    return CollapseSpec(gamma01, gamma10, scaled=False)
