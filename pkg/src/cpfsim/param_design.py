"""Coordination-set parameter design.

Picks the set half-widths (psi_max, rho_max) and the design speed v_coord by
maximizing the product psi_max * rho_max subject to the admissibility
inequalities that make the set invariant (turn-rate budget) and overtaking-
free (speed budget).  Deterministic grid search with local refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import Infeasible


@dataclass(frozen=True)
class SpeedLimits:
    """Actuation limits shared by all UAVs plus the path curvature bound."""

    v_min: float
    v_max: float
    omega_max: float
    kappa_bound: float

    def validate(self) -> None:
        if not (0.0 < self.v_min <= self.v_max):
            raise ValueError("need 0 < v_min <= v_max")
        if self.omega_max <= 0.0:
            raise ValueError("omega_max must be positive")
        if self.kappa_bound <= 0.0:
            raise ValueError("kappa_bound must be positive")


@dataclass(frozen=True)
class CoordParams:
    """Designed set parameters, control gains and margins.

    psi_max / rho_max bound the coordination set; rho_universe bounds the
    supervised universe.  v_coord is the design speed the in-set law may
    fall back to; alpha is the inward margin of the boundary inequalities;
    speed_margin separates the slow and fast along-path speed references.
    chi_* shape the speed-assignment function; sign_eps > 0 smooths the
    switching term (0 selects the pure sign, used by the invariant suites).
    """

    psi_max: float
    rho_max: float
    v_coord: float
    rho_universe: float
    v_min: float
    v_max: float
    omega_max: float
    kappa_bound: float
    alpha: float = 0.01
    speed_margin: float = 1.0
    k1: float = 1.0
    k2: float = 0.0
    k3: float = 1.0
    eps_switch: float = 0.05
    chi_blend: float = 0.05
    chi_delta1: float = 6.0
    chi_delta2: float = 6.0
    spacing: float = 0.0
    sign_eps: float = 1.0e-3

    @property
    def r0(self) -> float:
        return 1.0 / self.kappa_bound

    @property
    def v_min_ref(self) -> float:
        """Slow along-path speed reference v_min / (1 - kappa_bound*rho_max)."""
        return self.v_min / (1.0 - self.kappa_bound * self.rho_max)

    @property
    def v_fast_ref(self) -> float:
        """Fast along-path speed reference cos(psi_max)*v_coord/(1 + kappa_bound*rho_max)."""
        return math.cos(self.psi_max) * self.v_coord / (1.0 + self.kappa_bound * self.rho_max)

    @property
    def contraction(self) -> float:
        """Per-excursion contraction factor rho_max*k1/(psi_max*k2)."""
        return self.rho_max * self.k1 / (self.psi_max * self.k2)

    def limits(self) -> SpeedLimits:
        return SpeedLimits(self.v_min, self.v_max, self.omega_max, self.kappa_bound)

    def constraint_slacks(self) -> dict[str, float]:
        """Slack (>= 0 means satisfied) of each design inequality."""
        a, r1, vm = self.psi_max, self.rho_max, self.v_coord
        k0 = self.kappa_bound
        return {
            "turn_budget_corner": (self.omega_max - self.alpha) / vm
                                  - math.sqrt((a / r1) ** 2 + k0 ** 2),
            "turn_budget_side": (self.omega_max - self.alpha) / vm - k0 / (1.0 - k0 * r1),
            "speed_budget": self.v_fast_ref - self.speed_margin - self.v_min_ref,
        }

    def validate_basic(self) -> None:
        """Structural sanity only; admissibility inequalities not enforced."""
        self.limits().validate()
        if not 0.0 < self.psi_max < math.pi / 2.0:
            raise ValueError("need 0 < psi_max < pi/2")
        if not 0.0 < self.rho_max < self.r0:
            raise ValueError("need 0 < rho_max < 1/kappa_bound")
        if not self.v_min < self.v_coord <= self.v_max:
            raise ValueError("need v_min < v_coord <= v_max")
        if self.rho_universe < self.rho_max:
            raise ValueError("rho_universe must cover the coordination set")
        if self.k1 <= 0.0 or self.k2 < 1.0 or self.k3 < 1.0:
            raise ValueError("need k1 > 0 and k2, k3 >= 1")
        if not self.psi_max <= self.rho_max * self.k1 < self.psi_max * self.k2:
            raise ValueError("gains must satisfy psi_max <= rho_max*k1 < psi_max*k2")
        if self.alpha <= 0.0 or self.speed_margin <= 0.0:
            raise ValueError("alpha and speed_margin must be positive")
        if not 0.0 < self.chi_blend < 1.0:
            raise ValueError("chi_blend must lie in (0, 1)")
        if self.sign_eps < 0.0:
            raise ValueError("sign_eps must be >= 0")

    def validate(self) -> None:
        """Full re-check of every design invariant."""
        self.validate_basic()
        slacks = self.constraint_slacks()
        for name, slack in slacks.items():
            if slack < 0.0:
                raise ValueError(f"design inequality violated: {name} (slack {slack:g})")
        if not self.rho_universe < self.r0 - self.v_min / self.omega_max:
            raise ValueError("rho_universe must stay below 1/kappa_bound - v_min/omega_max")
        if self.contraction >= 1.0:
            raise ValueError("contraction factor must be < 1")
        if self.spacing > 0.0:
            if not 0.0 < self.chi_delta2 <= self.chi_delta1 < self.spacing:
                raise ValueError("need 0 < chi_delta2 <= chi_delta1 < spacing")


def check_feasibility_precondition(limits: SpeedLimits, speed_margin: float) -> bool:
    """Sufficient existence condition for the set design problem."""
    return (limits.kappa_bound <= limits.omega_max / limits.v_max
            and limits.v_min + speed_margin <= limits.v_max)


def _v_coord_window(a, r1, limits: SpeedLimits, speed_margin, alpha):
    """Feasible v_coord interval (lo, hi) for given half-widths; arrays ok."""
    k0 = limits.kappa_bound
    hi = np.minimum(limits.v_max,
                    (limits.omega_max - alpha) / np.sqrt((a / r1) ** 2 + k0 ** 2))
    hi = np.minimum(hi, (limits.omega_max - alpha) * (1.0 - k0 * r1) / k0)
    lo = (1.0 + k0 * r1) * (limits.v_min / (1.0 - k0 * r1) + speed_margin) / np.cos(a)
    return lo, hi


def _best_on_grid(a_grid, r1_grid, limits, speed_margin, alpha):
    """Feasible point maximizing a*r1 on a rectangular grid, or None."""
    best = None
    for a in a_grid:
        lo, hi = _v_coord_window(a, r1_grid, limits, speed_margin, alpha)
        ok = (hi >= lo) & (hi > limits.v_min)
        if not ok.any():
            continue
        r1_ok = r1_grid[ok]
        j = int(np.argmax(a * r1_ok))
        cand = (float(a * r1_ok[j]), float(a), float(r1_ok[j]))
        if best is None or cand > best:
            best = cand
    return best


def design_coordination_set(limits: SpeedLimits, speed_margin: float = 1.0,
                            alpha: float = 0.01, *, spacing: float = 0.0,
                            **overrides) -> CoordParams:
    """Choose (psi_max, rho_max, v_coord) maximizing the set area proxy.

    Exhaustive coarse grid over the two half-widths with the speed window
    solved analytically, then three zoom rounds around the winner.  v_coord
    is set to the largest feasible value (it loosens the speed budget and
    speeds up coordination).  Deterministic; ties break lexicographically.

    Remaining fields are defaulted (gains k1=1, k2=rho_max/psi_max+1, k3=1;
    rho_universe at 90% of its admissible bound) unless overridden.
    """
    limits.validate()
    if speed_margin <= 0.0:
        raise ValueError("speed_margin must be positive")
    if not check_feasibility_precondition(limits, speed_margin):
        raise Infeasible(
            "feasibility precondition fails: need kappa_bound <= omega_max/v_max "
            "and v_min + speed_margin <= v_max")

    r0 = 1.0 / limits.kappa_bound
    a_lo, a_hi = 1.0e-4, math.pi / 2.0 - 1.0e-6
    r_lo, r_hi = 1.0e-3, r0 * (1.0 - 1.0e-6)
    best = _best_on_grid(np.linspace(a_lo, a_hi, 400),
                         np.linspace(r_lo, r_hi, 1200),
                         limits, speed_margin, alpha)
    if best is None:
        raise Infeasible("no feasible point on the design grid")
    for _ in range(3):
        _, a_c, r_c = best
        da = (a_hi - a_lo) / 400 * 3.0
        dr = (r_hi - r_lo) / 1200 * 3.0
        a_grid = np.linspace(max(a_lo, a_c - da), min(a_hi, a_c + da), 121)
        r_grid = np.linspace(max(r_lo, r_c - dr), min(r_hi, r_c + dr), 121)
        refined = _best_on_grid(a_grid, r_grid, limits, speed_margin, alpha)
        if refined is not None and refined > best:
            best = refined
        a_lo, a_hi = max(a_lo, a_c - da), min(a_hi, a_c + da)
        r_lo, r_hi = max(r_lo, r_c - dr), min(r_hi, r_c + dr)

    _, a, r1 = best
    lo, hi = _v_coord_window(a, r1, limits, speed_margin, alpha)
    v_coord = float(hi)
    defaults = dict(
        psi_max=a, rho_max=r1, v_coord=v_coord,
        rho_universe=0.9 * (r0 - limits.v_min / limits.omega_max),
        v_min=limits.v_min, v_max=limits.v_max,
        omega_max=limits.omega_max, kappa_bound=limits.kappa_bound,
        alpha=alpha, speed_margin=speed_margin,
        k1=1.0, k2=r1 / a + 1.0, k3=1.0, spacing=spacing,
    )
    defaults.update(overrides)
    params = CoordParams(**defaults)
    params.validate()
    return params


def coordination_rate_bound(params: CoordParams) -> float:
    """Upper bound on the spacing-error decay rate |zeta_dot| (m/s)."""
    return (1.0 - params.chi_blend) * (params.v_fast_ref - params.v_min_ref)
