"""Path-following error state and its region classification.

The error of a UAV with respect to its path is phi = (rho, psi): signed
lateral offset to the closest projection and heading relative to the path
tangent there.  The plane of errors is partitioned into a coordination set
(six subsets), four outer subsets, and the exterior; the hybrid supervisor
dispatches on the resulting tag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .exceptions import SingularDenominator
from .paths import Path, wrap_angle


@dataclass(frozen=True)
class PathError:
    """(rho, psi) plus the projection arc position and local curvature."""

    rho: float
    psi: float
    s_proj: float = 0.0
    kappa: float = 0.0


class Region(str, Enum):
    """Tags partitioning the error plane; values appear verbatim in traces."""

    S1_1 = "S1_1"
    S1_2 = "S1_2"
    S1_3 = "S1_3"
    S1_4 = "S1_4"
    S1_5 = "S1_5"
    S1_6 = "S1_6"
    S2_1 = "S2_1"
    S2_2 = "S2_2"
    S2_3 = "S2_3"
    S2_4 = "S2_4"
    OUTSIDE = "OutsideS"

    @property
    def in_s1(self) -> bool:
        return self.value.startswith("S1")

    @property
    def in_s2(self) -> bool:
        return self.value.startswith("S2")


def switching_value(rho: float, psi: float, params) -> float:
    """Switching-surface value k1*rho + k2*psi + k3*sin(psi)."""
    return params.k1 * rho + params.k2 * psi + params.k3 * math.sin(psi)


def compute_error(state, path: Path, hint_s: float | None = None) -> PathError:
    """Path-following error of a UAV state against its path.

    Projection uniqueness is only guaranteed for |rho| < path.r0; the warm
    start ``hint_s`` keeps the projection continuous between steps.
    """
    proj = path.project((state.x, state.y), hint_s)
    psi = wrap_angle(state.theta - proj.tangent_angle)
    return PathError(proj.rho, psi, proj.s, proj.curvature)


def error_dynamics(err: PathError, cmd) -> tuple[float, float]:
    """Right-hand side (rho_dot, psi_dot) of the error equations."""
    denom = 1.0 - err.kappa * err.rho
    if denom <= 0.0:
        raise SingularDenominator(f"1 - kappa*rho = {denom:g} <= 0")
    rho_dot = cmd.v * math.sin(err.psi)
    psi_dot = cmd.omega - err.kappa * cmd.v * math.cos(err.psi) / denom
    return rho_dot, psi_dot


def in_coordination_set(rho: float, psi: float, params) -> bool:
    a, r1 = params.psi_max, params.rho_max
    return (abs(rho) <= r1 and abs(psi) <= a
            and abs(a * rho + r1 * psi) <= a * r1)


def classify(err: PathError, params) -> Region:
    """Unique region tag for an error state.

    Membership is tested in a fixed order so boundary states resolve
    deterministically: the coordination set and its six subsets first (the
    origin lands in S1_2), then the two outer box subsets, then the two
    remaining outer subsets.
    """
    rho, psi = err.rho, err.psi
    a, r1, r2 = params.psi_max, params.rho_max, params.rho_universe
    if in_coordination_set(rho, psi, params):
        th = switching_value(rho, psi, params)
        if rho > 0.0 and psi >= 0.0 and th > 0.0:
            return Region.S1_1
        if rho <= 0.0 and psi >= 0.0 and th >= 0.0:
            return Region.S1_2
        if rho < 0.0 and psi <= 0.0 and th < 0.0:
            return Region.S1_3
        if rho >= 0.0 and psi <= 0.0 and th <= 0.0:
            return Region.S1_4
        if rho < 0.0 and psi > 0.0 and th < 0.0:
            return Region.S1_5
        return Region.S1_6
    if abs(rho) > r2:
        return Region.OUTSIDE
    if -r2 <= rho < -r1 and 0.0 < psi <= a:
        return Region.S2_2
    if r1 < rho <= r2 and -a <= psi < 0.0:
        return Region.S2_4
    if psi > 0.0 or (psi == 0.0 and rho > r1):
        return Region.S2_1
    return Region.S2_3


def in_escape_set(err: PathError, params, eps0: float) -> bool:
    """Whether phi lies in the escape sliver of the unconstrained design.

    On paths with curvature in (-kappa_bound, 0], no admissible constant
    control can keep such an error inside |rho| <= 1/kappa_bound.
    """
    rho, psi = err.rho, err.psi
    r0 = 1.0 / params.kappa_bound
    if not (0.0 <= rho <= r0 and 0.0 <= psi <= math.pi / 2.0):
        return False
    return params.v_min * (psi - eps0) * math.sin(eps0) / params.omega_max + rho - r0 > 0.0
