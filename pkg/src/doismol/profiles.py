"""Named initial data on the annulus, sampled on grid nodes."""

from __future__ import annotations

import numpy as np

from .geometry import Region, SpaceTimeGrid
from .oracle import eigen_profile, eigen_wavenumbers

__all__ = ["bump_profile", "initial_profile", "PROFILE_NAMES"]

PROFILE_NAMES = ("bump", "eigenmode", "zero")


def bump_profile(domain, margin: float = 0.1, amplitude: float = 1.0):
    """Smooth bump compactly supported inside the open annulus.

    Support is [a + margin*(R-a), R - margin*(R-a)]; the profile and all
    its derivatives vanish at both ends, so the zero extension into the
    inner ball is smooth and g(a) = 0 holds exactly.  Peak value is
    ``amplitude`` at the midpoint.
    """
    if not (0.0 < margin < 0.5):
        raise ValueError("bump margin must lie in (0, 0.5)")
    a, R = domain.a, domain.R
    center = 0.5 * (a + R)
    half_width = 0.5 * (R - a) * (1.0 - 2.0 * margin)

    def profile(r):
        r = np.asarray(r, dtype=float)
        s = (r - center) / half_width
        out = np.zeros_like(s)
        inside = np.abs(s) < 1.0
        out[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
        return out

    return profile


def initial_profile(grid: SpaceTimeGrid, name: str, k: int = 1,
                    margin: float = 0.1, amplitude: float = 1.0) -> np.ndarray:
    """Sample a named initial datum on the annulus nodes.

    Names: "bump" (smooth, compact support, the default for experiments),
    "eigenmode" (k-th oracle mode, m = 3 only), "zero".
    """
    r = grid.r_nodes[grid.node_slice(Region.ANNULUS)]
    if name == "bump":
        return bump_profile(grid.domain, margin=margin, amplitude=amplitude)(r)
    if name == "eigenmode":
        mode = eigen_wavenumbers(grid.domain, k)[-1]
        return amplitude * eigen_profile(grid.domain, mode)(r)
    if name == "zero":
        return np.zeros_like(r)
    raise ValueError(f"unknown initial profile {name!r}; choose from {PROFILE_NAMES}")
