"""Independent reference solutions for the annulus heat problem (m = 3).

In three dimensions the substitution v = r*u turns the radial heat
equation on the annulus a < r < R into the flat heat equation v_t =
kappa*v_rr with v(a) = 0 (from the absorbing condition u(a) = 0) and the
Robin condition v_r(R) = v(R)/R (from the reflecting condition u_r(R) = 0).
Separation of variables gives modes v = sin(beta*(r-a)) with wavenumbers
solving

    tan(beta*(R-a)) = beta*R,

an orthogonal family in plain L2(a, R).  The series solution

    u(t, r) = (1/r) * sum_k c_k exp(-kappa*beta_k^2*t) sin(beta_k*(r-a))

is this module's oracle for the Smoluchowski solver; it shares no code
with the finite-volume path.  A small method-of-manufactured-solutions
helper for the forced solvers lives here as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .geometry import Field, Region, SpaceTimeGrid
from .norms import volume_weights

__all__ = [
    "EigenMode",
    "eigen_wavenumbers",
    "eigen_profile",
    "series_solution",
    "mms_source",
]


@dataclass(frozen=True)
class EigenMode:
    """One radial mode: index k (1-based), wavenumber beta, and the plain
    L2(a, R) normalization integral of sin(beta*(r-a))."""

    k: int
    beta: float
    normalization: float


def _pinned_residual(x: float, c: float) -> float:
    """Pole-free form of tan(x) = c*x: sin(x) - c*x*cos(x)."""
    return np.sin(x) - c * x * np.cos(x)


def eigen_wavenumbers(domain, count: int) -> list[EigenMode]:
    """First ``count`` wavenumbers of tan(beta*(R-a)) = beta*R, m = 3 only.

    In scaled form x = beta*(R-a) the equation reads tan(x) = c*x with
    c = R/(R-a) > 1.  Because c > 1 the first root precedes the first
    tangent pole (bracket (0, pi/2)); every later branch ((k-3/2)*pi,
    (k-1/2)*pi) contains exactly one root.  Roots are found by bisection
    (brentq) on the pole-free residual sin(x) - c*x*cos(x), whose sign
    alternates at consecutive half-integer multiples of pi, and verified
    by back-substitution.  Near the poles tan(x) itself is too steep for
    an absolute 1e-12 residual in double precision, so the back
    substitution checks |sin(x) - c*x*cos(x)| / (1 + c*x) <= 1e-12, the
    same equation cleared of its poles.
    """
    if domain.m != 3:
        raise ValueError(
            f"eigen oracle requires m = 3 (got m = {domain.m}): the v = r*u "
            "substitution behind the closed-form modes only exists there"
        )
    if count < 1:
        raise ValueError("count must be >= 1")
    a, R = domain.a, domain.R
    L = R - a
    c = R / L
    modes: list[EigenMode] = []
    for k in range(1, count + 1):
        if k == 1:
            lo, hi = 1e-12, 0.5 * np.pi * (1.0 - 1e-14)
        else:
            lo = (k - 1.5) * np.pi + 1e-12
            hi = (k - 0.5) * np.pi - 1e-12
        x = brentq(_pinned_residual, lo, hi, args=(c,), xtol=1e-15)
        res = abs(_pinned_residual(x, c)) / (1.0 + c * x)
        if res > 1e-12:
            raise RuntimeError(f"wavenumber {k} failed back-substitution: {res:.3e}")
        beta = x / L
        norm = 0.5 * L - np.sin(2.0 * beta * L) / (4.0 * beta)
        modes.append(EigenMode(k=k, beta=float(beta), normalization=float(norm)))
    return modes


def eigen_profile(domain, mode: EigenMode) -> Callable[[np.ndarray], np.ndarray]:
    """The radial eigenfunction sin(beta*(r-a))/r as a callable."""
    a = domain.a

    def profile(r):
        r = np.asarray(r, dtype=float)
        return np.sin(mode.beta * (r - a)) / r

    return profile


def series_solution(
    g_values: np.ndarray,
    grid: SpaceTimeGrid,
    kappa: float,
    n_modes: int | None = None,
    tail_tol: float = 1e-10,
    max_modes: int = 200,
) -> Field:
    """Eigen-series solution of the annulus problem from gridded data.

    ``g_values`` are the initial values on the annulus nodes.  The
    coefficients are discrete projections of r*g against sin(beta_k*(r-a))
    using the same radial volume weights as the norms module, so that mode
    orthogonality holds to quadrature accuracy on the grid itself.

    Truncation: modes are kept while their contribution at the first time
    step, |c_k| * exp(-kappa*beta_k^2*dt), exceeds ``tail_tol`` times the
    largest such contribution (unless ``n_modes`` pins the count).
    """
    if kappa <= 0.0:
        raise ValueError("kappa must be positive")
    g_values = np.asarray(g_values, dtype=float)
    J = grid.n_nodes(Region.ANNULUS)
    if g_values.shape != (J,):
        raise ValueError(f"g_values must have shape ({J},), got {g_values.shape}")

    count = n_modes if n_modes is not None else max_modes
    modes = eigen_wavenumbers(grid.domain, count)
    r = grid.r_nodes[grid.node_slice(Region.ANNULUS)]
    a = grid.domain.a
    w = volume_weights(grid, Region.ANNULUS)

    phis = np.stack([np.sin(mo.beta * (r - a)) / r for mo in modes])  # (K, J)
    coef = (phis * w) @ g_values / ((phis ** 2) @ w)
    betas = np.array([mo.beta for mo in modes])

    if n_modes is None:
        first_step = np.abs(coef) * np.exp(-kappa * betas ** 2 * grid.dt)
        lead = first_step.max()
        if lead > 0.0:
            keep = np.nonzero(first_step > tail_tol * lead)[0]
            K = int(keep[-1]) + 1
            phis, coef, betas = phis[:K], coef[:K], betas[:K]

    decay = np.exp(-kappa * np.outer(grid.t_nodes, betas ** 2))  # (Nt+1, K)
    vals = decay @ (coef[:, None] * phis)
    return Field(grid, Region.ANNULUS, vals)


def mms_source(
    u: Callable,
    u_t: Callable,
    u_r: Callable,
    u_rr: Callable,
    grid: SpaceTimeGrid,
    kappa: float,
    lam: float = 0.0,
    region: Region = Region.ANNULUS,
) -> tuple[Field, Field]:
    """Forcing and exact fields for a manufactured solution u(t, r).

    Returns (forcing, exact) with forcing = u_t - kappa*Lap(u) + lam*X*u,
    where Lap is the radial Laplacian u_rr + (m-1)/r * u_r and X the
    indicator of the closed inner ball.  At r = 0 the Laplacian limit
    m*u_rr(0) is used; manufactured solutions on the full ball must have
    u_r(t, 0) = 0 for this to be exact.
    """
    m = grid.domain.m
    a = grid.domain.a
    r = grid.r_nodes[grid.node_slice(region)]
    t = grid.t_nodes

    exact = np.stack([np.asarray(u(tn, r), dtype=float) for tn in t])
    force = np.empty_like(exact)
    chi = (r <= a).astype(float) if lam != 0.0 else None
    r_safe = np.where(r > 0.0, r, 1.0)
    for n, tn in enumerate(t):
        lap = np.asarray(u_rr(tn, r), dtype=float).copy()
        if m > 1:
            ur = np.asarray(u_r(tn, r), dtype=float)
            lap = lap + (m - 1) * np.where(r > 0.0, ur / r_safe, 0.0)
            if r[0] == 0.0:
                lap[0] = m * float(np.asarray(u_rr(tn, r[:1]), dtype=float)[0])
        row = np.asarray(u_t(tn, r), dtype=float) - kappa * lap
        if chi is not None:
            row = row + lam * chi * exact[n]
        force[n] = row
    return Field(grid, region, force), Field(grid, region, exact)
