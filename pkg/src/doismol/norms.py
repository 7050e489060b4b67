"""Discrete space-time norms over regions of the radial cylinder.

Spatial quadrature uses the exact per-cell volumes omega_m * integral of
r**(m-1) over each node's finite-volume cell (the r**(m-1)-weighted analog
of the trapezoid rule, with half cells at r = 0, r = a and r = R), so that

* the squared L2 norms over the inner ball and the annulus add up exactly
  to the full-ball norm (the interface cell is split at r = a), and
* the solvers' discrete energy identities close to round-off, because the
  time steppers use the same weights as their mass matrix.

Gradient norms live on faces: difference quotients (u_{j+1} - u_j)/h with
face weight omega_m * r_{j+1/2}**(m-1) * h, which is exactly the quadratic
form produced by summation by parts against the finite-volume Laplacian.

Time quadrature is trapezoidal for plain norms.  The Slobodeckii seminorm
uses the piecewise-constant-in-cell convention: a double sum over distinct
time levels with weight dt**2 and the diagonal excluded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Field, Region, RegionError, SpaceTimeGrid

__all__ = [
    "NormSpec",
    "l2",
    "grad_l2",
    "sup_t_l2",
    "slice_l2",
    "inner_l2",
    "slobodeckii_time",
    "interpolation_bound",
    "space_interpolation",
    "hrs_surrogate",
    "time_weights",
    "volume_weights",
    "face_weights",
    "evaluate",
]

_SPACE_REGIONS = (Region.FULL_BALL, Region.ANNULUS, Region.INNER_BALL)


def time_weights(grid: SpaceTimeGrid) -> np.ndarray:
    """Trapezoidal weights on the time levels, summing to T."""
    w = np.full(grid.Nt + 1, grid.dt)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def volume_weights(grid: SpaceTimeGrid, region: Region) -> np.ndarray:
    """Spatial L2 weights (omega_m included) for a region's nodes."""
    if region == Region.LATERAL_BOUNDARY:
        area = grid.domain.omega_m * grid.domain.a ** (grid.domain.m - 1)
        return np.array([area])
    return grid.domain.omega_m * grid.cell_volumes(region)


def face_weights(grid: SpaceTimeGrid, region: Region) -> np.ndarray:
    """Gradient L2 weights (omega_m included) for a region's faces."""
    return grid.domain.omega_m * grid.face_areas(region) * grid.h


def _column_values(u: Field, region: Region) -> np.ndarray:
    """Values of u on the requested region's nodes, shape (Nt+1, J)."""
    grid = u.grid
    if region == Region.LATERAL_BOUNDARY:
        if u.region == Region.LATERAL_BOUNDARY:
            return u.values[:, None]
        off = grid.interface_offset(u.region)
        return u.values[:, off : off + 1]
    if u.region == region:
        return u.values
    if u.region == Region.FULL_BALL and region in (Region.ANNULUS, Region.INNER_BALL):
        return u.values[:, grid.node_slice(region)]
    raise RegionError(f"cannot evaluate a {u.region.value} field on {region.value}")


def _face_differences(u: Field, region: Region) -> np.ndarray:
    """Difference quotients on the requested region's faces."""
    if region == Region.LATERAL_BOUNDARY or u.region == Region.LATERAL_BOUNDARY:
        raise RegionError("gradient norms need a spatial region")
    grid = u.grid
    if u.region == region:
        vals = u.values
    elif u.region == Region.FULL_BALL and region in (Region.ANNULUS, Region.INNER_BALL):
        vals = u.values[:, grid.node_slice(region)]
    else:
        raise RegionError(f"cannot evaluate a {u.region.value} field on {region.value}")
    return np.diff(vals, axis=1) / grid.h


def _resolve_region(u: Field, region: Region | None) -> Region:
    return u.region if region is None else region


def slice_l2(u: Field, n: int, region: Region | None = None) -> float:
    """Spatial L2 norm of the time slice t_n over a region."""
    region = _resolve_region(u, region)
    vals = _column_values(u, region)
    w = volume_weights(u.grid, region)
    return float(np.sqrt(vals[n] ** 2 @ w))


def l2(u: Field, region: Region | None = None) -> float:
    """Space-time L2 norm over a region (trapezoidal in time).

    For the lateral boundary this is the L2 norm over Sigma0 = (0,T) x {r=a}
    with surface measure omega_m * a**(m-1).
    """
    region = _resolve_region(u, region)
    vals = _column_values(u, region)
    w = volume_weights(u.grid, region)
    wt = time_weights(u.grid)
    return float(np.sqrt(wt @ ((vals ** 2) @ w)))


def inner_l2(u: Field, v: Field, region: Region | None = None) -> float:
    """Space-time L2 inner product with the same quadrature as ``l2``."""
    region = _resolve_region(u, region)
    uu = _column_values(u, region)
    vv = _column_values(v, region)
    if uu.shape != vv.shape:
        raise RegionError("inner_l2 needs fields on compatible node sets")
    w = volume_weights(u.grid, region)
    wt = time_weights(u.grid)
    return float(wt @ ((uu * vv) @ w))


def grad_l2(u: Field, region: Region | None = None) -> float:
    """Space-time L2 norm of the radial gradient over a region."""
    region = _resolve_region(u, region)
    d = _face_differences(u, region)
    w = face_weights(u.grid, region)
    wt = time_weights(u.grid)
    return float(np.sqrt(wt @ ((d ** 2) @ w)))


def slice_grad_l2(u: Field, n: int, region: Region | None = None) -> float:
    """Spatial gradient norm of the time slice t_n."""
    region = _resolve_region(u, region)
    d = _face_differences(u, region)
    w = face_weights(u.grid, region)
    return float(np.sqrt(d[n] ** 2 @ w))


def sup_t_l2(u: Field, region: Region | None = None) -> float:
    """max over time levels of the spatial L2 norm."""
    region = _resolve_region(u, region)
    vals = _column_values(u, region)
    w = volume_weights(u.grid, region)
    return float(np.sqrt(np.max((vals ** 2) @ w)))


def slobodeckii_time(u: Field, mu: float, region: Region | None = None) -> float:
    """Slobodeckii seminorm of order mu in time, values in spatial L2.

    Double-sum quadrature over distinct time levels:

        [u]_mu^2 = sum_{n != k} dt^2 ||u(t_n) - u(t_k)||_X^2 / |t_n-t_k|^(1+2 mu)

    with X the spatial L2 of the region (surface L2 on the boundary).  The
    diagonal is excluded (piecewise-constant-in-cell convention); the
    endpoint cells are deliberately not halved, a documented O(dt) bias.
    """
    if not (0.0 < mu < 1.0):
        raise ValueError(f"fractional order must lie strictly in (0, 1), got {mu}")
    region = _resolve_region(u, region)
    vals = _column_values(u, region)
    w = volume_weights(u.grid, region)
    t = u.grid.t_nodes
    dt = u.grid.dt

    q = (vals ** 2) @ w                    # squared slice norms
    g = (vals * w) @ vals.T                # slice Gram matrix
    sq = q[:, None] + q[None, :] - 2.0 * g
    np.clip(sq, 0.0, None, out=sq)         # guard round-off negatives
    gap = np.abs(t[:, None] - t[None, :])
    np.fill_diagonal(gap, 1.0)             # dummy, diagonal excluded below
    kern = sq / gap ** (1.0 + 2.0 * mu)
    np.fill_diagonal(kern, 0.0)
    return float(np.sqrt(dt * dt * kern.sum()))


def interpolation_bound(norm_x0: float, norm_x1: float, theta: float) -> float:
    """Interpolation-space bound norm_x0**(1-theta) * norm_x1**theta.

    The abstract interpolation constant is normalized to 1.  Endpoint
    orders are rejected: theta must lie strictly in (0, 1).
    """
    if not (0.0 < theta < 1.0):
        raise ValueError(f"interpolation order must lie strictly in (0, 1), got {theta}")
    if norm_x0 < 0.0 or norm_x1 < 0.0:
        raise ValueError("interpolation endpoints must be nonnegative")
    return float(norm_x0 ** (1.0 - theta) * norm_x1 ** theta)


def space_interpolation(u: Field, r_order: float, region: Region | None = None) -> float:
    """Surrogate for the L2-in-time, H^r-in-space norm via interpolation.

    Uses the product bound ||u||_{L2}**(1-r) * ||u||_{H1}**r with
    ||u||_H1 = sqrt(l2**2 + grad_l2**2) over the space-time region.
    Spatial fractional norms are never quadratured directly.
    """
    region = _resolve_region(u, region)
    n0 = l2(u, region)
    n1 = float(np.hypot(n0, grad_l2(u, region)))
    return interpolation_bound(n0, n1, r_order)


def hrs_surrogate(
    u: Field, r_order: float, s_order: float, region: Region | None = None
) -> float:
    """Surrogate for the anisotropic H^{r,s} norm on a space-time region.

    Root sum of squares of the spatial interpolation bound (order r), the
    Slobodeckii time seminorm (order s) and the plain L2 norm.
    """
    region = _resolve_region(u, region)
    a = space_interpolation(u, r_order, region)
    b = slobodeckii_time(u, s_order, region)
    c = l2(u, region)
    return float(np.sqrt(a * a + b * b + c * c))


_KINDS = {
    "l2",
    "grad_l2",
    "sup_t_l2",
    "slobodeckii_time",
    "interpolation_space",
    "hrs_surrogate",
}


@dataclass(frozen=True)
class NormSpec:
    """A named norm evaluation request: which norm, where, at which orders."""

    kind: str
    region: Region
    orders: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}; choose from {sorted(_KINDS)}")
        need = {
            "l2": 0,
            "grad_l2": 0,
            "sup_t_l2": 0,
            "slobodeckii_time": 1,
            "interpolation_space": 1,
            "hrs_surrogate": 2,
        }[self.kind]
        if len(self.orders) != need:
            raise ValueError(f"norm kind {self.kind!r} takes {need} order(s), got {self.orders}")
        for mu in self.orders:
            if not (0.0 < mu < 1.0):
                raise ValueError(f"fractional orders must lie strictly in (0, 1), got {mu}")


def evaluate(spec: NormSpec, u: Field) -> float:
    """Evaluate a NormSpec on a field."""
    if spec.kind == "l2":
        return l2(u, spec.region)
    if spec.kind == "grad_l2":
        return grad_l2(u, spec.region)
    if spec.kind == "sup_t_l2":
        return sup_t_l2(u, spec.region)
    if spec.kind == "slobodeckii_time":
        return slobodeckii_time(u, spec.orders[0], spec.region)
    if spec.kind == "interpolation_space":
        return space_interpolation(u, spec.orders[0], spec.region)
    return hrs_surrogate(u, spec.orders[0], spec.orders[1], spec.region)
