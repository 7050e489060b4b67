"""Radially symmetric concentric-ball geometry and space-time grids.

Everything downstream (solvers, norms, energy checks) works on radial
profiles u(t, r) over the ball of radius ``R`` in dimension ``m``, with a
distinguished interface sphere at radius ``a`` separating the inner ball
from the outer annulus.  The grid is node based and uniform, and the
interface must land exactly on a node so that inner/outer restrictions and
interface traces are index operations, not interpolations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np
from scipy.special import gamma as _gamma

__all__ = [
    "Region",
    "RadialDomain",
    "SpaceTimeGrid",
    "Field",
    "GridAlignmentError",
    "RegionError",
    "build_domain",
    "extend_by_zero",
    "restrict_outer",
    "restrict_inner",
    "lateral_trace",
]


class GridAlignmentError(ValueError):
    """Raised when the interface radius does not fall on a grid node."""


class RegionError(ValueError):
    """Raised when a field's region is incompatible with an operation."""


class Region(str, Enum):
    """Subsets of the space-time cylinder a radial field can live on."""

    FULL_BALL = "full_ball"          # all nodes, 0 <= r <= R
    ANNULUS = "annulus"              # a <= r <= R
    INNER_BALL = "inner_ball"        # 0 <= r <= a
    LATERAL_BOUNDARY = "lateral_boundary"  # the interface sphere r = a


@dataclass(frozen=True)
class RadialDomain:
    """Concentric-ball geometry: inner ball of radius ``a`` inside the
    ball of radius ``R`` in dimension ``m``.

    ``omega_m`` is the surface area of the unit (m-1)-sphere, so that the
    volume element of a radial profile is omega_m * r**(m-1) * dr.
    """

    m: int
    a: float
    R: float

    def __post_init__(self) -> None:
        if not isinstance(self.m, (int, np.integer)) or isinstance(self.m, bool):
            raise ValueError("dimension m must be an integer")
        if self.m < 1:
            raise ValueError(f"dimension m must be >= 1, got {self.m}")
        if not (np.isfinite(self.a) and np.isfinite(self.R)):
            raise ValueError("radii must be finite")
        if not (0.0 < self.a < self.R):
            raise ValueError(f"need 0 < a < R, got a={self.a}, R={self.R}")

    @property
    def omega_m(self) -> float:
        m = self.m
        return float(2.0 * np.pi ** (m / 2.0) / _gamma(m / 2.0))


def build_domain(m: int, a: float, R: float) -> RadialDomain:
    """Validate and build the concentric-ball geometry."""
    return RadialDomain(m=int(m), a=float(a), R=float(R))


@dataclass(frozen=True)
class SpaceTimeGrid:
    """Uniform node grid on [0, R] x [0, T] with the interface on a node.

    Nodes r_j = j*h with h = R/Nr, times t_n = n*dt with dt = T/Nt.  The
    interface index j0 satisfies r_{j0} = a exactly; construction fails if
    a/h is not an integer (within a tiny relative tolerance), because all
    region bookkeeping is index based.
    """

    domain: RadialDomain
    T: float
    Nt: int
    Nr: int

    def __post_init__(self) -> None:
        if not (np.isfinite(self.T) and self.T > 0.0):
            raise ValueError(f"final time T must be positive, got {self.T}")
        if self.Nt < 1:
            raise ValueError(f"Nt must be >= 1, got {self.Nt}")
        if self.Nr < 2:
            raise ValueError(f"Nr must be >= 2, got {self.Nr}")
        ratio = self.domain.a / (self.domain.R / self.Nr)
        j0 = round(ratio)
        if abs(ratio - j0) > 1e-9:
            raise GridAlignmentError(
                f"interface r=a must fall on a node: a/h = {ratio!r} is not "
                f"an integer (a={self.domain.a}, R={self.domain.R}, Nr={self.Nr})"
            )
        if not (1 <= j0 <= self.Nr - 1):
            raise GridAlignmentError("interface node must be interior to (0, R)")

    @property
    def h(self) -> float:
        return self.domain.R / self.Nr

    @property
    def dt(self) -> float:
        return self.T / self.Nt

    @property
    def j0(self) -> int:
        return round(self.domain.a / self.h)

    @cached_property
    def r_nodes(self) -> np.ndarray:
        r = np.linspace(0.0, self.domain.R, self.Nr + 1)
        r.setflags(write=False)
        return r

    @cached_property
    def t_nodes(self) -> np.ndarray:
        t = np.linspace(0.0, self.T, self.Nt + 1)
        t.setflags(write=False)
        return t

    def refined(self, factor: int = 2) -> "SpaceTimeGrid":
        """Simultaneous (dt, h) -> (dt/factor, h/factor) refinement.

        Refinement by an integer factor keeps the interface on a node.
        """
        if factor < 1 or int(factor) != factor:
            raise ValueError("refinement factor must be a positive integer")
        return SpaceTimeGrid(self.domain, self.T, self.Nt * factor, self.Nr * factor)

    # -- region bookkeeping -------------------------------------------------

    def node_slice(self, region: Region) -> slice:
        """Indices into the full node array covered by a region."""
        if region == Region.FULL_BALL:
            return slice(0, self.Nr + 1)
        if region == Region.ANNULUS:
            return slice(self.j0, self.Nr + 1)
        if region == Region.INNER_BALL:
            return slice(0, self.j0 + 1)
        raise RegionError(f"no node range for region {region}")

    def n_nodes(self, region: Region) -> int:
        if region == Region.LATERAL_BOUNDARY:
            return 0
        s = self.node_slice(region)
        return s.stop - s.start

    def interface_offset(self, region: Region) -> int:
        """Position of the interface node within a region's node array."""
        if region == Region.FULL_BALL:
            return self.j0
        if region == Region.ANNULUS:
            return 0
        if region == Region.INNER_BALL:
            return self.j0
        raise RegionError(f"region {region} has no interface node")

    # -- quadrature geometry ------------------------------------------------

    @cached_property
    def _cell_volumes_full(self) -> np.ndarray:
        """Exact integral of r**(m-1) over each node's finite-volume cell.

        Cells are [r_j - h/2, r_j + h/2] clipped to [0, R].  The interface
        node's cell straddles r = a; its inner/outer split is exposed
        separately so that inner-ball + annulus weights add up exactly.
        """
        m = self.domain.m
        r = self.r_nodes
        lo = np.clip(r - 0.5 * self.h, 0.0, None)
        hi = np.minimum(r + 0.5 * self.h, self.domain.R)
        v = (hi ** m - lo ** m) / m
        v.setflags(write=False)
        return v

    @cached_property
    def interface_cell_split(self) -> tuple[float, float]:
        """(inner, outer) parts of the interface node's cell volume."""
        m = self.domain.m
        a = self.domain.a
        lo = a - 0.5 * self.h
        hi = a + 0.5 * self.h
        return ((a ** m - lo ** m) / m, (hi ** m - a ** m) / m)

    def cell_volumes(self, region: Region) -> np.ndarray:
        """Radial volume weights (without the omega_m factor) per node."""
        full = self._cell_volumes_full
        v_in, v_out = self.interface_cell_split
        if region == Region.FULL_BALL:
            return full
        if region == Region.ANNULUS:
            v = full[self.j0:].copy()
            v[0] = v_out
            v.setflags(write=False)
            return v
        if region == Region.INNER_BALL:
            v = full[: self.j0 + 1].copy()
            v[-1] = v_in
            v.setflags(write=False)
            return v
        raise RegionError(f"no volume weights for region {region}")

    @cached_property
    def r_faces(self) -> np.ndarray:
        """Radii of the Nr faces between consecutive nodes."""
        f = (np.arange(self.Nr) + 0.5) * self.h
        f.setflags(write=False)
        return f

    def face_slice(self, region: Region) -> slice:
        """Indices of the faces whose centers lie inside a region.

        Face j sits at r = (j + 1/2) h between nodes j and j+1.  Inner-ball
        faces are those with center below a, annulus faces those above, so
        the gradient energies of the two regions add up to the full one.
        """
        if region == Region.FULL_BALL:
            return slice(0, self.Nr)
        if region == Region.INNER_BALL:
            return slice(0, self.j0)
        if region == Region.ANNULUS:
            return slice(self.j0, self.Nr)
        raise RegionError(f"no faces for region {region}")

    def face_areas(self, region: Region) -> np.ndarray:
        """r**(m-1) at face centers (without omega_m), per region face."""
        return self.r_faces[self.face_slice(region)] ** (self.domain.m - 1)


@dataclass
class Field:
    """A radial space-time field: values[n, j] at time t_n and node r_j.

    Values are immutable after construction; operations return new fields.
    Boundary fields (region LATERAL_BOUNDARY) carry one value per time
    level.
    """

    grid: SpaceTimeGrid
    region: Region
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if self.region == Region.LATERAL_BOUNDARY:
            expected = (self.grid.Nt + 1,)
        else:
            expected = (self.grid.Nt + 1, self.grid.n_nodes(self.region))
        if vals.shape != expected:
            raise RegionError(
                f"field on {self.region.value} must have shape {expected}, "
                f"got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        if vals is self.values and vals.flags.writeable:
            vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def r(self) -> np.ndarray:
        if self.region == Region.LATERAL_BOUNDARY:
            return self.grid.r_nodes[self.grid.j0 : self.grid.j0 + 1]
        return self.grid.r_nodes[self.grid.node_slice(self.region)]

    @property
    def t(self) -> np.ndarray:
        return self.grid.t_nodes

    @classmethod
    def from_function(
        cls, grid: SpaceTimeGrid, region: Region, fn
    ) -> "Field":
        """Sample fn(t, r) on the grid (vectorized over r per time level)."""
        if region == Region.LATERAL_BOUNDARY:
            a = grid.domain.a
            vals = np.array([float(fn(t, a)) for t in grid.t_nodes])
        else:
            r = grid.r_nodes[grid.node_slice(region)]
            vals = np.stack([np.asarray(fn(t, r), dtype=float) for t in grid.t_nodes])
        return cls(grid, region, vals)

    @classmethod
    def zeros(cls, grid: SpaceTimeGrid, region: Region) -> "Field":
        if region == Region.LATERAL_BOUNDARY:
            return cls(grid, region, np.zeros(grid.Nt + 1))
        return cls(grid, region, np.zeros((grid.Nt + 1, grid.n_nodes(region))))

    def _check_compatible(self, other: "Field") -> None:
        if self.grid is not other.grid and self.grid != other.grid:
            raise RegionError("field arithmetic needs a shared grid")
        if self.region != other.region:
            raise RegionError("field arithmetic needs a shared region")

    def __add__(self, other: "Field") -> "Field":
        self._check_compatible(other)
        return Field(self.grid, self.region, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        self._check_compatible(other)
        return Field(self.grid, self.region, self.values - other.values)

    def __rmul__(self, c: float) -> "Field":
        return Field(self.grid, self.region, float(c) * self.values)


def extend_by_zero(g: Field) -> Field:
    """Extend an annulus field into the full ball by zero on the inner ball.

    The interface node keeps the annulus value, so a nonzero g(a) puts the
    jump at the inner neighbor; with g(a) = 0 the extension is continuous.
    """
    if g.region != Region.ANNULUS:
        raise RegionError("extend_by_zero expects an annulus field")
    grid = g.grid
    vals = np.zeros((grid.Nt + 1, grid.Nr + 1))
    vals[:, grid.j0 :] = g.values
    return Field(grid, Region.FULL_BALL, vals)


def restrict_outer(p: Field) -> Field:
    """Restriction of a full-ball field to the annulus (interface included)."""
    if p.region != Region.FULL_BALL:
        raise RegionError("restrict_outer expects a full-ball field")
    return Field(p.grid, Region.ANNULUS, p.values[:, p.grid.j0 :].copy())


def restrict_inner(p: Field) -> Field:
    """Restriction of a full-ball field to the inner ball (interface included)."""
    if p.region != Region.FULL_BALL:
        raise RegionError("restrict_inner expects a full-ball field")
    return Field(p.grid, Region.INNER_BALL, p.values[:, : p.grid.j0 + 1].copy())


def lateral_trace(p: Field) -> Field:
    """Time series of the field value on the interface sphere r = a."""
    if p.region == Region.LATERAL_BOUNDARY:
        return p
    off = p.grid.interface_offset(p.region)
    return Field(p.grid, Region.LATERAL_BOUNDARY, p.values[:, off].copy())
