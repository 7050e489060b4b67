"""Lambda sweeps and convergence-rate verdicts.

A sweep solves the Doi model across a ladder of absorption strengths,
pairs it with one Smoluchowski solve of the same data, and reduces each
run to the scalar quantities whose decay in lambda the theory bounds:

    interior_l2q0        ||p_lambda||_{L2(Q0)}          O(lambda^-1/2)
    interior_supt_l2     sup_t ||p_lambda(t)||_{Omega0} O(lambda^-1/2)
    trace_l2sigma0       ||p_lambda||_{L2(Sigma0)}      O(lambda^-1/4)
    exterior_error_l2q1  ||p_lambda - rho||_{L2(Q1)}    O(lambda^-1/4)
    frac_interior        H^{eps1,eps2}(Q0) surrogate    O(lambda^-eps0)
    frac_exterior        H^{del1,del2}(Q1) surrogate    O(lambda^-del0)

with eps0 = min((1-eps1)/2, (1-eps2)/2) and del0 = min((1-del1)/4,
(1-del2)/4).  These are upper bounds, so the verdicts are one-sided:
faster decay passes.  Fits are least squares in log-log; a claim also
passes if the bound margin value * lambda^claimed is finite and
non-increasing over the top half of the sweep (saturation of a true
bound).  Difference-type quantities additionally carry a discretization
floor measured against the eigen-series oracle; sweep points within 3x of
the floor are dropped from their fit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Field, Region, SpaceTimeGrid, lateral_trace, restrict_inner, restrict_outer
from .norms import hrs_surrogate, l2, sup_t_l2
from .oracle import series_solution
from .solvers import ProblemSpec, solve_doi, solve_smoluchowski

__all__ = [
    "QUANTITIES",
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "RateFit",
    "ClaimCheck",
    "DegenerateSweepError",
    "claimed_exponent",
    "run_sweep",
    "fit_rate",
    "check_claims",
]

QUANTITIES = (
    "interior_l2q0",
    "interior_supt_l2",
    "trace_l2sigma0",
    "exterior_error_l2q1",
    "frac_interior",
    "frac_exterior",
)

_NEEDS_RHO = ("exterior_error_l2q1", "frac_exterior")


class DegenerateSweepError(ValueError):
    """Raised when sweep data cannot support a rate fit."""


@dataclass(frozen=True)
class SweepSpec:
    """Which lambdas to run and which quantities to record."""

    lambdas: tuple[float, ...]
    quantities: tuple[str, ...] = QUANTITIES
    eps_orders: tuple[float, float] = (0.6, 0.6)
    delta_orders: tuple[float, float] = (0.5, 0.5)

    def __post_init__(self) -> None:
        lams = tuple(float(x) for x in self.lambdas)
        if len(lams) < 4:
            raise ValueError(f"a sweep needs at least 4 lambda values, got {len(lams)}")
        if any(not np.isfinite(x) or x <= 0.0 for x in lams):
            raise ValueError("lambda values must be positive and finite")
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValueError("lambda values must be strictly increasing")
        object.__setattr__(self, "lambdas", lams)
        unknown = [q for q in self.quantities if q not in QUANTITIES]
        if unknown:
            raise ValueError(f"unknown quantities {unknown}; choose from {QUANTITIES}")
        for mu in (*self.eps_orders, *self.delta_orders):
            if not (0.0 < mu < 1.0):
                raise ValueError("fractional orders must lie strictly in (0, 1)")

    @classmethod
    def default_ladder(cls, lo_exp: float = 2.0, hi_exp: float = 6.0,
                       count: int = 9, **kw) -> "SweepSpec":
        """Half-decade ladder 10^lo .. 10^hi (default 1e2..1e6, 9 points)."""
        return cls(lambdas=tuple(np.logspace(lo_exp, hi_exp, count)), **kw)


def claimed_exponent(quantity: str, sweep: SweepSpec) -> float:
    """Theoretical decay exponent alpha in quantity = O(lambda^-alpha)."""
    if quantity == "interior_l2q0" or quantity == "interior_supt_l2":
        return 0.5
    if quantity == "trace_l2sigma0" or quantity == "exterior_error_l2q1":
        return 0.25
    if quantity == "frac_interior":
        e1, e2 = sweep.eps_orders
        return min((1.0 - e1) / 2.0, (1.0 - e2) / 2.0)
    if quantity == "frac_exterior":
        d1, d2 = sweep.delta_orders
        return min((1.0 - d1) / 4.0, (1.0 - d2) / 4.0)
    raise ValueError(f"unknown quantity {quantity!r}")


@dataclass(frozen=True)
class SweepRow:
    lam: float
    quantity: str
    value: float
    grid_h: float
    grid_dt: float


@dataclass
class SweepResult:
    sweep: SweepSpec
    rows: list[SweepRow]
    grid_h: float
    grid_dt: float
    floors: dict[str, float] = field(default_factory=dict)
    fields: dict[float, Field] | None = None
    rho: Field | None = None

    def values(self, quantity: str) -> tuple[np.ndarray, np.ndarray]:
        lams = np.array([r.lam for r in self.rows if r.quantity == quantity])
        vals = np.array([r.value for r in self.rows if r.quantity == quantity])
        return lams, vals


def _quantity_value(
    quantity: str, p: Field, rho: Field | None, sweep: SweepSpec
) -> float:
    if quantity == "interior_l2q0":
        return l2(p, Region.INNER_BALL)
    if quantity == "interior_supt_l2":
        return sup_t_l2(p, Region.INNER_BALL)
    if quantity == "trace_l2sigma0":
        return l2(lateral_trace(p), Region.LATERAL_BOUNDARY)
    if quantity == "exterior_error_l2q1":
        return l2(restrict_outer(p) - rho, Region.ANNULUS)
    if quantity == "frac_interior":
        return hrs_surrogate(restrict_inner(p), *sweep.eps_orders, Region.INNER_BALL)
    if quantity == "frac_exterior":
        return hrs_surrogate(restrict_outer(p) - rho, *sweep.delta_orders, Region.ANNULUS)
    raise ValueError(f"unknown quantity {quantity!r}")


def run_sweep(
    base: ProblemSpec,
    grid: SpaceTimeGrid,
    sweep: SweepSpec,
    keep_fields: bool = False,
    progress=None,
) -> SweepResult:
    """Solve the Doi model for every lambda and tabulate the quantities.

    ``base.lam`` is ignored; everything else (geometry, kappa, datum,
    scheme) is shared across the ladder.  The companion Smoluchowski
    solution is computed once.  For difference-type quantities in m = 3,
    the discretization floor ||rho_h - series||_{L2(Q1)} is recorded so
    fits can drop saturated points.  ``progress``, if given, is called
    with (index, lam) before each solve (stderr reporting in the CLI).
    """
    needs_rho = any(q in _NEEDS_RHO for q in sweep.quantities)
    rho = None
    floors: dict[str, float] = {}
    if needs_rho:
        rho = solve_smoluchowski(base, grid)
        if grid.domain.m == 3:
            series = series_solution(base.g, grid, base.kappa)
            floor = l2(rho - series, Region.ANNULUS)
            for q in _NEEDS_RHO:
                if q in sweep.quantities:
                    floors[q] = floor

    rows: list[SweepRow] = []
    fields: dict[float, Field] = {}
    for i, lam in enumerate(sweep.lambdas):
        if progress is not None:
            progress(i, lam)
        p = solve_doi(base.with_(lam=lam), grid)
        if keep_fields:
            fields[lam] = p
        for q in sweep.quantities:
            rows.append(
                SweepRow(
                    lam=float(lam),
                    quantity=q,
                    value=float(_quantity_value(q, p, rho, sweep)),
                    grid_h=grid.h,
                    grid_dt=grid.dt,
                )
            )
    return SweepResult(
        sweep=sweep,
        rows=rows,
        grid_h=grid.h,
        grid_dt=grid.dt,
        floors=floors,
        fields=fields if keep_fields else None,
        rho=rho if keep_fields else None,
    )


@dataclass(frozen=True)
class RateFit:
    """Least-squares log-log fit value ~ C * lambda^slope plus the bound
    margin max(value * lambda^claimed) for the one-sided claim."""

    slope: float
    intercept: float
    r_squared: float
    bound_margin: float


def fit_rate(
    lambdas: np.ndarray, values: np.ndarray, claimed: float
) -> RateFit:
    """Fit a decay rate through (lambda, value) pairs in log-log space."""
    lambdas = np.asarray(lambdas, dtype=float)
    values = np.asarray(values, dtype=float)
    if lambdas.size != values.size:
        raise ValueError("lambdas and values must align")
    if lambdas.size < 4:
        raise DegenerateSweepError(
            f"rate fit needs at least 4 points, got {lambdas.size}"
        )
    if np.any(values <= 0.0) or not np.all(np.isfinite(values)):
        raise DegenerateSweepError(
            "rate fit needs strictly positive finite values (zero data or a "
            "degenerate quantity cannot carry a log-log fit)"
        )
    x = np.log(lambdas)
    y = np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    yhat = slope * x + intercept
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    margin = float(np.max(values * lambdas ** claimed))
    return RateFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=float(r2),
        bound_margin=margin,
    )


@dataclass(frozen=True)
class ClaimCheck:
    quantity: str
    claimed: float
    fit: RateFit
    margins_top_half: tuple[float, ...]
    margin_nonincreasing: bool
    n_dropped: int
    passed: bool


def check_claims(
    result: SweepResult,
    slope_tolerance: float = 0.05,
    margin_slack: float = 0.02,
) -> list[ClaimCheck]:
    """One-sided verdicts for every quantity in a sweep result.

    A claim passes if the fitted slope is at most -claimed + tolerance, or
    if the margins value * lambda^claimed are finite and non-increasing
    (within ``margin_slack`` relative) over the top half of the retained
    ladder.  Points below 3x the quantity's discretization floor are
    dropped first; a fit needs at least 4 surviving points.
    """
    out = []
    for q in result.sweep.quantities:
        lams, vals = result.values(q)
        floor = result.floors.get(q, 0.0)
        keep = vals >= 3.0 * floor
        n_dropped = int(np.sum(~keep))
        lams_k, vals_k = lams[keep], vals[keep]
        claimed = claimed_exponent(q, result.sweep)
        fit = fit_rate(lams_k, vals_k, claimed)
        margins = vals_k * lams_k ** claimed
        top = margins[margins.size // 2 :]
        noninc = bool(
            np.all(np.isfinite(top))
            and np.all(top[1:] <= top[:-1] * (1.0 + margin_slack))
        )
        passed = (fit.slope <= -claimed + slope_tolerance) or noninc
        out.append(
            ClaimCheck(
                quantity=q,
                claimed=claimed,
                fit=fit,
                margins_top_half=tuple(float(m) for m in top),
                margin_nonincreasing=noninc,
                n_dropped=n_dropped,
                passed=passed,
            )
        )
    return out
