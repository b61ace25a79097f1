"""Single-species steady state: damped Newton with a time-march fallback.

The steady state is the unique positive equilibrium of logistic growth plus
diffusion under the species' interface conditions.  Newton runs on the reduced
DOFs with a tridiagonal Jacobian; if it stalls, an implicit-diffusion time
march pulls the iterate into the basin and Newton polishes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import SteadyConvergenceError
from .grid import Grid, PiecewiseField, patch_derivative
from .landscape import (
    PatchEnvironment,
    SpeciesTraits,
    ifd_strategy,
    strict_dominates,
)
from .operators import (
    LinearOperator,
    assemble_diffusion,
    env_on_dofs,
    expand_reduced,
    restrict_cell_average,
    restrict_diagonal,
)


@dataclass(frozen=True)
class SteadyConfig:
    newton_tol: float = 1e-10
    max_newton_iters: int = 50
    min_step: float = 1e-4
    armijo: float = 1e-4
    fallback_dt: float = 0.1
    fallback_horizon: float = 2000.0

    def __post_init__(self):
        if self.newton_tol <= 0:
            raise ValueError("newton_tol must be positive")
        if self.max_newton_iters < 1:
            raise ValueError("max_newton_iters must be at least 1")


def _residual_and_slope(
    op: LinearOperator,
    grid: Grid,
    traits: SpeciesTraits,
    r_full: np.ndarray,
    k_full: np.ndarray,
    u_red: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    u_full = expand_reduced(grid, traits, u_red)
    f = r_full * u_full * (1.0 - u_full / k_full)
    fp = r_full * (1.0 - 2.0 * u_full / k_full)
    res = op.matvec(u_red) + restrict_cell_average(grid, traits, f)
    slope = restrict_diagonal(grid, traits, fp)
    return res, slope


def _noise_floor(op: LinearOperator, k_full: np.ndarray, u: np.ndarray) -> float:
    """Rounding level of one residual evaluation; the scaled tolerance adds this."""
    row_scale = float((np.abs(op.di) + np.abs(op.lo) + np.abs(op.up)).max())
    return 8.0 * np.finfo(float).eps * row_scale * max(float(np.abs(u).max()), k_full.max())


def _newton(op, grid, traits, r_full, k_full, u0, config: SteadyConfig):
    floor = 1e-12 * k_full.min()
    u = np.maximum(np.asarray(u0, dtype=float).copy(), floor)
    res, slope = _residual_and_slope(op, grid, traits, r_full, k_full, u)
    for _ in range(config.max_newton_iters):
        norm = float(np.abs(res).max())
        if norm <= config.newton_tol + _noise_floor(op, k_full, u):
            return u, norm
        ab = op.banded()
        ab[1, :] += slope
        step = solve_banded((1, 1), ab, -res)
        alpha = 1.0
        while True:
            trial = np.maximum(u + alpha * step, floor)
            trial_res, trial_slope = _residual_and_slope(
                op, grid, traits, r_full, k_full, trial
            )
            if np.abs(trial_res).max() <= (1.0 - config.armijo * alpha) * norm:
                u, res, slope = trial, trial_res, trial_slope
                break
            alpha *= 0.5
            if alpha < config.min_step:
                return u, norm  # stalled; caller decides on fallback
    return u, float(np.abs(res).max())


def solve_resident_steady(
    landscape,
    env: PatchEnvironment,
    traits: SpeciesTraits,
    grid: Grid,
    config: SteadyConfig | None = None,
    initial: np.ndarray | None = None,
) -> PiecewiseField:
    """Positive steady state of the single-species problem on this grid.

    Deterministic: starts from the per-patch capacity profile unless an
    explicit reduced initial guess is given.
    """
    config = config or SteadyConfig()
    op = assemble_diffusion(grid, traits)
    r_full, k_full = env_on_dofs(grid, env)

    if initial is None:
        u0 = np.empty(grid.num_reduced)
        for i in range(grid.n):
            u0[grid.reduced_patch_slice(i)] = env.k[i]
    else:
        u0 = np.asarray(initial, dtype=float)

    u, norm = _newton(op, grid, traits, r_full, k_full, u0, config)
    if norm > config.newton_tol + _noise_floor(op, k_full, u):
        # implicit-diffusion march toward the attracting steady state
        dt = config.fallback_dt
        ab = op.banded()
        march = np.zeros_like(ab)
        march[1, :] = 1.0
        march -= dt * ab
        steps = int(np.ceil(config.fallback_horizon / dt))
        for step in range(1, steps + 1):
            u_full = expand_reduced(grid, traits, u)
            f = r_full * u_full * (1.0 - u_full / k_full)
            rhs = u + dt * restrict_cell_average(grid, traits, f)
            u = np.maximum(solve_banded((1, 1), march, rhs), 1e-12 * k_full.min())
            if step % 20 == 0:
                res, _ = _residual_and_slope(op, grid, traits, r_full, k_full, u)
                if np.abs(res).max() < 1e-4:
                    break
        u, norm = _newton(op, grid, traits, r_full, k_full, u, config)
        if norm > config.newton_tol + _noise_floor(op, k_full, u):
            raise SteadyConvergenceError(
                "steady solve failed after Newton and time-march fallback",
                residual=norm,
            )
    if u.min() <= 0:
        raise SteadyConvergenceError("steady state lost positivity", residual=norm)
    return PiecewiseField(grid, expand_reduced(grid, traits, u))


_FLAT_FACTOR = 1e-8


@dataclass(frozen=True)
class MonotonicityReport:
    """Per-patch derivative structure of a steady state."""

    patch_signs: tuple[str, ...]             # "decreasing" | "increasing" | "flat" | "mixed"
    boundary_left: str                        # value at 0 vs k_1: "below" | "above" | "equal"
    boundary_right: str                       # value at L vs k_n
    interface_derivatives: tuple[tuple[float, float], ...]  # (left trace, right trace)
    crossovers: tuple[tuple[int, float], ...]  # (patch, x) sign changes inside patches
    expected_pattern: str | None              # theory-backed expectation, if any
    tolerance: float

    @property
    def monotone(self) -> bool:
        kinds = set(self.patch_signs)
        return kinds == {"decreasing"} or kinds == {"increasing"}


def _compare(value: float, ref: float, tol: float) -> str:
    if value < ref - tol:
        return "below"
    if value > ref + tol:
        return "above"
    return "equal"


def monotonicity_report(
    ustar: PiecewiseField, env: PatchEnvironment, traits: SpeciesTraits
) -> MonotonicityReport:
    """Classify the steady state's slope patch by patch.

    Derivatives below ``1e-8 * max k`` in magnitude count as flat rather than
    being assigned a sign; the supporting theory only speaks about strict
    monotonicity.
    """
    grid = ustar.grid
    tol = _FLAT_FACTOR * env.k_array.max()
    signs: list[str] = []
    crossovers: list[tuple[int, float]] = []
    interface_derivs: list[tuple[float, float]] = []

    derivs = []
    for i in range(grid.n):
        dv = patch_derivative(ustar.patch_values(i), grid.spacing(i))
        derivs.append(dv)
        # the outer ends carry a forced-zero derivative (no flux); the strict
        # statements concern the open patch and the interface traces only
        lo = 1 if i == 0 else 0
        hi = dv.size - 1 if i == grid.n - 1 else dv.size
        inner = dv[lo:hi]
        if np.all(inner < -tol):
            signs.append("decreasing")
        elif np.all(inner > tol):
            signs.append("increasing")
        elif np.all(np.abs(inner) <= tol):
            signs.append("flat")
        else:
            signs.append("mixed")
            nodes = grid.patch_nodes(i)[lo:hi]
            signed = np.where(inner > tol, 1, np.where(inner < -tol, -1, 0))
            nz = np.flatnonzero(signed)
            for a, b in zip(nz[:-1], nz[1:]):
                if signed[a] != signed[b]:
                    crossovers.append((i, float(0.5 * (nodes[a] + nodes[b]))))

    for m in range(grid.n - 1):
        interface_derivs.append((float(derivs[m][-1]), float(derivs[m + 1][0])))

    expected = None
    if grid.n >= 2:
        kbar = ifd_strategy(env)
        p = traits.jump
        if strict_dominates(p, kbar):
            expected = "decreasing"
        elif strict_dominates(kbar, p):
            expected = "increasing"

    return MonotonicityReport(
        patch_signs=tuple(signs),
        boundary_left=_compare(float(ustar.values[0]), env.k[0], tol),
        boundary_right=_compare(float(ustar.values[-1]), env.k[-1], tol),
        interface_derivatives=tuple(interface_derivs),
        crossovers=tuple(crossovers),
        expected_pattern=expected,
        tolerance=tol,
    )
