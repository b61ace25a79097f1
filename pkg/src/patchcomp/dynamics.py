"""Time integration of the two-species competition system and outcome calls.

Diffusion is implicit (one banded solve per species per step), the logistic
competition term explicit.  The induced step map is monotone for the
order "first species up, second species down", which is what the
order-preservation harness checks, and it leaves the jump-consistent
bounding boxes invariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import SimulationBlowUpError, ValidationError
from .grid import Grid, PiecewiseField
from .landscape import Landscape, PatchEnvironment, SpeciesTraits
from .operators import (
    SpeciesLayout,
    assemble_diffusion,
    consistent_constant,
    env_on_dofs,
    expand_reduced,
)
from .steady import SteadyConfig, solve_resident_steady

_DENSE_SOLVE_LIMIT = 2500

_SCHEMES = ("imex-euler", "cn-diffusion")


@dataclass(frozen=True)
class SimConfig:
    dt: float | None = None          # default: 0.01 / max growth rate
    t_max: float = 2000.0
    steady_tol: float = 1e-8
    extinction_eps: float | None = None   # default: 1e-6 * min capacity
    scheme: str = "imex-euler"
    check_interval: int = 100
    snapshot_stride: int | None = None

    def __post_init__(self):
        if self.dt is not None and self.dt <= 0:
            raise ValidationError("dt must be positive")
        if self.extinction_eps is not None and self.extinction_eps <= 0:
            raise ValidationError("extinction_eps must be positive")
        if self.scheme not in _SCHEMES:
            raise ValidationError(f"scheme must be one of {_SCHEMES}")
        if self.t_max <= 0:
            raise ValidationError("t_max must be positive")


@dataclass
class OutcomeRecord:
    verdict: str                      # ResidentWins | MutantWins | Coexistence | Undetermined
    u_final: PiecewiseField
    v_final: PiecewiseField
    t_final: float
    steps: int
    converged: bool
    diagnostics: dict = field(default_factory=dict)


class Stepper:
    """Prefactored IMEX / CN stepping for one parameter point."""

    def __init__(
        self,
        landscape: Landscape,
        env: PatchEnvironment,
        resident: SpeciesTraits,
        mutant: SpeciesTraits,
        grid: Grid,
        config: SimConfig | None = None,
    ):
        self.landscape = landscape
        self.env = env
        self.resident = resident
        self.mutant = mutant
        self.grid = grid
        self.config = config or SimConfig()
        self.op_u = assemble_diffusion(grid, resident)
        self.op_v = assemble_diffusion(grid, mutant)
        self.layout_u = SpeciesLayout(grid, resident)
        self.layout_v = SpeciesLayout(grid, mutant)
        self.r_full, self.k_full = env_on_dofs(grid, env)
        self.dt = self.config.dt if self.config.dt is not None else 0.01 / env.r_array.max()
        self._solvers: dict[float, tuple] = {}

    def _implicit_solvers(self, dt: float):
        """Prefactored solvers for (I - theta dt A) per species."""
        if dt not in self._solvers:
            theta = 0.5 if self.config.scheme == "cn-diffusion" else 1.0
            solvers = []
            for op in (self.op_u, self.op_v):
                if op.size <= _DENSE_SOLVE_LIMIT:
                    inv = np.linalg.inv(np.eye(op.size) - theta * dt * op.dense())
                    solvers.append(lambda rhs, inv=inv: inv @ rhs)
                else:
                    ab = -theta * dt * op.banded()
                    ab[1, :] += 1.0
                    solvers.append(lambda rhs, ab=ab: solve_banded((1, 1), ab, rhs))
            self._solvers[dt] = tuple(solvers)
        return self._solvers[dt]

    def reaction(self, u_red: np.ndarray, v_red: np.ndarray):
        """Explicit competition terms for both species, on reduced DOFs."""
        u_full = self.layout_u.expand(u_red)
        v_full = self.layout_v.expand(v_red)
        crowd = self.r_full * (1.0 - (u_full + v_full) / self.k_full)
        return (
            self.layout_u.restrict_avg(u_full * crowd),
            self.layout_v.restrict_avg(v_full * crowd),
        )

    def step(
        self, u_red: np.ndarray, v_red: np.ndarray, dt: float | None = None
    ) -> tuple[np.ndarray, np.ndarray, float]:
        """One time step; returns the new state and the clipped negative mass."""
        dt = self.dt if dt is None else dt
        solve_u, solve_v = self._implicit_solvers(dt)
        f_u, f_v = self.reaction(u_red, v_red)
        rhs_u = u_red + dt * f_u
        rhs_v = v_red + dt * f_v
        if self.config.scheme == "cn-diffusion":
            rhs_u += 0.5 * dt * self.op_u.matvec(u_red)
            rhs_v += 0.5 * dt * self.op_v.matvec(v_red)
        clipped = float(-np.minimum(rhs_u, 0.0).sum() - np.minimum(rhs_v, 0.0).sum())
        np.maximum(rhs_u, 0.0, out=rhs_u)
        np.maximum(rhs_v, 0.0, out=rhs_v)
        return solve_u(rhs_u), solve_v(rhs_v), clipped

    def steady_residuals(self, u_red: np.ndarray, v_red: np.ndarray) -> tuple[float, float]:
        f_u, f_v = self.reaction(u_red, v_red)
        res_u = self.op_u.matvec(u_red) + f_u
        res_v = self.op_v.matvec(v_red) + f_v
        return float(np.abs(res_u).max()), float(np.abs(res_v).max())


def default_initial(grid: Grid, env: PatchEnvironment) -> tuple[np.ndarray, np.ndarray]:
    """Half the capacity profile per patch, for both species (reduced DOFs)."""
    u0 = np.empty(grid.num_reduced)
    for i in range(grid.n):
        u0[grid.reduced_patch_slice(i)] = env.k[i] / 2.0
    return u0, u0.copy()


def bounding_level(grid: Grid, traits: SpeciesTraits, env: PatchEnvironment,
                   w_red: np.ndarray) -> float:
    """Smallest constant M with M * (jump-consistent profile) a super-solution
    dominating the given state."""
    c_red = consistent_constant(grid, traits)
    scales = traits.cumulative_scales()
    m_data = float((np.asarray(w_red) / c_red).max())
    m_super = float((env.k_array / scales).max())
    return max(m_data, m_super)


def simulate(
    landscape: Landscape,
    env: PatchEnvironment,
    resident: SpeciesTraits,
    mutant: SpeciesTraits,
    grid: Grid,
    config: SimConfig | None = None,
    initial: tuple[np.ndarray, np.ndarray] | None = None,
    steady_config: SteadyConfig | None = None,
) -> OutcomeRecord:
    """Integrate until the state stops moving or the horizon is hit, then classify."""
    config = config or SimConfig()
    stepper = Stepper(landscape, env, resident, mutant, grid, config)
    u, v = initial if initial is not None else default_initial(grid, env)
    u = np.asarray(u, dtype=float).copy()
    v = np.asarray(v, dtype=float).copy()
    if u.min() < 0 or v.min() < 0:
        raise ValidationError("initial data must be nonnegative")

    box_u = bounding_level(grid, resident, env, u) * consistent_constant(grid, resident)
    box_v = bounding_level(grid, mutant, env, v) * consistent_constant(grid, mutant)
    blow_up = 10.0 * max(box_u.max(), box_v.max())

    ustar = solve_resident_steady(landscape, env, resident, grid, steady_config)
    vstar = solve_resident_steady(landscape, env, mutant, grid, steady_config)

    dt = stepper.dt
    max_steps = int(np.ceil(config.t_max / dt))
    box_violations = 0
    clip_total = 0.0
    converged = False
    td_norm = np.inf
    snapshots: list[tuple[float, np.ndarray, np.ndarray]] = []
    step_count = 0

    for step_count in range(1, max_steps + 1):
        u_new, v_new, clipped = stepper.step(u, v, dt)
        clip_total += clipped
        td_norm = max(
            float(np.abs(u_new - u).max()), float(np.abs(v_new - v).max())
        ) / dt
        u, v = u_new, v_new

        if step_count % config.check_interval == 0 or step_count == max_steps:
            top = max(u.max(), v.max())
            if top > blow_up:
                raise SimulationBlowUpError(
                    f"state reached {top:.3g}, beyond the a-priori bound {blow_up:.3g}"
                )
            tol_box = 1e-12 * max(box_u.max(), box_v.max())
            if (u > box_u + tol_box).any() or (v > box_v + tol_box).any():
                box_violations += 1
        if config.snapshot_stride and step_count % config.snapshot_stride == 0:
            snapshots.append((step_count * dt, u.copy(), v.copy()))

        # a run only counts as resolved once the state both stops moving and
        # classifies; otherwise keep integrating toward the attractor
        if td_norm < config.steady_tol and step_count % 50 == 0:
            res_u, res_v = stepper.steady_residuals(u, v)
            if max(res_u, res_v) < config.steady_tol:
                verdict_now = classify_outcome(
                    PiecewiseField(grid, expand_reduced(grid, resident, u)),
                    PiecewiseField(grid, expand_reduced(grid, mutant, v)),
                    ustar,
                    vstar,
                    env,
                    config,
                    max(res_u, res_v),
                )
                if verdict_now != "Undetermined":
                    converged = True
                    break

    u_field = PiecewiseField(grid, expand_reduced(grid, resident, u))
    v_field = PiecewiseField(grid, expand_reduced(grid, mutant, v))
    res_u, res_v = stepper.steady_residuals(u, v)
    diagnostics = {
        "time_derivative_norm": td_norm,
        "steady_residual_u": res_u,
        "steady_residual_v": res_v,
        "clip_total": clip_total,
        "box_violations": box_violations,
        "dt": dt,
        "scheme": config.scheme,
        "extinction_eps": _extinction_eps(config, env),
        "steady_tol": config.steady_tol,
    }
    verdict = classify_outcome(
        u_field, v_field, ustar, vstar, env, config, max(res_u, res_v)
    )
    if verdict == "Coexistence":
        source = "default" if initial is None else "supplied"
        diagnostics["note"] = (
            f"state reached from the {source} initial data; other coexistence "
            "states may exist"
        )
    record = OutcomeRecord(
        verdict=verdict,
        u_final=u_field,
        v_final=v_field,
        t_final=step_count * dt,
        steps=step_count,
        converged=converged,
        diagnostics=diagnostics,
    )
    if snapshots:
        record.diagnostics["snapshots"] = snapshots
    return record


def _extinction_eps(config: SimConfig, env: PatchEnvironment) -> float:
    return (
        config.extinction_eps
        if config.extinction_eps is not None
        else 1e-6 * env.k_array.min()
    )


def classify_outcome(
    u_final: PiecewiseField,
    v_final: PiecewiseField,
    ustar: PiecewiseField,
    vstar: PiecewiseField,
    env: PatchEnvironment,
    config: SimConfig,
    steady_residual: float,
) -> str:
    """Map a final state to a verdict; near-miss states stay Undetermined."""
    eps = _extinction_eps(config, env)
    scale = env.k_array.max()
    close = 10.0 * config.steady_tol * scale
    if v_final.max() < eps and np.abs(u_final.values - ustar.values).max() < close:
        return "ResidentWins"
    if u_final.max() < eps and np.abs(v_final.values - vstar.values).max() < close:
        return "MutantWins"
    if (
        u_final.min() > eps
        and v_final.min() > eps
        and steady_residual < config.steady_tol
    ):
        return "Coexistence"
    return "Undetermined"


def order_preservation_check(
    state_a: tuple[np.ndarray, np.ndarray],
    state_b: tuple[np.ndarray, np.ndarray],
    stepper: Stepper,
    steps: int,
) -> tuple[bool, float, int | None]:
    """March two ordered states and watch for order violations.

    State A must start above state B in the competitive order (first species
    componentwise larger, second smaller).  Returns (preserved, worst
    violation, first violating step).
    """
    env = stepper.env
    tol = 1e-10 * env.k_array.max()
    ua, va = (np.asarray(w, dtype=float).copy() for w in state_a)
    ub, vb = (np.asarray(w, dtype=float).copy() for w in state_b)
    grid = stepper.grid

    def violation(ua, va, ub, vb) -> float:
        ua_f = expand_reduced(grid, stepper.resident, ua)
        ub_f = expand_reduced(grid, stepper.resident, ub)
        va_f = expand_reduced(grid, stepper.mutant, va)
        vb_f = expand_reduced(grid, stepper.mutant, vb)
        return max(float((ub_f - ua_f).max()), float((va_f - vb_f).max()))

    start = violation(ua, va, ub, vb)
    if start > tol:
        raise ValidationError("states are not ordered at t = 0")

    worst = 0.0
    first: int | None = None
    for s in range(1, steps + 1):
        ua, va, _ = stepper.step(ua, va)
        ub, vb, _ = stepper.step(ub, vb)
        gap = violation(ua, va, ub, vb)
        if gap > worst:
            worst = gap
        if gap > tol and first is None:
            first = s
    return first is None, worst, first


def pair_steady_residual(
    landscape: Landscape,
    env: PatchEnvironment,
    resident: SpeciesTraits,
    mutant: SpeciesTraits,
    grid: Grid,
    u: PiecewiseField,
    v: PiecewiseField,
) -> float:
    """Sup-norm residual of the coupled steady system at a given pair."""
    from .operators import restrict_values

    stepper = Stepper(landscape, env, resident, mutant, grid)
    res_u, res_v = stepper.steady_residuals(
        restrict_values(grid, u.values), restrict_values(grid, v.values)
    )
    return max(res_u, res_v)
