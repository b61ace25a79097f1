"""Assembly of the per-species diffusion operator with interface jump conditions.

The operator acts on the reduced DOF vector (right traces eliminated through
``value(x+) = p * value(x-)``).  Interior rows are plain central differences.
Each interface row balances the one-sided fluxes over the dual cell around the
interface; this closure is the two-point one-sided flux difference corrected
through the equation itself, which keeps it second order and makes the whole
matrix exactly symmetric under the weighted inner product whose weights are
the per-patch reciprocal jump products times the local quadrature weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import ValidationError
from .grid import Grid, PiecewiseField
from .landscape import PatchEnvironment, SpeciesTraits


def _check_traits(grid: Grid, traits: SpeciesTraits) -> None:
    if traits.n != grid.n:
        raise ValidationError("traits are dimensioned for a different landscape")


def env_on_dofs(grid: Grid, env: PatchEnvironment) -> tuple[np.ndarray, np.ndarray]:
    """Per-DOF growth rate and carrying capacity (constant within each patch)."""
    if env.n != grid.n:
        raise ValidationError("environment does not match the grid's landscape")
    patch_of = grid.patch_index_of_dofs()
    return env.r_array[patch_of], env.k_array[patch_of]


def full_mass(grid: Grid, traits: SpeciesTraits) -> np.ndarray:
    """Weighted trapezoid mass per full DOF: (1 / prod of jump ratios) * quad weight."""
    _check_traits(grid, traits)
    omega = 1.0 / traits.cumulative_scales()
    mass = np.empty(grid.num_dofs)
    for i in range(grid.n):
        h = grid.spacing(i)
        sl = grid.patch_slice(i)
        mass[sl] = omega[i] * h
        mass[sl.start] = omega[i] * h / 2.0
        mass[sl.stop - 1] = omega[i] * h / 2.0
    return mass


def reduced_weights(grid: Grid, traits: SpeciesTraits) -> np.ndarray:
    """Symmetrization weights on the reduced DOFs (eliminated mass folded in)."""
    mass = full_mass(grid, traits)
    p = traits.p_array
    w = mass[grid.kept_indices()]
    for m in range(grid.n - 1):
        w[grid.reduced_trace_index(m)] += p[m] ** 2 * mass[grid.right_trace_index(m)]
    return w


def expand_reduced(grid: Grid, traits: SpeciesTraits, reduced: np.ndarray) -> np.ndarray:
    """Scatter a reduced vector to the full DOF layout (right traces filled in)."""
    _check_traits(grid, traits)
    reduced = np.asarray(reduced, dtype=float)
    if reduced.shape != (grid.num_reduced,):
        raise ValidationError("reduced vector has the wrong length")
    full = np.empty(grid.num_dofs)
    full[grid.kept_indices()] = reduced
    p = traits.p_array
    for m in range(grid.n - 1):
        full[grid.right_trace_index(m)] = p[m] * reduced[grid.reduced_trace_index(m)]
    return full


def restrict_values(grid: Grid, full: np.ndarray) -> np.ndarray:
    """Keep the reduced DOFs of a full vector (left-trace convention)."""
    full = np.asarray(full, dtype=float)
    return full[grid.kept_indices()].copy()


def _restrict_weighted(
    grid: Grid, traits: SpeciesTraits, full_values: np.ndarray, trace_power: int
) -> np.ndarray:
    mass = full_mass(grid, traits)
    weights = reduced_weights(grid, traits)
    p = traits.p_array
    num = mass * np.asarray(full_values, dtype=float)
    red = num[grid.kept_indices()]
    for m in range(grid.n - 1):
        red[grid.reduced_trace_index(m)] += p[m] ** trace_power * num[grid.right_trace_index(m)]
    return red / weights


def restrict_cell_average(grid: Grid, traits: SpeciesTraits, full_values) -> np.ndarray:
    """Mass-weighted restriction for residual-type quantities (reaction terms)."""
    return _restrict_weighted(grid, traits, full_values, trace_power=1)


def restrict_diagonal(grid: Grid, traits: SpeciesTraits, full_values) -> np.ndarray:
    """Mass-weighted restriction for multiplicative coefficients (potentials)."""
    return _restrict_weighted(grid, traits, full_values, trace_power=2)


def consistent_constant(grid: Grid, traits: SpeciesTraits, amplitude: float = 1.0) -> np.ndarray:
    """Reduced vector of the jump-consistent piecewise-constant field."""
    _check_traits(grid, traits)
    scales = traits.cumulative_scales()
    out = np.empty(grid.num_reduced)
    for i in range(grid.n):
        # the patch slice ends at its own left trace, which carries this scale
        out[grid.reduced_patch_slice(i)] = amplitude * scales[i]
    return out


@dataclass
class LinearOperator:
    """Tridiagonal operator over reduced DOFs plus its symmetrization weights."""

    grid: Grid
    traits: SpeciesTraits
    lo: np.ndarray
    di: np.ndarray
    up: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.di.size

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = self.di * x
        y[:-1] += self.up[:-1] * x[1:]
        y[1:] += self.lo[1:] * x[:-1]
        return y

    def add_diagonal(self, diag) -> "LinearOperator":
        return LinearOperator(
            self.grid, self.traits, self.lo.copy(), self.di + diag, self.up.copy(),
            self.weights.copy(),
        )

    def banded(self) -> np.ndarray:
        """(3, N) banded storage for scipy.linalg.solve_banded with (1, 1)."""
        ab = np.zeros((3, self.size))
        ab[0, 1:] = self.up[:-1]
        ab[1, :] = self.di
        ab[2, :-1] = self.lo[1:]
        return ab

    def solve_shifted(self, sigma: float, rhs: np.ndarray) -> np.ndarray:
        """Solve (sigma * I - A) x = rhs."""
        ab = -self.banded()
        ab[1, :] += sigma
        return solve_banded((1, 1), ab, rhs)

    def dense(self) -> np.ndarray:
        a = np.diag(self.di)
        a += np.diag(self.up[:-1], k=1)
        a += np.diag(self.lo[1:], k=-1)
        return a

    def symmetrized_bands(self) -> tuple[np.ndarray, np.ndarray]:
        """Diagonal and off-diagonal of the weight-similarity transformed matrix."""
        ratio = np.sqrt(self.weights[:-1] / self.weights[1:])
        return self.di.copy(), ratio * self.up[:-1]

    def symmetry_defect(self) -> float:
        """Max relative asymmetry of the weighted matrix W A."""
        wu = self.weights[:-1] * self.up[:-1]
        wl = self.weights[1:] * self.lo[1:]
        scale = max(np.abs(self.weights * self.di).max(), np.abs(wu).max(), 1e-300)
        return float(np.abs(wu - wl).max() / scale)


def assemble_diffusion(grid: Grid, traits: SpeciesTraits) -> LinearOperator:
    """Per-species diffusion operator on the reduced DOFs.

    Built from the weighted stiffness of piecewise-linear elements with the
    right traces eliminated, then divided by the lumped weighted mass.  The
    jump-consistent piecewise constant spans its kernel and the weighted
    matrix is exactly symmetric.
    """
    _check_traits(grid, traits)
    scales = traits.cumulative_scales()
    omega = 1.0 / scales
    p = traits.p_array
    size = grid.num_reduced

    k_di = np.zeros(size)
    k_up = np.zeros(size)  # k_up[j] couples reduced DOFs j and j+1
    for i in range(grid.n):
        c = omega[i] * traits.d[i] / grid.spacing(i)
        start = 0 if i == 0 else grid.reduced_trace_index(i - 1)
        count = grid.counts[i]
        rho = 1.0 if i == 0 else p[i - 1]
        k_di[start] += rho * rho * c
        k_di[start + 1 : start + count] += 2.0 * c
        k_di[start + count] += c
        k_up[start] += -rho * c
        k_up[start + 1 : start + count] += -c

    weights = reduced_weights(grid, traits)
    di = -k_di / weights
    up = np.zeros(size)
    lo = np.zeros(size)
    up[:-1] = -k_up[:-1] / weights[:-1]
    lo[1:] = -k_up[:-1] / weights[1:]
    return LinearOperator(grid, traits, lo, di, up, weights)


def apply_to_field(op: LinearOperator, field: PiecewiseField) -> np.ndarray:
    """Apply the reduced operator to a full field (taken by its left traces)."""
    return op.matvec(restrict_values(op.grid, field.values))


class SpeciesLayout:
    """Cached index maps and masses for one species on one grid.

    The expansion / restriction helpers above rebuild their index arrays on
    every call; inner time-stepping loops go through this cache instead.
    """

    def __init__(self, grid: Grid, traits: SpeciesTraits):
        _check_traits(grid, traits)
        self.grid = grid
        self.traits = traits
        self.kept = grid.kept_indices()
        self.right = np.array(
            [grid.right_trace_index(m) for m in range(grid.n - 1)], dtype=int
        )
        self.trace = np.array(
            [grid.reduced_trace_index(m) for m in range(grid.n - 1)], dtype=int
        )
        self.p = traits.p_array
        self.mass = full_mass(grid, traits)
        self.weights = reduced_weights(grid, traits)

    def expand(self, reduced: np.ndarray) -> np.ndarray:
        full = np.empty(self.grid.num_dofs)
        full[self.kept] = reduced
        if self.right.size:
            full[self.right] = self.p * reduced[self.trace]
        return full

    def restrict_avg(self, full_values: np.ndarray) -> np.ndarray:
        num = self.mass * full_values
        red = num[self.kept]
        if self.right.size:
            red[self.trace] += self.p * num[self.right]
        return red / self.weights
