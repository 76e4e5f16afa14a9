"""Recovering u(t) from the extended state and the probabilities that go with it."""

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from decorators import complex_arrays_decorator
from errors import (
    DegenerateStateError,
    DimensionError,
    ParameterError,
    PreconditionError,
)
from schrod_engine import PGrid, SchrodState, to_physical

type ComplexVector = NDArray[np.complex128]
type RealVector = NDArray[np.float64]

logger = logging.getLogger(__name__)

P_STAR_MARGIN = 5
GRID_SNAP = 1e-9


@dataclass(frozen=True)
class RecoveryReport:
    u_restored: ComplexVector
    p_star: float
    probability: float
    g0: float
    g_plus: float
    g_c: float
    lambda_plus: float


def _grid_index(grid: PGrid, p: float) -> int:
    return round((p - grid.L) / grid.dp)


def _samples(state: SchrodState) -> NDArray[np.complex128]:
    return to_physical(state).data


def recovery_threshold(lambda_plus: float, t: float) -> float:
    return max(lambda_plus * t, 0.0)


def default_p_star(
    grid: PGrid, lambda_plus: float, t: float, margin: int = P_STAR_MARGIN
) -> float:
    """Smallest grid point at least ``margin`` spacings above the threshold."""
    target = recovery_threshold(lambda_plus, t) + margin * grid.dp
    k = math.ceil((target - grid.L) / grid.dp - GRID_SNAP)
    if k >= grid.Np:
        raise ParameterError(
            f"p domain ends at {grid.R}, recovery needs points beyond {target}"
        )
    return float(grid.points[k])


def restore_at(state: SchrodState, grid: PGrid, p: float) -> ComplexVector:
    """e^{p_k}·v(t, p_k) at the grid point nearest p, without threshold checks."""
    k = min(max(_grid_index(grid, p), 0), grid.Np - 1)
    return np.exp(grid.points[k]) * _samples(state)[:, k]


def restore_pointwise(
    state: SchrodState,
    grid: PGrid,
    lambda_plus: float,
    p_star: float,
    window: int = 1,
) -> ComplexVector:
    """Restore u(t) = e^{p*}·v(t, p*), optionally averaged over ``window`` points.

    Raises:
        PreconditionError: if p_star sits below λ₊t + Δp.
        ParameterError: if p_star is off the grid or the window leaves it.
    """
    threshold = recovery_threshold(lambda_plus, state.time)
    if p_star < threshold + grid.dp * (1 - GRID_SNAP):
        raise PreconditionError(
            f"p_star {p_star} below recovery threshold lambda_plus*t = {threshold}"
            f" plus dp = {grid.dp}"
        )
    k = _grid_index(grid, p_star)
    if not 0 <= k < grid.Np or abs(grid.points[k] - p_star) > GRID_SNAP * grid.dp:
        raise ParameterError(f"p_star {p_star} is not a grid point")
    if window < 1 or k + window > grid.Np:
        raise ParameterError(f"window {window} does not fit above p_star {p_star}")
    if p_star < threshold + P_STAR_MARGIN * grid.dp * (1 - GRID_SNAP):
        logger.warning(
            "restoring at p_star %s, closer than %d spacings to threshold %s",
            p_star,
            P_STAR_MARGIN,
            threshold,
        )

    indices = slice(k, k + window)
    amplification = np.exp(grid.points[indices])[np.newaxis, :]
    weighted = amplification * _samples(state)[:, indices]
    return weighted.mean(axis=1)


def projection_probability(state: SchrodState, grid: PGrid, threshold: float) -> float:
    if not grid.L <= threshold <= grid.R:
        raise ParameterError(f"threshold {threshold} outside [{grid.L}, {grid.R}]")
    weights = np.sum(np.abs(_samples(state)) ** 2, axis=0)
    total = float(weights.sum())
    if total == 0:
        raise DegenerateStateError("extended state has zero norm")
    kept = grid.points >= threshold - GRID_SNAP * grid.dp
    return float(weights[kept].sum()) / total


def threshold_probability(state: SchrodState, grid: PGrid, lambda_plus: float) -> float:
    """Probability of landing in the valid region p ≥ max(λ₊t, 0)."""
    return projection_probability(
        state, grid, recovery_threshold(lambda_plus, state.time)
    )


@complex_arrays_decorator
def probability_formula(
    u0: ComplexVector, ut: ComplexVector, lambda_plus: float = 0.0, t: float = 0.0
) -> float:
    """Closed form ½(‖e^{-λ₊t}u(t)‖/‖u0‖)² of the threshold probability."""
    initial = float(np.linalg.norm(u0))
    if initial == 0:
        raise DegenerateStateError("initial state has zero norm")
    return 0.5 * (math.exp(-lambda_plus * t) * float(np.linalg.norm(ut)) / initial) ** 2


def _growth_factor(
    u0: ComplexVector, uT: ComplexVector, rate: float, T: float
) -> float:
    scaled_final = float(np.linalg.norm(np.exp(-rate * T) * uT))
    return 2 * (float(np.linalg.norm(u0)) / scaled_final) ** 2


@complex_arrays_decorator
def complexity_factors(
    u0: ComplexVector, uT: ComplexVector, lambda_plus: float, c: float, T: float
) -> tuple[float, float, float]:
    """g0, g₊ and g_c; g_c is g₊ with the shift c in place of λ₊."""
    if float(np.linalg.norm(uT)) == 0:
        raise DegenerateStateError("final state has zero norm")
    return (
        _growth_factor(u0, uT, 0.0, T),
        _growth_factor(u0, uT, lambda_plus, T),
        _growth_factor(u0, uT, c, T),
    )


def observable_quadrature(
    f_tilde: ComplexVector, V: RealVector, sigma: float, weights: RealVector
) -> float:
    """∫|f|² dx from transformed samples f̃ = e^{V/(2σ)}f with scaled weights."""
    f_tilde, V, weights = np.asarray(f_tilde), np.asarray(V), np.asarray(weights)
    if not f_tilde.shape == V.shape == weights.shape:
        raise DimensionError(
            f"shapes differ: {f_tilde.shape}, {V.shape}, {weights.shape}"
        )
    if np.any(weights < 0):
        raise ParameterError("quadrature weights must be non-negative")
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    scaled = np.exp(-V / sigma) * weights
    return float(np.sum(scaled * np.abs(f_tilde) ** 2))


def recovery_report(
    state: SchrodState,
    grid: PGrid,
    u0: ComplexVector,
    lambda_plus: float,
    c: float | None = None,
    p_star: float | None = None,
    window: int = 1,
) -> RecoveryReport:
    if p_star is None:
        p_star = default_p_star(grid, lambda_plus, state.time)
    u_restored = restore_pointwise(state, grid, lambda_plus, p_star, window)
    g0, g_plus, g_c = complexity_factors(
        u0, u_restored, lambda_plus, lambda_plus if c is None else c, state.time
    )
    return RecoveryReport(
        u_restored=u_restored,
        p_star=p_star,
        probability=threshold_probability(state, grid, lambda_plus),
        g0=g0,
        g_plus=g_plus,
        g_c=g_c,
        lambda_plus=lambda_plus,
    )
