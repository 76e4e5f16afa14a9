"""Warped phase transformation and unitary evolution of the extended state.

The extended state carries one p-profile per system component. Along p it is
held either as grid samples (physical) or as orthonormal Fourier coefficients
ordered by mode μ_l, l = -Np/2 … Np/2-1. Evolution is mode by mode: each
Fourier mode is an independent n×n unitary problem.
"""

import logging
import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
import scipy.fft
from numpy.typing import NDArray

import profiles
from errors import DimensionError, ParameterError, ResourceError
from linear_core import SPLIT_TOL, HermitianSplit, spectral_data, tolerance
from plugins import thread_count

type ComplexArray = NDArray[np.complex128]
type RealVector = NDArray[np.float64]
type AlphaProfile = Callable[[RealVector], RealVector]
type Stepper = Callable[[SchrodState], SchrodState]

logger = logging.getLogger(__name__)

DEFAULT_MEMORY_BUDGET_MB = 512.0
ORACLE_SPLIT_STEPS = 32
COMPLEX_BYTES = 16

Representation = Enum("Representation", ["PHYSICAL_P", "FOURIER_P"])
XBasis = Enum("XBasis", ["PHYSICAL_X", "FOURIER_X"])


@dataclass(frozen=True)
class PGrid:
    L: float
    R: float
    Np: int
    dp: float
    points: RealVector
    modes: RealVector


@dataclass(frozen=True)
class SchrodState:
    data: ComplexArray
    representation: Representation
    time: float
    grid: PGrid
    x_basis: XBasis = XBasis.PHYSICAL_X

    @property
    def n(self) -> int:
        return int(self.data.shape[0])

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))


def p_grid(L: float, R: float, Np: int) -> PGrid:
    if not L < 0 < R:
        raise ParameterError(f"p domain must satisfy L < 0 < R, got [{L}, {R}]")
    if Np <= 0 or Np % 2:
        raise ParameterError(f"Np must be even and positive, got {Np}")
    dp = (R - L) / Np
    points = L + dp * np.arange(Np, dtype=np.float64)
    modes = 2 * np.pi / (R - L) * np.arange(-Np // 2, Np // 2, dtype=np.float64)
    points.setflags(write=False)
    modes.setflags(write=False)
    return PGrid(L=float(L), R=float(R), Np=Np, dp=dp, points=points, modes=modes)


def choose_domain(
    lambda_min: float, lambda_plus: float, T: float, L0: float, tail_tol: float
) -> tuple[float, float]:
    """Pick [L, R] wide enough for the left- and right-moving waves up to T.

    L is rounded down and R up to integers, then R is padded so that R - L is a
    power of two. Any power-of-two Np then places p = 0 and every integer on the
    grid once Δp ≤ 1.
    """
    if not 0 < tail_tol < 1:
        raise ParameterError(f"tail_tol must lie in (0, 1), got {tail_tol}")
    if T < 0:
        raise ParameterError(f"T must be non-negative, got {T}")
    if L0 >= 0:
        raise ParameterError(f"L0 must be negative, got {L0}")
    if lambda_plus < 0:
        raise ParameterError(f"lambda_plus must be non-negative, got {lambda_plus}")

    L = math.floor(L0 - abs(lambda_min) * T)
    R = math.ceil(max(-math.log(tail_tol), lambda_plus * T))
    span = R - L
    padded = 1 << (span - 1).bit_length()
    logger.debug("p domain [%d, %d] padded to span %d", L, R, padded)
    return float(L), float(R + padded - span)


def to_fourier(state: SchrodState) -> SchrodState:
    if state.representation is Representation.FOURIER_P:
        return state
    coefficients = scipy.fft.fftshift(
        scipy.fft.fft(state.data, axis=-1, norm="ortho"), axes=-1
    )
    return replace(
        state, data=np.asarray(coefficients), representation=Representation.FOURIER_P
    )


def to_physical(state: SchrodState) -> SchrodState:
    if state.representation is Representation.PHYSICAL_P:
        return state
    samples = scipy.fft.ifft(
        scipy.fft.ifftshift(state.data, axes=-1), axis=-1, norm="ortho"
    )
    return replace(
        state, data=np.asarray(samples), representation=Representation.PHYSICAL_P
    )


def unit_alpha(p: RealVector) -> RealVector:
    return np.ones_like(p)


def steep_alpha(slope: float) -> AlphaProfile:
    """Profile with α = slope on p < 0, so the left tail decays faster."""

    def alpha(p: RealVector) -> RealVector:
        return np.where(p < 0, slope, 1.0)

    return alpha


def warp_initial(
    u0: ComplexArray, grid: PGrid, alpha: AlphaProfile = unit_alpha
) -> SchrodState:
    u0 = np.asarray(u0, dtype=np.complex128)
    exponents = np.asarray(alpha(grid.points), dtype=np.float64)
    if np.any(exponents < 0):
        raise ParameterError("alpha must be non-negative on the whole p domain")
    if not np.allclose(exponents[grid.points >= 0], 1.0):
        raise ParameterError("alpha must equal 1 for p >= 0")
    profile = np.exp(-exponents * np.abs(grid.points))
    return SchrodState(
        data=u0[:, np.newaxis] * profile[np.newaxis, :],
        representation=Representation.PHYSICAL_P,
        time=0.0,
        grid=grid,
    )


def _check_budget(n_bytes: float, memory_budget_mb: float, what: str) -> None:
    if n_bytes > memory_budget_mb * 2**20:
        raise ResourceError(
            f"{what} needs {n_bytes / 2**20:.1f} MiB, budget {memory_budget_mb} MiB"
        )


def assemble_hamiltonian(
    split: HermitianSplit,
    grid: PGrid,
    memory_budget_mb: float = DEFAULT_MEMORY_BUDGET_MB,
) -> ComplexArray:
    """H = H1 ⊗ D_μ - H2 ⊗ I, rows indexed by (i, l) with l fastest."""
    size = split.n * grid.Np
    _check_budget(float(size) ** 2 * COMPLEX_BYTES, memory_budget_mb, "hamiltonian")
    return np.kron(split.H1, np.diag(grid.modes)) - np.kron(
        split.H2, np.eye(grid.Np)
    )


def _propagator_chunk(
    H1: ComplexArray, H2: ComplexArray, modes: RealVector, T: float
) -> ComplexArray:
    # e^{-i(μH1 - H2)T} per mode, through the eigenbasis of the Hermitian K_μ
    generators = modes[:, np.newaxis, np.newaxis] * H1[np.newaxis] - H2[np.newaxis]
    eigenvalues, vectors = np.linalg.eigh(generators)
    phases = np.exp(-1j * eigenvalues * T)
    return (vectors * phases[:, np.newaxis, :]) @ vectors.conj().transpose(0, 2, 1)


def mode_propagators(
    split: HermitianSplit,
    grid: PGrid,
    T: float,
    memory_budget_mb: float = DEFAULT_MEMORY_BUDGET_MB,
) -> ComplexArray:
    """Stack of Np unitary n×n propagators, one per Fourier mode."""
    _check_budget(
        float(grid.Np) * split.n**2 * COMPLEX_BYTES * 3,
        memory_budget_mb,
        "propagators",
    )
    workers = min(thread_count(), grid.Np)
    chunks = np.array_split(grid.modes, workers)
    if workers == 1:
        return _propagator_chunk(split.H1, split.H2, grid.modes, T)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        blocks = list(
            pool.map(
                lambda modes: _propagator_chunk(split.H1, split.H2, modes, T), chunks
            )
        )
    return np.concatenate(blocks, axis=0)


def _apply_propagators(
    propagators: ComplexArray, state: SchrodState, dt: float
) -> SchrodState:
    if propagators.shape[0] != state.data.shape[1]:
        raise DimensionError(
            f"state has {state.data.shape[1]} p samples, "
            f"propagators cover {propagators.shape[0]} modes"
        )
    coefficients = to_fourier(state)
    data = np.einsum("kij,jk->ik", propagators, coefficients.data)
    advanced = replace(coefficients, data=data, time=state.time + dt)
    if state.representation is Representation.PHYSICAL_P:
        return to_physical(advanced)
    return advanced


def make_stepper(
    split: HermitianSplit,
    grid: PGrid,
    dt: float,
    memory_budget_mb: float = DEFAULT_MEMORY_BUDGET_MB,
) -> Stepper:
    """Return a step function with the per-mode exponentials cached for dt."""
    propagators = mode_propagators(split, grid, dt, memory_budget_mb)

    def step(state: SchrodState) -> SchrodState:
        return _apply_propagators(propagators, state, dt)

    return step


def evolve(
    split: HermitianSplit,
    state: SchrodState,
    T: float,
    memory_budget_mb: float = DEFAULT_MEMORY_BUDGET_MB,
) -> SchrodState:
    if state.n != split.n:
        raise DimensionError(f"state has {state.n} components, system has {split.n}")
    propagators = mode_propagators(split, state.grid, T, memory_budget_mb)
    return _apply_propagators(propagators, state, T)


def transport_oracle(
    split: HermitianSplit,
    u0: ComplexArray,
    t: float,
    p: float,
    steps: int = ORACLE_SPLIT_STEPS,
) -> ComplexArray:
    """Continuous-p solution v(t, p) from the warped initial data e^{-|p|}u0.

    Exact when H2 = 0. Otherwise the two flows are combined by Lie splitting
    with ``steps`` steps, which is exact in p but first order in time.
    """
    spectral = spectral_data(split)
    u0 = np.asarray(u0, dtype=np.complex128)
    if t == 0:
        return profiles.evaluate(profiles.warped_profile(u0, spectral, 0.0), p)
    if np.max(np.abs(split.H2)) <= tolerance(split.A, SPLIT_TOL):
        profile = profiles.transport(profiles.warped_profile(u0, spectral, t))
        return profiles.evaluate(profile, p)

    dt = t / steps
    eigenvalues, vectors = np.linalg.eigh(split.H2)
    rotation = (vectors * np.exp(1j * eigenvalues * dt)) @ vectors.conj().T
    profile = profiles.warped_profile(u0, spectral, dt)
    for _ in range(steps):
        profile = profiles.rotate(profiles.transport(profile), rotation)
    return profiles.evaluate(profile, p)
