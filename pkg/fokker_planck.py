"""Spectral discretization of the Fokker-Planck equation on periodic boxes.

∂_t f = σ∇·(e^{-V/σ}∇(e^{V/σ}f)) is discretized with the Fourier momentum
operator P = -i∂_x. Three equivalent generators are exposed: the direct
conservation form, its symmetric similarity transform and the heat form
σΔ - U. Multi-dimensional operators are Kronecker products of one-axis
factors with the first axis slowest.
"""

import logging
from collections.abc import Callable, Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import reduce
from typing import Any

import numpy as np
import scipy.fft
import scipy.linalg
from numpy.typing import NDArray

from errors import (
    ConfigError,
    DimensionError,
    ParameterError,
    PreconditionError,
    ResourceError,
)
from plugins import thread_count
from shift_circuit import Boundary, build_fd_laplacian

type RealArray = NDArray[np.float64]
type ComplexArray = NDArray[np.complex128]
type Potential = Callable[[tuple[RealArray, ...]], PotentialField]

logger = logging.getLogger(__name__)

MAX_ROWS = 4096
SUPPORTED_DIMENSIONS = (1, 2)
DEFAULT_INTERVAL = (-1.0, 1.0)

Form = Enum("Form", ["CONSERVATION_I", "CONSERVATION_II", "HEAT", "FD"])


@dataclass(frozen=True)
class PotentialField:
    values: RealArray
    gradient: RealArray | None = None
    laplacian: RealArray | None = None


@dataclass(frozen=True)
class FokkerPlanckProblem:
    d: int
    M: int
    sigma: float
    interval: tuple[float, float]
    V: RealArray
    V_grad: RealArray | None
    V_lap: RealArray | None
    form: Form


@dataclass(frozen=True)
class SpectralOperators:
    Pmu: ComplexArray
    Dmu: RealArray
    exp_plus: RealArray
    exp_minus: RealArray
    half_plus: RealArray
    half_minus: RealArray


def constant_potential(value: float = 0.0) -> Potential:
    def potential(coords: tuple[RealArray, ...]) -> PotentialField:
        shape = coords[0].shape
        return PotentialField(
            values=np.full(shape, value, dtype=np.float64),
            gradient=np.zeros((len(coords), *shape)),
            laplacian=np.zeros(shape),
        )

    return potential


def quadratic_potential(scale: float = 0.5) -> Potential:
    """V = scale·|x|², non-periodic on the box."""

    def potential(coords: tuple[RealArray, ...]) -> PotentialField:
        return PotentialField(
            values=scale * sum(x**2 for x in coords),
            gradient=2 * scale * np.stack(coords),
            laplacian=np.full(coords[0].shape, 2 * scale * len(coords)),
        )

    return potential


def cosine_potential(amplitude: float = 1.0, frequency: float = np.pi) -> Potential:
    """V = amplitude·Σ cos(frequency·x_l)."""

    def potential(coords: tuple[RealArray, ...]) -> PotentialField:
        cosines = [np.cos(frequency * x) for x in coords]
        sines = np.stack([np.sin(frequency * x) for x in coords])
        return PotentialField(
            values=amplitude * sum(cosines),
            gradient=-amplitude * frequency * sines,
            laplacian=-amplitude * frequency**2 * sum(cosines),
        )

    return potential


def table_potential(table: Any) -> Potential:
    values = np.asarray(table, dtype=np.float64)

    def potential(coords: tuple[RealArray, ...]) -> PotentialField:
        if values.shape != coords[0].shape:
            raise DimensionError(
                f"potential table has shape {values.shape}, grid {coords[0].shape}"
            )
        return PotentialField(values=values.copy())

    return potential


def potential_from_spec(spec: Mapping[str, Any]) -> Potential:
    kind = spec.get("kind")
    parameters = {key: value for key, value in spec.items() if key != "kind"}
    factories: dict[str, Callable[..., Potential]] = {
        "constant": constant_potential,
        "quadratic": quadratic_potential,
        "cosine": cosine_potential,
        "table": table_potential,
    }
    if kind not in factories:
        raise ConfigError("potential.kind", f"unknown potential {kind!r}")
    try:
        return factories[str(kind)](**parameters)
    except TypeError as error:
        raise ConfigError("potential", f"bad parameters for {kind}: {error}") from error


def axis_grid(M: int, interval: tuple[float, float] = DEFAULT_INTERVAL) -> RealArray:
    a, b = interval
    return a + (b - a) / M * np.arange(M, dtype=np.float64)


def _check_axis(M: int, interval: tuple[float, float]) -> None:
    if M <= 0 or M % 2:
        raise ParameterError(f"M must be even and positive, got {M}")
    if interval[1] <= interval[0]:
        raise ParameterError(f"interval must satisfy a < b, got {interval}")


def fokker_planck_problem(
    potential: Potential,
    M: int,
    sigma: float,
    d: int = 1,
    interval: tuple[float, float] = DEFAULT_INTERVAL,
    form: Form = Form.CONSERVATION_I,
) -> FokkerPlanckProblem:
    _check_axis(M, interval)
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    if d not in SUPPORTED_DIMENSIONS:
        raise ParameterError(f"dimension {d} not supported, use 1 or 2")
    if M**d > MAX_ROWS:
        raise ResourceError(f"{M}^{d} grid points exceed the {MAX_ROWS} row cap")

    coords = tuple(np.meshgrid(*[axis_grid(M, interval)] * d, indexing="ij"))
    field = potential(coords)
    if not np.all(np.isfinite(field.values)):
        raise ParameterError("potential has non-finite values")
    return FokkerPlanckProblem(
        d=d,
        M=M,
        sigma=float(sigma),
        interval=interval,
        V=field.values,
        V_grad=field.gradient,
        V_lap=field.laplacian,
        form=form,
    )


def position_operator(
    M: int, interval: tuple[float, float] = DEFAULT_INTERVAL
) -> RealArray:
    _check_axis(M, interval)
    return np.diag(axis_grid(M, interval))


def fourier_modes(M: int, interval: tuple[float, float]) -> RealArray:
    """μ_l = 2π(l - N - 1)/(b - a) for l = 1…M, N = M/2."""
    return 2 * np.pi / (interval[1] - interval[0]) * np.arange(-M // 2, M // 2)


def fourier_matrix(M: int) -> ComplexArray:
    """Unitary Φ with Φ_{jl} = e^{2πi l' j/M}/√M, l' = -M/2 … M/2-1."""
    j = np.arange(M)
    shifted = np.arange(-M // 2, M // 2)
    return np.exp(2j * np.pi * np.outer(j, shifted) / M) / np.sqrt(M)


def momentum_operator(
    M: int, interval: tuple[float, float] = DEFAULT_INTERVAL
) -> ComplexArray:
    _check_axis(M, interval)
    Phi = fourier_matrix(M)
    P = (Phi * fourier_modes(M, interval)[np.newaxis, :]) @ Phi.conj().T
    return (P + P.conj().T) / 2


def apply_momentum(
    values: ComplexArray, interval: tuple[float, float], axis: int
) -> ComplexArray:
    """P_l applied matrix-free along one axis of a tensor-grid array."""
    M = values.shape[axis]
    wavenumbers = 2 * np.pi * scipy.fft.fftfreq(M, d=(interval[1] - interval[0]) / M)
    shape = [1] * values.ndim
    shape[axis] = M
    spectrum = scipy.fft.fft(values, axis=axis) * wavenumbers.reshape(shape)
    return np.asarray(scipy.fft.ifft(spectrum, axis=axis))


def _axis_operators(P: ComplexArray, d: int) -> list[ComplexArray]:
    identity = np.eye(P.shape[0])
    return [
        reduce(np.kron, [P if position == axis else identity for position in range(d)])
        for axis in range(d)
    ]


def spectral_operators(prob: FokkerPlanckProblem) -> SpectralOperators:
    V = prob.V.ravel() / prob.sigma
    return SpectralOperators(
        Pmu=momentum_operator(prob.M, prob.interval),
        Dmu=fourier_modes(prob.M, prob.interval),
        exp_plus=np.exp(V),
        exp_minus=np.exp(-V),
        half_plus=np.exp(V / 2),
        half_minus=np.exp(-V / 2),
    )


def _annihilate_constants(B: ComplexArray) -> ComplexArray:
    """Subtract (r1ᵀ + 1r† - m11ᵀ)/N with r = B·1, m = Σr/N, so B·1 = 0.

    Constants lie in the exact kernel of B; dense products leave row sums of
    order ε‖P‖²·N which this Hermitian rank-two term removes.
    """
    B = (B + B.conj().T) / 2
    rows = B.sum(axis=1)
    mean = float(np.real(rows.sum())) / rows.size
    return B - (rows[:, np.newaxis] + rows.conj()[np.newaxis, :] - mean) / rows.size


def _weighted_laplacian(
    prob: FokkerPlanckProblem, ops: SpectralOperators
) -> ComplexArray:
    # Σ_l P_l diag(e^{-V/σ}) P_l
    total = np.zeros((prob.M**prob.d,) * 2, dtype=np.complex128)
    for P in _axis_operators(ops.Pmu, prob.d):
        total += P @ (ops.exp_minus[:, np.newaxis] * P)
    return _annihilate_constants(total)


def _require_form(prob: FokkerPlanckProblem, form: Form) -> None:
    if prob.form is not form:
        raise PreconditionError(f"expected a {form.name} problem, got {prob.form.name}")


def assemble_conservation_A(prob: FokkerPlanckProblem) -> ComplexArray:
    """A = -σ Σ_l P_l e^{-V/σ} P_l e^{V/σ}; A·e^{-V/σ} = 0 exactly."""
    _require_form(prob, Form.CONSERVATION_I)
    ops = spectral_operators(prob)
    logger.debug("assembling conservation generator, %d rows", prob.M**prob.d)
    return -prob.sigma * _weighted_laplacian(prob, ops) * ops.exp_plus[np.newaxis, :]


def assemble_symmetric_H(prob: FokkerPlanckProblem) -> ComplexArray:
    """H = -σ e^{V/(2σ)} (Σ_l P_l e^{-V/σ} P_l) e^{V/(2σ)}, Hermitian and NSD."""
    _require_form(prob, Form.CONSERVATION_II)
    ops = spectral_operators(prob)
    H = (
        -prob.sigma
        * ops.half_plus[:, np.newaxis]
        * _weighted_laplacian(prob, ops)
        * ops.half_plus[np.newaxis, :]
    )
    return (H + H.conj().T) / 2


def _spectral_derivatives(prob: FokkerPlanckProblem) -> tuple[RealArray, RealArray]:
    # ∂_l = iP_l
    V = prob.V.astype(np.complex128)
    first = [apply_momentum(V, prob.interval, axis) for axis in range(prob.d)]
    gradient = np.stack([np.real(1j * derivative) for derivative in first])
    laplacian = np.zeros(prob.V.shape)
    for axis, derivative in enumerate(first):
        laplacian -= np.real(apply_momentum(derivative, prob.interval, axis))
    return gradient, laplacian


def heat_form_potential(prob: FokkerPlanckProblem) -> RealArray:
    """U = |∇V|²/(4σ) - ΔV/2 on the grid."""
    if prob.V_grad is None or prob.V_lap is None:
        logger.warning(
            "no analytic derivatives for the potential, using spectral ones"
            " (inaccurate when V is not periodic on the box)"
        )
        gradient, laplacian = _spectral_derivatives(prob)
    else:
        gradient, laplacian = prob.V_grad, prob.V_lap
    U = np.sum(gradient**2, axis=0) / (4 * prob.sigma) - laplacian / 2
    if np.any(U < 0):
        logger.warning(
            "heat-form potential dips to %.3g, H1 may have positive eigenvalues",
            float(U.min()),
        )
    return U


def heat_generator(prob: FokkerPlanckProblem) -> ComplexArray:
    """σΔ - U with Δ = -Σ_l P_l²."""
    P_axes = _axis_operators(momentum_operator(prob.M, prob.interval), prob.d)
    G = -prob.sigma * sum(P @ P for P in P_axes) - np.diag(
        heat_form_potential(prob).ravel()
    )
    return (G + G.conj().T) / 2


def fd_generator(prob: FokkerPlanckProblem) -> ComplexArray:
    """σΔ_h - U with the periodic second-difference Laplacian."""
    h = (prob.interval[1] - prob.interval[0]) / prob.M
    stencil = build_fd_laplacian(prob.M, h, Boundary.PERIODIC)
    laplacian_axes = _axis_operators(stencil.astype(np.complex128), prob.d)
    return prob.sigma * sum(laplacian_axes) - np.diag(
        heat_form_potential(prob).ravel()
    )


def generator(prob: FokkerPlanckProblem) -> ComplexArray:
    match prob.form:
        case Form.CONSERVATION_I:
            return assemble_conservation_A(prob)
        case Form.CONSERVATION_II:
            return assemble_symmetric_H(prob)
        case Form.HEAT:
            return heat_generator(prob)
        case Form.FD:
            return fd_generator(prob)
        case _:
            raise ParameterError(f"unknown form {prob.form}")


def apply_generator(prob: FokkerPlanckProblem, f: ComplexArray) -> ComplexArray:
    """Matrix-free application of the spectral generator to tensor-grid values."""
    f = np.asarray(f, dtype=np.complex128).reshape(prob.V.shape)
    scaled = prob.V / prob.sigma

    def weighted_laplacian(values: ComplexArray) -> ComplexArray:
        total = np.zeros_like(values)
        for axis in range(prob.d):
            inner = np.exp(-scaled) * apply_momentum(values, prob.interval, axis)
            total += apply_momentum(inner, prob.interval, axis)
        return total

    def momentum_squared(values: ComplexArray) -> ComplexArray:
        total = np.zeros_like(values)
        for axis in range(prob.d):
            total += apply_momentum(
                apply_momentum(values, prob.interval, axis), prob.interval, axis
            )
        return total

    match prob.form:
        case Form.CONSERVATION_I:
            result = -prob.sigma * weighted_laplacian(np.exp(scaled) * f)
        case Form.CONSERVATION_II:
            half = np.exp(scaled / 2)
            result = -prob.sigma * half * weighted_laplacian(half * f)
        case Form.HEAT:
            result = -prob.sigma * momentum_squared(f) - heat_form_potential(prob) * f
        case _:
            raise ParameterError(f"no matrix-free path for form {prob.form}")
    return np.asarray(result).ravel()


def steady_state(V: RealArray, sigma: float) -> RealArray:
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    return np.exp(-np.asarray(V, dtype=np.float64) / sigma)


def _check_shapes(values: ComplexArray, V: RealArray) -> None:
    if np.shape(values) != np.shape(V):
        raise DimensionError(f"shapes differ: {np.shape(values)} and {np.shape(V)}")


def transform_to_heat(f: ComplexArray, V: RealArray, sigma: float) -> ComplexArray:
    """ψ = e^{V/(2σ)}·f."""
    _check_shapes(f, V)
    return np.exp(np.asarray(V) / (2 * sigma)) * np.asarray(f)


def transform_from_heat(psi: ComplexArray, V: RealArray, sigma: float) -> ComplexArray:
    _check_shapes(psi, V)
    return np.exp(-np.asarray(V) / (2 * sigma)) * np.asarray(psi)


def leading_minor_determinant(H1: ComplexArray, size: int = 2) -> float:
    """Determinant of the leading size×size block; negative means H1 has λ₊ > 0."""
    return float(np.real(np.linalg.det(np.asarray(H1)[:size, :size])))


def _lambda_plus(
    potential: Potential, sigma: float, M: int, interval: tuple[float, float], d: int
) -> float:
    A = assemble_conservation_A(fokker_planck_problem(potential, M, sigma, d, interval))
    eigenvalues = scipy.linalg.eigh((A + A.conj().T) / 2, eigvals_only=True)
    return max(0.0, float(eigenvalues[-1]))


def positive_eig_scan(
    potential: Potential,
    sigma: float,
    M_list: list[int],
    interval: tuple[float, float] = DEFAULT_INTERVAL,
    d: int = 1,
) -> list[tuple[int, float]]:
    """λ₊ of the conservation-form Hermitian part for each M."""
    if any(M % 2 for M in M_list) or sorted(M_list) != list(M_list):
        raise ParameterError(f"M_list must be ascending even sizes, got {M_list}")
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        values = list(
            pool.map(lambda M: _lambda_plus(potential, sigma, M, interval, d), M_list)
        )
    for M, value in zip(M_list, values, strict=True):
        logger.info("M=%d lambda_plus=%.6f", M, value)
    return list(zip(M_list, values, strict=True))
