"""schrodsim command line: experiment drivers, configuration and result files."""

import argparse
import inspect
import json
import logging
import math
import sys
from collections.abc import Callable, Mapping, Sequence
from dataclasses import asdict, dataclass, field, fields, replace
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from errors import (
    ConfigError,
    DimensionError,
    ParameterError,
    PreconditionError,
    ResourceError,
    SchrodsimError,
)
from fokker_planck import (
    DEFAULT_INTERVAL,
    FokkerPlanckProblem,
    Form,
    assemble_conservation_A,
    assemble_symmetric_H,
    axis_grid,
    fd_generator,
    fokker_planck_problem,
    heat_form_potential,
    heat_generator,
    leading_minor_determinant,
    positive_eig_scan,
    potential_from_spec,
    steady_state,
    transform_to_heat,
)
from formatters import config_digest, render_csv, render_manifest
from linear_core import (
    HermitianSplit,
    hermitian_split,
    reference_evolve,
    spectral_data,
    stabilize,
)
from logger import colon_delimit, dash_delimit, get_logger, log_parameters
from plugins import experiment_defaults
from recovery import (
    complexity_factors,
    default_p_star,
    probability_formula,
    recovery_report,
    recovery_threshold,
    restore_at,
    restore_pointwise,
)
from schrod_engine import (
    DEFAULT_MEMORY_BUDGET_MB,
    PGrid,
    Representation,
    SchrodState,
    choose_domain,
    evolve,
    p_grid,
    steep_alpha,
    to_fourier,
    transport_oracle,
    unit_alpha,
    warp_initial,
)
from shift_circuit import (
    Boundary,
    Gate,
    QuantumState,
    basis_state,
    build_fd_laplacian,
    circuit_to_text,
    diagonal_unitary_kickback,
    fd_heat_schrodingerized_evolve,
    fd_split_evolve,
    fidelity,
    gate_counter,
    inverse_qft_circuit,
    kickback_phases,
    periodic_laplacian_eigenvalues,
    phase_ladder,
    qft_circuit,
    quantum_state,
    shift_by_circuit,
    verify_shift_diagonalization,
)
from splitting import (
    heat_split_evolve,
    lie_split_ode,
    splitting_probability,
    verify_splitting_exactness,
)

type ComplexVector = NDArray[np.complex128]
type Row = tuple[object, ...]
type Driver = Callable[[ExperimentConfig, np.random.Generator], ExperimentResult]

logger = logging.getLogger(__name__)

STAGE_ORDERS = ("transport_then_phase",)
CONVERGENCE_FLOOR = 1e-13
REFERENCE_REFINEMENT = 16
LOW_MODE_BAND = 1.0
EIG_SCAN_CAVEAT = (
    "sigma is not stated for the reference curve; sigma = {sigma} on {interval}"
    " is assumed"
)


# pylint: disable-next=too-many-instance-attributes
@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int = 0
    n: int = 4
    instances: int = 20
    matrix: tuple[tuple[str | float, ...], ...] | None = None
    T: float = 1.0
    dt: float = 0.1
    steps: int = 10
    dp_list: tuple[float, ...] = ()
    np_points: int = 64
    tail_tol: float = 1e-9
    L0: float = -1.0
    alpha_left: float = 1.0
    unstable_shift: float = 0.0
    d: int = 1
    M: int = 16
    M_list: tuple[int, ...] = ()
    sigma: float = 1.0
    sigma_list: tuple[float, ...] = ()
    potential: dict[str, Any] = field(default_factory=lambda: {"kind": "cosine"})
    potential_list: tuple[dict[str, Any], ...] = ()
    interval: tuple[float, float] = DEFAULT_INTERVAL
    n_x: int = 4
    n_x_list: tuple[int, ...] = ()
    n_p: int = 10
    n_x_split: int = 3
    n_p_split: int = 4
    h: float = 1.0
    dt_list: tuple[float, ...] = ()
    kickback_tables: int = 50
    stage_order: str = "transport_then_phase"
    memory_budget_mb: float = DEFAULT_MEMORY_BUDGET_MB
    out: str = "results"


@dataclass(frozen=True)
class Table:
    header: tuple[str, ...]
    rows: list[Row]


@dataclass(frozen=True)
class ExperimentResult:
    tables: dict[str, Table]
    measures: dict[str, Any]
    texts: dict[str, str] = field(default_factory=dict)


drivers: dict[str, Driver] = {}


def driver(name: str) -> Callable[[Driver], Driver]:
    def register(func: Driver) -> Driver:
        drivers[name] = func
        return func

    return register


# configuration


def read_config(path: str | Path) -> dict[str, Any]:
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as error:
        raise ConfigError("config", f"cannot read {path}: {error}") from error
    except json.JSONDecodeError as error:
        raise ConfigError("config", f"invalid JSON: {error}") from error
    if not isinstance(document, dict):
        raise ConfigError("config", "document must be a JSON object")
    return document


def _coerce(name: str, kind: Any, value: Any) -> Any:
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(name, f"must be an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, int | float):
            raise ConfigError(name, f"must be a number, got {value!r}")
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(name, f"must be a string, got {value!r}")
        return value
    if kind == dict[str, Any]:
        if not isinstance(value, dict):
            raise ConfigError(name, "must be an object")
        return value
    if kind in (tuple[float, ...], tuple[int, ...], tuple[dict[str, Any], ...]):
        if not isinstance(value, list | tuple):
            raise ConfigError(name, "must be a list")
        return tuple(_coerce(name, kind.__args__[0], item) for item in value)
    if kind == tuple[float, float]:
        if not isinstance(value, list | tuple) or len(value) != 2:
            raise ConfigError(name, "must be a pair of numbers")
        return tuple(_coerce(name, float, item) for item in value)
    return value


def _coerce_matrix(value: Any) -> tuple[tuple[str | float, ...], ...] | None:
    if value is None:
        return None
    if not isinstance(value, list | tuple) or not value:
        raise ConfigError("matrix", "must be a non-empty list of rows")
    rows = []
    for row in value:
        if not isinstance(row, list | tuple) or len(row) != len(value):
            raise ConfigError("matrix", "must be square")
        for entry in row:
            try:
                complex(entry)
            except (TypeError, ValueError) as error:
                raise ConfigError("matrix", f"bad entry {entry!r}") from error
        rows.append(tuple(row))
    return tuple(rows)


def _validate(config: ExperimentConfig) -> None:
    positive_integers = (
        "n",
        "instances",
        "steps",
        "kickback_tables",
        "n_x",
        "n_p",
        "n_x_split",
        "n_p_split",
    )
    for name in positive_integers:
        if getattr(config, name) < 1:
            raise ConfigError(name, "must be at least 1")
    positive_numbers = ("T", "dt", "sigma", "h", "alpha_left", "memory_budget_mb")
    for name in positive_numbers:
        if getattr(config, name) <= 0:
            raise ConfigError(name, "must be positive")
    for name in ("dp_list", "dt_list", "sigma_list"):
        if any(value <= 0 for value in getattr(config, name)):
            raise ConfigError(name, "entries must be positive")
    if config.np_points < 2 or config.np_points % 2:
        raise ConfigError("np_points", "must be even and at least 2")
    if not 0 < config.tail_tol < 1:
        raise ConfigError("tail_tol", "must lie in (0, 1)")
    if config.L0 >= 0:
        raise ConfigError("L0", "must be negative")
    if config.unstable_shift < 0:
        raise ConfigError("unstable_shift", "must be non-negative")
    if config.d not in (1, 2):
        raise ConfigError("d", "must be 1 or 2")
    if config.stage_order not in STAGE_ORDERS:
        raise ConfigError(
            "stage_order", f"only {', '.join(STAGE_ORDERS)} is implemented"
        )


def load_config(
    experiment: str,
    document: Mapping[str, Any],
    seed: int | None = None,
    out: str | None = None,
) -> ExperimentConfig:
    """Merge a JSON document over the experiment's defaults.

    Raises:
        ConfigError: naming the first unknown, mistyped or out-of-range key.
    """
    if experiment not in experiment_defaults:
        raise ConfigError("experiment", f"unknown experiment {experiment!r}")
    if document.get("experiment", experiment) != experiment:
        raise ConfigError("experiment", "document names a different experiment")
    kinds = {item.name: item.type for item in fields(ExperimentConfig)}
    for key in document:
        if key not in kinds:
            raise ConfigError(key, "unknown key")

    defaults_function = experiment_defaults[experiment]
    parameters = inspect.signature(defaults_function).parameters
    resolved: dict[str, Any] = defaults_function(
        *[(key, value) for key, value in document.items() if key in parameters]
    )
    resolved |= {key: value for key, value in document.items() if key not in parameters}
    if seed is not None:
        resolved["seed"] = seed
    if out is not None:
        resolved["out"] = out
    resolved["experiment"] = experiment

    values = {
        key: (
            _coerce_matrix(value)
            if key == "matrix"
            else _coerce(key, kinds[key], value)
        )
        for key, value in resolved.items()
    }
    config = ExperimentConfig(**values)
    _validate(config)
    return config


def resolved_parameters(config: ExperimentConfig) -> dict[str, Any]:
    """Parameters that determine the results; the output directory is not one."""
    parameters = asdict(config)
    del parameters["out"]
    return parameters


# random instances and shared helpers


def random_stable_split(n: int, rng: np.random.Generator) -> HermitianSplit:
    """H1 = -B†B, so negative semi-definite, plus a random Hermitian H2."""
    B = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(
        2 * n
    )
    G = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(
        2 * n
    )
    return hermitian_split(-B.conj().T @ B + 1j * (G + G.conj().T) / 2)


def random_unstable_split(
    n: int, rng: np.random.Generator, delta: float
) -> HermitianSplit:
    """A stable instance shifted along the identity until λ₊ = δ."""
    stable = random_stable_split(n, rng)
    top = float(spectral_data(stable).eigenvalues[-1])
    return stabilize(stable, top - delta)


def random_vector(n: int, rng: np.random.Generator) -> ComplexVector:
    u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return u / np.linalg.norm(u)


def _configured_split(
    config: ExperimentConfig, rng: np.random.Generator
) -> HermitianSplit:
    if config.matrix is not None:
        A = np.array([[complex(entry) for entry in row] for row in config.matrix])
        split = hermitian_split(A)
    else:
        split = random_stable_split(config.n, rng)
    return stabilize(split, -config.unstable_shift)


def _grid_for(L: float, R: float, dp: float) -> PGrid:
    Np = round((R - L) / dp)
    if not math.isclose(Np * dp, R - L):
        raise ParameterError(f"dp {dp} does not divide the p domain [{L}, {R}]")
    return p_grid(L, R, Np)


def _relative_error(approximate: ComplexVector, exact: ComplexVector) -> float:
    scale = float(np.linalg.norm(exact))
    if scale == 0:
        return float(np.linalg.norm(approximate))
    return float(np.linalg.norm(approximate - exact)) / scale


def _initial_density(prob: FokkerPlanckProblem) -> ComplexVector:
    coords = np.meshgrid(*[axis_grid(prob.M, prob.interval)] * prob.d, indexing="ij")
    return (1 + 0.5 * np.sin(np.pi * sum(coords))).ravel().astype(np.complex128)


def convergence_report(results: Sequence[tuple[float, float]]) -> float:
    """Observed order: least-squares slope of log(error) against log(step).

    Raises:
        ParameterError: with fewer than three points, step sizes that are not
            strictly monotone, or non-positive errors.
    """
    if len(results) < 3:
        raise ParameterError(f"need at least 3 points, got {len(results)}")
    steps = np.array([step for step, _ in results], dtype=np.float64)
    errors = np.array([error for _, error in results], dtype=np.float64)
    differences = np.diff(steps)
    if not (np.all(differences > 0) or np.all(differences < 0)):
        raise ParameterError("step sizes must be strictly monotone")
    if np.any(steps <= 0) or np.any(errors <= 0):
        raise ParameterError("steps and errors must be positive")
    slope, _ = np.polyfit(np.log(steps), np.log(errors), 1)
    return float(slope)


def _order_or_none(results: list[tuple[float, float]]) -> float | None:
    if len(results) < 3 or min(error for _, error in results) <= CONVERGENCE_FLOOR:
        return None
    return convergence_report(results)


# experiment drivers


def _transport_error(
    split: HermitianSplit, u0: ComplexVector, grid: PGrid, config: ExperimentConfig
) -> float:
    """Max of ‖v_grid - v‖ around the kinks for the transport part alone.

    With H2 dropped the exact profile is known for every p. The kinks sit at
    λ_i·T, where the grid error is largest; points more than one unit away
    are left out so the periodic wrap of the far tail does not count.
    """
    transport = hermitian_split(split.H1)
    spectral = spectral_data(transport)
    state = evolve(transport, warp_initial(u0, grid), config.T, config.memory_budget_mb)
    window = (grid.points >= spectral.lambda_min * config.T - 1) & (
        grid.points <= spectral.lambda_plus * config.T + 1
    )
    exact = transport_oracle(transport, u0, config.T, grid.points[window])
    gap = np.linalg.norm(state.data[:, window] - exact, axis=0)
    return float(np.max(gap)) / float(np.linalg.norm(u0))


@driver("ode_schrod")
def run_ode_schrod(
    config: ExperimentConfig, rng: np.random.Generator
) -> ExperimentResult:
    alpha = unit_alpha if config.alpha_left == 1 else steep_alpha(config.alpha_left)
    rows: list[Row] = []
    threshold_rows: list[Row] = []
    errors_by_dp: dict[float, list[float]] = {dp: [] for dp in config.dp_list}
    transport_by_dp: dict[float, list[float]] = {dp: [] for dp in config.dp_list}
    for instance in range(config.instances):
        split = _configured_split(config, rng)
        spectral = spectral_data(split)
        u0 = random_vector(split.n, rng)
        exact = reference_evolve(split.A, u0, config.T)
        L, R = choose_domain(
            spectral.lambda_min,
            spectral.lambda_plus,
            config.T,
            config.L0,
            config.tail_tol,
        )
        for dp in config.dp_list:
            grid = _grid_for(L, R, dp)
            start = warp_initial(u0, grid, alpha)
            state = evolve(split, start, config.T, config.memory_budget_mb)
            report = recovery_report(state, grid, u0, spectral.lambda_plus)
            error = _relative_error(report.u_restored, exact)
            transport_error = _transport_error(split, u0, grid, config)
            errors_by_dp[dp].append(error)
            transport_by_dp[dp].append(transport_error)
            rows.append(
                (
                    instance,
                    dp,
                    grid.Np,
                    spectral.lambda_plus,
                    report.p_star,
                    error,
                    transport_error,
                    report.probability,
                    probability_formula(u0, exact, spectral.lambda_plus, config.T),
                    report.g0,
                    report.g_plus,
                    report.g_c,
                    abs(state.norm() - start.norm()) / start.norm(),
                )
            )
            if spectral.lambda_plus > 0:
                # inside (0, λ₊T), where e^{p}v(T, p) is not u(T)
                midpoint = recovery_threshold(spectral.lambda_plus, config.T) / 2
                threshold_rows.append(
                    (
                        instance,
                        dp,
                        midpoint,
                        _relative_error(restore_at(state, grid, midpoint), exact),
                    )
                )
    mean_errors = [(dp, float(np.mean(errors_by_dp[dp]))) for dp in config.dp_list]
    transport_errors = [
        (dp, float(np.mean(transport_by_dp[dp]))) for dp in config.dp_list
    ]
    header = (
        "instance",
        "dp",
        "Np",
        "lambda_plus",
        "p_star",
        "rel_error",
        "transport_error",
        "probability",
        "probability_formula",
        "g0",
        "g_plus",
        "g_c",
        "norm_drift",
    )
    tables = {"recovery": Table(header, rows)}
    if threshold_rows:
        tables["threshold"] = Table(
            ("instance", "dp", "p", "below_threshold_error"), threshold_rows
        )
    return ExperimentResult(
        tables=tables,
        measures={
            "mean_errors": mean_errors,
            "transport_errors": transport_errors,
            "p_order": _order_or_none(transport_errors),
            "restored_order": _order_or_none(mean_errors),
        },
    )


@driver("fp_conservation1")
def run_fp_conservation1(
    config: ExperimentConfig, rng: np.random.Generator
) -> ExperimentResult:
    del rng
    potential = potential_from_spec(config.potential)
    steady_rows: list[Row] = []
    for M in config.M_list:
        for sigma in config.sigma_list:
            prob = fokker_planck_problem(potential, M, sigma, config.d, config.interval)
            A = assemble_conservation_A(prob)
            split = hermitian_split(A)
            residual = np.linalg.norm(A @ steady_state(prob.V, sigma).ravel())
            steady_rows.append(
                (
                    M,
                    sigma,
                    float(residual),
                    spectral_data(split).lambda_plus,
                    leading_minor_determinant(split.H1),
                )
            )

    prob = fokker_planck_problem(
        potential, config.M, config.sigma, config.d, config.interval
    )
    split = hermitian_split(assemble_conservation_A(prob))
    spectral = spectral_data(split)
    c = spectral.lambda_plus
    stabilized = stabilize(split, c)
    stabilized_spectral = spectral_data(stabilized)
    f0 = _initial_density(prob)
    exact = reference_evolve(split.A, f0, config.T)
    g0, g_plus, g_c = complexity_factors(f0, exact, spectral.lambda_plus, c, config.T)

    recovery_rows: list[Row] = []
    for dp in config.dp_list:
        grid = _grid_for(
            *choose_domain(
                spectral.lambda_min, c, config.T, config.L0, config.tail_tol
            ),
            dp,
        )
        direct = recovery_report(
            evolve(split, warp_initial(f0, grid), config.T, config.memory_budget_mb),
            grid,
            f0,
            c,
        )
        shifted_grid = _grid_for(
            *choose_domain(
                stabilized_spectral.lambda_min,
                stabilized_spectral.lambda_plus,
                config.T,
                config.L0,
                config.tail_tol,
            ),
            dp,
        )
        shifted_state = evolve(
            stabilized,
            warp_initial(f0, shifted_grid),
            config.T,
            config.memory_budget_mb,
        )
        restored = math.exp(c * config.T) * restore_pointwise(
            shifted_state,
            shifted_grid,
            stabilized_spectral.lambda_plus,
            default_p_star(shifted_grid, stabilized_spectral.lambda_plus, config.T),
        )
        recovery_rows.append(
            (
                dp,
                _relative_error(direct.u_restored, exact),
                _relative_error(restored, exact),
                direct.probability,
            )
        )
    return ExperimentResult(
        tables={
            "steady": Table(
                ("M", "sigma", "residual", "lambda_plus", "leading_minor"), steady_rows
            ),
            "recovery": Table(
                ("dp", "direct_error", "stabilized_error", "probability"),
                recovery_rows,
            ),
        },
        measures={
            "M": config.M,
            "sigma": config.sigma,
            "lambda_plus": spectral.lambda_plus,
            "g0": g0,
            "g_plus": g_plus,
            "g_c": g_c,
        },
    )


def _fixed_point_drift(
    H: NDArray[np.complex128], psi_s: ComplexVector, config: ExperimentConfig
) -> float:
    split = hermitian_split(H)
    lambda_plus = spectral_data(split).lambda_plus
    # ψ_s lies in the kernel, so only its zero-speed characteristic matters
    L, R = choose_domain(0.0, lambda_plus, config.T, config.L0, config.tail_tol)
    grid = p_grid(L, R, config.np_points)
    state = evolve(split, warp_initial(psi_s, grid), config.T, config.memory_budget_mb)
    p_star = default_p_star(grid, lambda_plus, config.T)
    restored = restore_pointwise(state, grid, lambda_plus, p_star)
    return _relative_error(restored, psi_s)


@driver("fp_conservation2")
def run_fp_conservation2(
    config: ExperimentConfig, rng: np.random.Generator
) -> ExperimentResult:
    del rng
    rows: list[Row] = []
    for spec in config.potential_list:
        potential = potential_from_spec(spec)
        for M in config.M_list:
            for sigma in config.sigma_list:
                prob = fokker_planck_problem(
                    potential, M, sigma, config.d, config.interval, Form.CONSERVATION_II
                )
                conservation = replace(prob, form=Form.CONSERVATION_I)
                A = assemble_conservation_A(conservation)
                H = assemble_symmetric_H(prob)
                half = np.exp(prob.V.ravel() / (2 * sigma))
                f_s = steady_state(prob.V, sigma)
                psi_s = np.sqrt(f_s).ravel().astype(np.complex128)
                similar = half[:, np.newaxis] * A / half[np.newaxis, :]
                rows.append(
                    (
                        str(spec.get("kind")),
                        M,
                        sigma,
                        float(np.linalg.norm(A @ f_s.ravel())),
                        float(np.linalg.norm(H @ psi_s)),
                        float(scipy.linalg.eigh(H, eigvals_only=True)[-1]),
                        float(np.max(np.abs(similar - H))),
                        _fixed_point_drift(H, psi_s, config),
                    )
                )
    header = (
        "potential",
        "M",
        "sigma",
        "residual_A",
        "residual_H",
        "lambda_max",
        "similarity_error",
        "fixed_point_drift",
    )
    return ExperimentResult(tables={"steady": Table(header, rows)}, measures={})


@driver("fp_heat_split")
def run_fp_heat_split(
    config: ExperimentConfig, rng: np.random.Generator
) -> ExperimentResult:
    del rng
    prob = fokker_planck_problem(
        potential_from_spec(config.potential),
        config.M,
        config.sigma,
        config.d,
        config.interval,
        Form.HEAT,
    )
    U = heat_form_potential(prob)
    psi0 = transform_to_heat(
        _initial_density(prob).reshape(prob.V.shape), prob.V, config.sigma
    ).ravel()
    grid = p_grid(config.L0, -config.L0, config.np_points)
    G = heat_generator(prob)
    lambda_plus = spectral_data(hermitian_split(G)).lambda_plus
    exact = reference_evolve(G, psi0, config.T)
    initial_norm = float(np.linalg.norm(psi0)) * _profile_norm(grid)

    def split(dt: float) -> tuple[SchrodState, ComplexVector]:
        return heat_split_evolve(
            psi0, U, config.sigma, grid, config.T, dt, config.interval, lambda_plus
        )

    # the Lie error of mode μ grows like μ²Δt; the order is read off |μ| <= 1
    band = np.abs(grid.modes) <= LOW_MODE_BAND
    reference, _ = split(min(config.dt_list) / REFERENCE_REFINEMENT)
    reference_band = to_fourier(reference).data[:, band]
    rows: list[Row] = []
    band_errors: list[tuple[float, float]] = []
    for dt in config.dt_list:
        state, restored = split(dt)
        split_error = float(np.linalg.norm(state.data - reference.data)) / float(
            np.linalg.norm(reference.data)
        )
        band_error = float(
            np.linalg.norm(to_fourier(state).data[:, band] - reference_band)
        ) / float(np.linalg.norm(reference_band))
        band_errors.append((dt, band_error))
        rows.append(
            (
                dt,
                round(config.T / dt),
                split_error,
                band_error,
                _relative_error(restored, exact),
                abs(state.norm() - initial_norm) / initial_norm,
            )
        )
    header = (
        "dt",
        "steps",
        "split_error",
        "band_error",
        "restored_error",
        "norm_drift",
    )
    return ExperimentResult(
        tables={"splitting": Table(header, rows)},
        measures={
            "lambda_plus": lambda_plus,
            "dt_order": _order_or_none(band_errors),
        },
    )


def _profile_norm(grid: PGrid) -> float:
    return float(np.linalg.norm(np.exp(-np.abs(grid.points))))


def _split_grid(U: NDArray[np.float64], n_x: int, n_p: int) -> PGrid:
    """Smallest power-of-two p span with 2π(V - min V) ≤ M - 1 for V = -U·μ."""
    Np = 2**n_p
    needed = 4 * np.pi**2 * float(np.max(np.abs(U))) * Np / (2 ** (n_x + n_p) - 1)
    span = 2 ** max(1, math.ceil(math.log2(max(needed, 1.0))))
    return p_grid(-span / 2, span / 2, Np)


def _fd_split_row(config: ExperimentConfig) -> Row:
    """Quantized against exact potential phases, and both against e^{-iμGT}."""
    prob = fokker_planck_problem(
        potential_from_spec(config.potential),
        2**config.n_x_split,
        config.sigma,
        1,
        config.interval,
        Form.FD,
    )
    U = heat_form_potential(prob).ravel()
    a, b = config.interval
    h = (b - a) / prob.M
    grid = _split_grid(U, config.n_x_split, config.n_p_split)
    x = axis_grid(prob.M, config.interval)
    psi0 = (1 + 0.5 * np.sin(np.pi * x)).astype(np.complex128)
    kicked, steps = fd_split_evolve(h, config.sigma, U, grid, psi0, config.T)
    phased, _ = fd_split_evolve(
        h, config.sigma, U, grid, psi0, config.T, kickback=False
    )
    initial = to_fourier(
        SchrodState(
            data=np.outer(psi0, np.exp(-np.abs(grid.points))),
            representation=Representation.PHYSICAL_P,
            time=0.0,
            grid=grid,
        )
    ).data
    G = fd_generator(prob)
    exact = np.column_stack(
        [
            scipy.linalg.expm(-1j * mu * G * phased.time) @ initial[:, k]
            for k, mu in enumerate(grid.modes)
        ]
    )
    scale = float(np.linalg.norm(exact))
    dt = 2 * np.pi / 2 ** (config.n_x_split + config.n_p_split)
    return (
        config.n_x_split,
        config.n_p_split,
        dt,
        steps,
        float(np.linalg.norm(kicked.data - phased.data)) / scale,
        steps * dt,
        float(np.linalg.norm(phased.data - exact)) / scale,
    )


def _kickback_rows(config: ExperimentConfig, rng: np.random.Generator) -> list[Row]:
    rows: list[Row] = []
    size = 2**config.n
    for table_index in range(config.kickback_tables):
        q_table = rng.integers(0, size, size=size)
        register = quantum_state(random_vector(size, rng))
        emulated = diagonal_unitary_kickback(config.n, q_table)(register)
        expected = QuantumState(
            kickback_phases(config.n, q_table) @ register.amplitudes, config.n
        )
        rows.append((table_index, 1 - fidelity(emulated, expected)))
    return rows


def _fd_circuits(config: ExperimentConfig) -> dict[str, list[Gate]]:
    """The +1 shift on n_x qubits and the QFT pair around the kickback adder."""
    ladder, _ = phase_ladder(config.n_x, 1)
    return {
        "shift": qft_circuit(config.n_x) + ladder + inverse_qft_circuit(config.n_x),
        "kickback": qft_circuit(config.n, offset=config.n)
        + inverse_qft_circuit(config.n, offset=config.n),
    }


@driver("fp_fd_circuit")
def run_fp_fd_circuit(
    config: ExperimentConfig, rng: np.random.Generator
) -> ExperimentResult:
    M = 2**config.n_x
    a, b = config.interval
    h = (b - a) / M
    x = axis_grid(M, config.interval)
    psi0 = (1 + 0.5 * np.sin(np.pi * x)).astype(np.complex128)
    laplacian = build_fd_laplacian(M, h, Boundary.PERIODIC)
    exact = reference_evolve(laplacian, psi0, config.T)

    L, R = choose_domain(
        float(periodic_laplacian_eigenvalues(M, h).min()),
        0.0,
        config.T,
        config.L0,
        config.tail_tol,
    )
    grid = p_grid(L, R, 2**config.n_p)
    state = fd_heat_schrodingerized_evolve(
        config.n_x, config.n_p, h, grid, psi0, config.T
    )
    restored = restore_pointwise(state, grid, 0.0, default_p_star(grid, 0.0, config.T))
    fd_rows: list[Row] = [
        (config.n_x, config.n_p, grid.dp, _relative_error(restored, exact))
    ]

    kickback_rows = _kickback_rows(config, rng)
    circuits = _fd_circuits(config)
    gate_rows: list[Row] = []
    for circuit, gates in circuits.items():
        counts = gate_counter()(gates)
        gate_rows.extend((circuit, name, counts[name]) for name in sorted(counts))
    split_row = _fd_split_row(config)
    return ExperimentResult(
        tables={
            "fd": Table(("n_x", "n_p", "dp", "recovery_error"), fd_rows),
            "fd_split": Table(
                (
                    "n_x",
                    "n_p",
                    "dt",
                    "steps",
                    "quantization_gap",
                    "quantization_bound",
                    "split_error",
                ),
                [split_row],
            ),
            "kickback": Table(("table", "infidelity"), kickback_rows),
            "gates": Table(("circuit", "gate", "count"), gate_rows),
        },
        measures={
            "max_infidelity": max(row[1] for row in kickback_rows),
            "quantization_gap": split_row[4],
        },
        texts={
            f"{circuit}_circuit": circuit_to_text(gates)
            for circuit, gates in circuits.items()
        },
    )


@driver("eig_scan")
def run_eig_scan(
    config: ExperimentConfig, rng: np.random.Generator
) -> ExperimentResult:
    del rng
    scan = positive_eig_scan(
        potential_from_spec(config.potential),
        config.sigma,
        list(config.M_list),
        config.interval,
        config.d,
    )
    measures: dict[str, Any] = {
        "caveat": EIG_SCAN_CAVEAT.format(
            sigma=config.sigma, interval=list(config.interval)
        ),
        "limit": scan[-1][1],
    }
    if len(scan) > 1:
        measures["last_gap"] = abs(scan[-1][1] - scan[-2][1])
    return ExperimentResult(
        tables={"lambda_plus": Table(("M", "lambda_plus"), list(scan))},
        measures=measures,
    )


def _circuit_shift_error(n_x: int) -> float:
    M = 2**n_x
    worst = 0.0
    for j in range(M):
        for sign in (1, -1):
            shifted = shift_by_circuit(basis_state(n_x, j), sign)
            target = basis_state(n_x, (j + sign) % M)
            worst = max(worst, 1 - fidelity(shifted, target))
    return worst


@driver("shift_verify")
def run_shift_verify(
    config: ExperimentConfig, rng: np.random.Generator
) -> ExperimentResult:
    del rng
    rows: list[Row] = []
    for n_x in config.n_x_list:
        M = 2**n_x
        cyclic = build_fd_laplacian(M, config.h, Boundary.PERIODIC)
        eigen_error = float(
            np.max(
                np.abs(
                    np.sort(np.linalg.eigvalsh(cyclic))
                    - np.sort(periodic_laplacian_eigenvalues(M, config.h))
                )
            )
        )
        ladder, _ = phase_ladder(n_x, 1)
        qft_counts = gate_counter()(qft_circuit(n_x))
        rows.append(
            (
                n_x,
                verify_shift_diagonalization(n_x),
                _circuit_shift_error(n_x),
                eigen_error,
                len(ladder),
                qft_counts.get("CP", 0),
            )
        )
    header = (
        "n_x",
        "max_error",
        "circuit_error",
        "fd_eigen_error",
        "ladder_gates",
        "qft_phase_gates",
    )
    return ExperimentResult(tables={"shift": Table(header, rows)}, measures={})


@driver("splitting_verify")
def run_splitting_verify(
    config: ExperimentConfig, rng: np.random.Generator
) -> ExperimentResult:
    stable_rows: list[Row] = []
    unstable_rows: list[Row] = []
    for instance in range(config.instances):
        split = random_stable_split(config.n, rng)
        u0 = random_vector(config.n, rng)
        final = lie_split_ode(split, u0, config.dt, config.steps)[-1]
        stable_rows.append(
            (
                instance,
                verify_splitting_exactness(split, u0, config.dt, config.steps),
                splitting_probability(split, u0, config.dt, config.steps),
                probability_formula(u0, final),
            )
        )
        if config.unstable_shift > 0:
            unstable = random_unstable_split(config.n, rng, config.unstable_shift)
            unstable_rows.append(
                (
                    instance,
                    spectral_data(unstable).lambda_plus,
                    verify_splitting_exactness(
                        unstable, u0, config.dt, config.steps, shifted=True
                    ),
                )
            )
    tables = {
        "stable": Table(
            ("instance", "deviation", "probability", "probability_formula"),
            stable_rows,
        )
    }
    if unstable_rows:
        tables["unstable"] = Table(
            ("instance", "lambda_plus", "deviation"), unstable_rows
        )
    return ExperimentResult(
        tables=tables,
        measures={"max_deviation": max(row[1] for row in stable_rows)},
    )


# output


def tool_version() -> str:
    try:
        return version("schrodsim")
    except PackageNotFoundError:
        return "unknown"


def run(config: ExperimentConfig) -> list[Path]:
    """Run one experiment and write its CSV tables, text files and manifest.

    Returns the written paths; the same config and seed give byte-identical
    CSV files.
    """
    parameters = resolved_parameters(config)
    log_parameters(config.experiment, **parameters)
    result = drivers[config.experiment](config, np.random.default_rng(config.seed))

    digest = config_digest(parameters)
    provenance = {
        "tool": f"schrodsim {tool_version()}",
        "experiment": config.experiment,
        "config_sha256": digest,
    }
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    report = get_logger(colon_delimit)

    written: list[Path] = []
    for name, table in result.tables.items():
        path = out / f"{config.experiment}_{name}.csv"
        path.write_text(
            render_csv(list(table.header), table.rows, provenance), encoding="utf-8"
        )
        report("wrote", str(path))
        written.append(path)
    for name, text in result.texts.items():
        path = out / f"{config.experiment}_{name}.txt"
        path.write_text(text, encoding="utf-8")
        report("wrote", str(path))
        written.append(path)

    manifest_path = out / f"{config.experiment}_manifest.json"
    manifest = {
        **provenance,
        "parameters": parameters,
        "measures": result.measures,
        "files": [path.name for path in written],
    }
    manifest_path.write_text(render_manifest(manifest), encoding="utf-8")
    report("wrote", str(manifest_path))
    return [*written, manifest_path]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schrodsim",
        description="Schrödingerization experiments for linear ODEs and Fokker-Planck",
    )
    parser.add_argument("experiment", choices=sorted(drivers))
    parser.add_argument("--config", help="JSON document with run parameters")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="seed for random instances")
    parser.add_argument("--verbose", action="store_true", help="log at INFO level")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    report_error = get_logger(dash_delimit, logging.ERROR)
    try:
        document = read_config(args.config) if args.config else {}
        run(load_config(args.experiment, document, seed=args.seed, out=args.out))
    except ResourceError as error:
        report_error("resource cap", str(error))
        return 3
    except (ParameterError, DimensionError, PreconditionError) as error:
        report_error("invalid run", str(error))
        return 2
    except SchrodsimError as error:
        report_error("numerical failure", str(error))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
