import os
from typing import Any

from decorators import configure_experiment_decorator
from errors import ConfigError

THREADS_VARIABLE = "SCHRODSIM_THREADS"
DP_REFINEMENT = [2.0**-k for k in range(5, 10)]


def thread_count() -> int:
    raw = os.environ.get(THREADS_VARIABLE, "1")
    try:
        count = int(raw)
    except ValueError as error:
        raise ConfigError(THREADS_VARIABLE, "must be a positive integer") from error
    if count < 1:
        raise ConfigError(THREADS_VARIABLE, "must be a positive integer")
    return count


@configure_experiment_decorator
def configure_ode_schrod(
    n: int = 4,
    instances: int = 20,
    T: float = 1.0,
    dp_list: list[float] | None = None,
    tail_tol: float = 1e-9,
    L0: float = -10.0,
    alpha_left: float = 1.0,
    unstable_shift: float = 0.0,
) -> dict[str, Any]:
    return {
        "n": n,
        "instances": instances,
        "T": T,
        "dp_list": DP_REFINEMENT if dp_list is None else dp_list,
        "tail_tol": tail_tol,
        "L0": L0,
        "alpha_left": alpha_left,
        "unstable_shift": unstable_shift,
    }


@configure_experiment_decorator
def configure_fp_conservation1(
    M: int = 16,
    M_list: list[int] | None = None,
    sigma: float = 1.0,
    sigma_list: list[float] | None = None,
    potential: dict[str, Any] | None = None,
    T: float = 0.02,
    dp_list: list[float] | None = None,
) -> dict[str, Any]:
    return {
        "M": M,
        "M_list": [16, 32, 64] if M_list is None else M_list,
        "sigma": sigma,
        "sigma_list": [0.5, 1.0] if sigma_list is None else sigma_list,
        "potential": {"kind": "cosine"} if potential is None else potential,
        "T": T,
        "dp_list": [0.25, 0.125] if dp_list is None else dp_list,
    }


@configure_experiment_decorator
def configure_fp_conservation2(
    M_list: list[int] | None = None,
    sigma_list: list[float] | None = None,
    potential_list: list[dict[str, Any]] | None = None,
    T: float = 0.5,
    np_points: int = 64,
) -> dict[str, Any]:
    return {
        "M_list": [16, 32, 64] if M_list is None else M_list,
        "sigma_list": [0.5, 1.0] if sigma_list is None else sigma_list,
        "potential_list": (
            [{"kind": "constant"}, {"kind": "cosine"}]
            if potential_list is None
            else potential_list
        ),
        "T": T,
        "np_points": np_points,
    }


@configure_experiment_decorator
def configure_fp_heat_split(
    M: int = 8,
    sigma: float = 1.0,
    potential: dict[str, Any] | None = None,
    T: float = 0.5,
    dt_list: list[float] | None = None,
    np_points: int = 512,
    L0: float = -16.0,
) -> dict[str, Any]:
    return {
        "M": M,
        "sigma": sigma,
        "potential": {"kind": "cosine"} if potential is None else potential,
        "T": T,
        "dt_list": [T / 2**k for k in range(7, 11)] if dt_list is None else dt_list,
        "np_points": np_points,
        "L0": L0,
    }


@configure_experiment_decorator
def configure_fp_fd_circuit(
    n_x: int = 4,
    n_p: int = 10,
    T: float = 0.05,
    n: int = 5,
    kickback_tables: int = 50,
    n_x_split: int = 3,
    n_p_split: int = 4,
) -> dict[str, Any]:
    return {
        "n_x": n_x,
        "n_p": n_p,
        "n_x_split": n_x_split,
        "n_p_split": n_p_split,
        "T": T,
        "n": n,
        "kickback_tables": kickback_tables,
    }


@configure_experiment_decorator
def configure_eig_scan(
    M_list: list[int] | None = None,
    sigma: float = 1.0,
    potential: dict[str, Any] | None = None,
) -> dict[str, Any]:
    return {
        "M_list": [16, 32, 64, 128] if M_list is None else M_list,
        "sigma": sigma,
        "potential": {"kind": "quadratic"} if potential is None else potential,
    }


@configure_experiment_decorator
def configure_shift_verify(
    n_x_list: list[int] | None = None, h: float = 1.0
) -> dict[str, Any]:
    return {"n_x_list": [1, 2, 3, 4, 5, 6] if n_x_list is None else n_x_list, "h": h}


@configure_experiment_decorator
def configure_splitting_verify(
    n: int = 4,
    instances: int = 10,
    dt: float = 0.1,
    steps: int = 10,
    unstable_shift: float = 0.5,
    stage_order: str = "transport_then_phase",
) -> dict[str, Any]:
    return {
        "n": n,
        "instances": instances,
        "dt": dt,
        "steps": steps,
        "unstable_shift": unstable_shift,
        "stage_order": stage_order,
    }


experiment_defaults = {
    "ode_schrod": configure_ode_schrod,
    "fp_conservation1": configure_fp_conservation1,
    "fp_conservation2": configure_fp_conservation2,
    "fp_heat_split": configure_fp_heat_split,
    "fp_fd_circuit": configure_fp_fd_circuit,
    "eig_scan": configure_eig_scan,
    "shift_verify": configure_shift_verify,
    "splitting_verify": configure_splitting_verify,
}
