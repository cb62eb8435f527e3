"""Clock observables: transition energy gaps, fractional frequency shifts,
the gravitational lower bound with its optimal trap frequency, thermal-state
shifts, and the joint internal/center-of-mass thermal state.

Angular frequencies are in rad/s throughout; "omega0 ~ 1 MHz" means
1e6 rad/s (the 2*pi convention changes nothing at the order-of-magnitude
level the reference values are quoted at).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import constants, fock, model
from .errors import (
    DegenerateLevels,
    GravityNotSupported,
    OptimizerFailure,
    TruncationInsufficient,
    ZeroGravity,
)

_OMEGA_BRACKET = (1.0, 1e9)   # rad/s window for the numerical cross-check
_CROSSCHECK_RTOL = 1e-9
# Near a quadratic optimum the argument is only locatable to ~sqrt(eps)
# relative even when the optimal value is exact to machine precision.
_OMEGA_CROSSCHECK_RTOL = 1e-6


@dataclass(frozen=True)
class ShiftReport:
    """Transition energy gap and its fractional-shift decomposition.

    fractional_shift = gap/E_i - 1. components holds the two lowest-order
    contributions: gravitational = -g^2/omega0^2 c^2 and
    time_dilation = -(hbar omega0 / 2 M0 c^2)(n + 1/2).
    """

    level: int
    n: float
    exact_gap: float
    lowest_order_gap: float
    fractional_shift: float
    components: dict


@dataclass(frozen=True)
class OptimalPoint:
    """Trap frequency minimizing the total shift, and the minimum value."""

    n: float
    omega_min: float
    delta_min: float


def _lowest_order_gap(params: model.SystemParams, i: int, n: float) -> tuple[float, dict]:
    E_i = params.levels[i]
    w0 = params.omega0
    grav = -params.g**2 / (w0**2 * params.c**2)
    dilation = -(params.hbar * w0 / (2.0 * params.M0 * params.c**2)) * (n + 0.5)
    return E_i * (1.0 + grav + dilation), {
        "gravitational": grav,
        "time_dilation": dilation,
    }


def energy_gap(params: model.SystemParams, i: int, n: float) -> ShiftReport:
    """Exact and lowest-order transition energy between levels i and 0 at
    CM occupation n.

    Exact gap: (offset_i - offset_0) + hbar (omega_i - omega_0)(n + 1/2),
    evaluated without rest-mass cancellation.
    """
    params._check_level(i)
    if n < 0:
        raise ValueError(f"occupation must be >= 0, got {n}")
    E_i = params.levels[i]
    if E_i == 0.0:
        raise DegenerateLevels(f"levels {i} and 0 are degenerate; shift undefined")
    # gap - E_i assembled from small differences only: the fractional shift
    # (~1e-19 in SI regimes) would vanish entirely if computed as
    # gap/E_i - 1 in doubles.
    Mi = params.mass(i)
    grav_part = -(params.g**2 / (2.0 * params.k)) * (Mi - params.M0) * (Mi + params.M0)
    # omega_i - omega_0 = omega_0 (sqrt(M0/M_i) - 1), cancellation-free.
    rel_mass = (Mi - params.M0) / params.M0
    domega = params.omega0 * math.expm1(-0.5 * math.log1p(rel_mass))
    dilation_part = params.hbar * domega * (n + 0.5)
    gap_minus_E = grav_part + dilation_part
    low, comps = _lowest_order_gap(params, i, n)
    return ShiftReport(
        level=i,
        n=float(n),
        exact_gap=E_i + gap_minus_E,
        lowest_order_gap=low,
        fractional_shift=gap_minus_E / E_i,
        components=comps,
    )


def _shift_at_omega(params: model.SystemParams, omega0: float, n: float) -> float:
    """Lowest-order fractional shift as a function of trap frequency."""
    return (
        -params.g**2 / (omega0**2 * params.c**2)
        - (params.hbar * omega0 / (2.0 * params.M0 * params.c**2)) * (n + 0.5)
    )


def minimal_shift(params: model.SystemParams, n: float = 0.0) -> OptimalPoint:
    """Closed-form optimum of the lowest-order shift over trap frequency.

    omega_min = (4 g^2 M0 / hbar (n+1/2))^(1/3) maximizes the (negative)
    shift; delta_min = -(3/(2*2^(1/3))) (hbar g (n+1/2) / c^3 M0)^(2/3).
    A bounded numerical minimization over omega0 in [1, 1e9] rad/s must
    reproduce the closed-form bound to relative 1e-9 (the frequency itself
    to 1e-6: near a quadratic optimum the argument is only locatable to
    ~sqrt(eps)) or the call fails.
    """
    if params.g <= 0:
        raise ZeroGravity("shift is monotone in omega0 when g = 0; no minimum")
    if n < 0:
        raise ValueError(f"occupation must be >= 0, got {n}")
    g, M0, hbar, c = params.g, params.M0, params.hbar, params.c
    half = n + 0.5
    omega_min = (4.0 * g**2 * M0 / (hbar * half)) ** (1.0 / 3.0)
    delta_min = -(3.0 / (2.0 * 2.0 ** (1.0 / 3.0))) * (
        hbar * g * half / (c**3 * M0)
    ) ** (2.0 / 3.0)

    res = minimize_scalar(
        lambda w: -_shift_at_omega(params, w, n),
        bounds=_OMEGA_BRACKET,
        method="bounded",
        options={"xatol": 1e-10 * omega_min},
    )
    if not res.success:
        raise OptimizerFailure(f"numerical cross-check failed: {res.message}")
    w_num, d_num = float(res.x), -float(res.fun)
    if not (
        math.isclose(w_num, omega_min, rel_tol=_OMEGA_CROSSCHECK_RTOL)
        and math.isclose(d_num, delta_min, rel_tol=_CROSSCHECK_RTOL)
    ):
        raise OptimizerFailure(
            f"closed form ({omega_min:.12e}, {delta_min:.12e}) disagrees with "
            f"numerical optimum ({w_num:.12e}, {d_num:.12e})"
        )
    return OptimalPoint(n=float(n), omega_min=omega_min, delta_min=delta_min)


def thermal_shift(params: model.SystemParams, T: float, i: int = 1) -> ShiftReport:
    """Shift for a thermal CM distribution via <n> = k_B T / hbar omega0.

    High-occupation approximation; the time-dilation component approaches
    -k_B T / 2 M0 c^2.
    """
    if T <= 0:
        raise ValueError(f"temperature must be > 0, got {T}")
    n_mean = constants.K_B * T / (params.hbar * params.omega0)
    return energy_gap(params, i, n_mean)


@dataclass(frozen=True)
class JointThermalState:
    """Gibbs state of internal level + CM mode at temperature T (g = 0).

    populations[k] is the internal-level weight; cm_blocks[k] is the CM
    density matrix of the level-k conditional state, expressed in the
    ground-mode Fock basis (a squeezed thermal state for k > 0).
    """

    temperature: float
    populations: np.ndarray
    cm_blocks: list
    dim: int

    def cm_reduced(self) -> np.ndarray:
        """CM state after tracing out the internal level."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for p, block in zip(self.populations, self.cm_blocks):
            out += p * block
        return out


def level_populations(params: model.SystemParams, T: float) -> np.ndarray:
    """Internal-level weights p_k = e^{-beta(E_k + hbar omega_k/2)} /
    (1 - e^{-beta hbar omega_k}) / Z."""
    beta = 1.0 / (constants.K_B * T)
    weights = []
    for k in range(params.n_levels):
        wk = model.derive_mode_frame(params, k).omega_i
        # Exponents are shifted by the level-0 zero point so SI rest-energy
        # scales never enter: only gaps matter for the ratio.
        gap = model.offset_gap(params, k, 0) + 0.5 * params.hbar * (
            wk - params.omega0
        )
        weights.append(
            math.exp(-beta * gap) / (1.0 - math.exp(-beta * params.hbar * wk))
        )
    weights = np.asarray(weights)
    return weights / weights.sum()


def thermal_state(params: model.SystemParams, T: float, dim: int) -> JointThermalState:
    """Joint internal/CM Gibbs state at temperature T, g = 0 only.

    Each CM block is exp(-beta hbar omega_k n_k)-thermal in the level-k
    mode; expressed in the ground-mode basis it becomes a squeezed thermal
    state, built here as S(r_k)^dag rho_th S(r_k) with truncated matrices.
    """
    if params.g != 0.0:
        raise GravityNotSupported("thermal_state requires g = 0")
    if T <= 0:
        raise ValueError(f"temperature must be > 0, got {T}")
    beta = 1.0 / (constants.K_B * T)
    pops = level_populations(params, T)
    ws = fock.build_workspace(params, dim)
    blocks = []
    for k in range(params.n_levels):
        frame = model.derive_mode_frame(params, k)
        q = math.exp(-beta * params.hbar * frame.omega_i)
        probs = (1.0 - q) * q ** np.arange(dim)
        deficit = 1.0 - probs.sum()
        if deficit > 1e-6:
            raise TruncationInsufficient(
                f"level {k}: thermal tail {deficit:.3e} beyond dim {dim}"
            )
        rho_k = np.diag(probs).astype(complex)
        if frame.r_i != 0.0:
            # Mode-k thermal state seen from the ground mode: rotate the
            # diagonal thermal matrix with the Bogoliubov squeeze.
            Sk = fock.squeeze_matrix(ws, frame.r_i)
            rho_k = Sk.conj().T @ rho_k @ Sk
        blocks.append(rho_k)
    return JointThermalState(
        temperature=float(T), populations=pops, cm_blocks=blocks, dim=dim
    )
