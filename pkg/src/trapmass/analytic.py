"""Closed-form oracles and small-parameter approximations.

The exact vacuum/coherent interference amplitude is evaluated from the
harmonic-oscillator propagator kernel (a 2D Gaussian integral over the
initial and final ground-trap Gaussians). Its modulus is

    V = sqrt(2S) * exp(-a0 x0^2 sin^2(th/2) / (sin^2(th/2) + S^2 cos^2(th/2)))
        / (4 S^2 + (1 - S^2)^2 sin^2(th))^(1/4),        th = omega_1 t,

and the phase is assembled with a continuous square-root branch so the
result is smooth through every revival. The full trace multiplies this
bounded amplitude by the scalar-offset phase exp(-i (offset_1-offset_0) t /
hbar), computed through the cancellation-safe gap.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import model
from .errors import (
    DimensionMismatch,
    NotNormalized,
    OptimizerFailure,
    ParamMismatch,
    RegimeWarning,
    TruncationInsufficient,
)
from .fock import annihilation
from .states import CMState

_SMALL_REGIME = 1e-3
_ROUTE_TOL = 1e-10


@dataclass(frozen=True)
class VacuumAmplitudeParams:
    """Dimensionless inputs of the closed-form vacuum/coherent amplitude.

    S = sqrt(M0/M1); a0 = M0 omega0 / hbar; x0 is the trap-center
    separation (only x0^2 enters the visibility, the sign enters the
    phase through nothing - it is recorded for provenance). phi0_rate and
    phi1_rate are the scalar-offset phase rates offset_i/hbar; gap_rate is
    their difference evaluated without cancellation and is the only
    combination the amplitude uses.
    """

    S: float
    a0: float
    x0: float
    omega0: float
    omega1: float
    phi0_rate: float
    phi1_rate: float
    gap_rate: float

    def __post_init__(self):
        if not 0.0 < self.S:
            raise ParamMismatch(f"S must be positive, got {self.S}")

    @classmethod
    def from_system(
        cls, params: model.SystemParams, level: int = 1, x0: float | None = None
    ) -> "VacuumAmplitudeParams":
        frame = model.derive_mode_frame(params, level)
        if x0 is None:
            x0 = params.g / params.omega0**2
        S = math.sqrt(params.M0 / frame.M_i)
        # Consistency probe: S must match both the mass ratio and the
        # frequency ratio omega_1/omega_0.
        if not math.isclose(S, frame.omega_i / params.omega0, rel_tol=1e-12):
            raise ParamMismatch("mass and frequency ratios disagree")
        frame0 = model.derive_mode_frame(params, 0)
        return cls(
            S=S,
            a0=params.M0 * params.omega0 / params.hbar,
            x0=float(x0),
            omega0=params.omega0,
            omega1=frame.omega_i,
            phi0_rate=frame0.offset_i / params.hbar,
            phi1_rate=frame.offset_i / params.hbar,
            gap_rate=model.offset_gap(params, level, 0) / params.hbar,
        )


def _continuous_sqrt(W: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """sqrt of W = cos(th) + i sigma sin(th) on the branch that follows the
    winding of exp(i th), so the amplitude is continuous in t."""
    ref = W * np.exp(-1j * theta)
    delta = np.arctan2(np.imag(ref), np.real(ref))
    return np.sqrt(np.abs(W)) * np.exp(0.5j * (theta + delta))


def bounded_amplitude(vap: VacuumAmplitudeParams, t) -> np.ndarray:
    """<0| U_0b^dag(t) U_1b(t) |0> for the ground-trap vacuum: the complete
    amplitude minus the scalar-offset phase. Exact for all t and x0."""
    t = np.asarray(t, dtype=float)
    theta = vap.omega1 * t
    sigma = 0.5 * (vap.S + 1.0 / vap.S)
    W = np.cos(theta) + 1j * sigma * np.sin(theta)
    sh, ch = np.sin(0.5 * theta), np.cos(0.5 * theta)
    den = vap.S**2 * ch**2 + sh**2
    # Regular everywhere: den >= min(1, S^2) > 0.
    expo = -vap.a0 * vap.x0**2 * (sh**2 + 1j * vap.S * sh * ch) / den
    return np.exp(1j * vap.omega0 * t / 2.0) * np.exp(expo) / _continuous_sqrt(W, theta)


def vacuum_coherent_amplitude(
    params: model.SystemParams,
    x0: float | None,
    t,
    level: int = 1,
) -> np.ndarray:
    """Full closed-form trace V(t) e^{i phi(t)} for the vacuum of the
    ground trap displaced by x0 from the excited-trap center.

    Includes the relative scalar phase Delta_phi = (phi0 - phi1) t. Accepts
    a SystemParams (x0=None means g/omega0^2) or a prebuilt
    VacuumAmplitudeParams (pass x0=None).
    """
    if isinstance(params, VacuumAmplitudeParams):
        vap = params if x0 is None else VacuumAmplitudeParams(
            S=params.S, a0=params.a0, x0=float(x0), omega0=params.omega0,
            omega1=params.omega1, phi0_rate=params.phi0_rate,
            phi1_rate=params.phi1_rate, gap_rate=params.gap_rate,
        )
    else:
        vap = VacuumAmplitudeParams.from_system(params, level=level, x0=x0)
    t = np.asarray(t, dtype=float)
    rel = np.exp(-1j * ((vap.gap_rate * t) % (2.0 * math.pi)))
    return bounded_amplitude(vap, t) * rel


def closed_form_visibility(S: float, a0: float, x0: float, theta) -> np.ndarray:
    """|amplitude| as an explicit function of th = omega_1 t, with the
    removable singularities at th in 2*pi*Z already folded in."""
    theta = np.asarray(theta, dtype=float)
    sh2 = np.sin(0.5 * theta) ** 2
    ch2 = 1.0 - sh2
    expo = -a0 * x0**2 * sh2 / (sh2 + S**2 * ch2)
    pref = math.sqrt(2.0 * S) / (
        4.0 * S**2 + (1.0 - S**2) ** 2 * np.sin(theta) ** 2
    ) ** 0.25
    return pref * np.exp(expo)


def small_regime_min_visibility(S: float, a0: float, x0: float) -> float:
    """V(pi/2 omega_1) in the small-x0, small-S regime."""
    return math.exp(-a0 * x0**2 / (1.0 + S**2)) * math.sqrt(2.0 * S / (1.0 + S**2))


def visibility_extrema(
    params: model.SystemParams, x0: float | None = None, level: int = 1
) -> tuple[float, float, float, float]:
    """(t_min, V_min, t_rev, V_rev) of the closed-form visibility.

    t_rev = pi/omega_1 with V_rev = exp(-a0 x0^2) exactly; t_min is found
    by bounded scalar minimization on (0, pi/omega_1).
    """
    vap = VacuumAmplitudeParams.from_system(params, level=level, x0=x0)
    t_rev = math.pi / vap.omega1
    v_rev = math.exp(-vap.a0 * vap.x0**2)

    def objective(t: float) -> float:
        return float(closed_form_visibility(vap.S, vap.a0, vap.x0, vap.omega1 * t))

    res = minimize_scalar(
        objective,
        bounds=(1e-9 * t_rev, (1.0 - 1e-9) * t_rev),
        method="bounded",
        options={"xatol": 1e-12 * t_rev},
    )
    if not res.success:
        raise OptimizerFailure(f"visibility minimization failed: {res.message}")
    return float(res.x), float(res.fun), t_rev, v_rev


@dataclass(frozen=True)
class EffectiveShift:
    """Mean clock-frequency shift (rad/s) and its decomposition."""

    mean_shift: float
    A0_term: complex
    Ag_term: complex
    delta_omega: float
    visibility_quadratic_coefficient: float | None = None


def moments_from_state(state: CMState) -> dict:
    """First and second ladder moments {<a>, <a^2>, <a^dag^2>, <n>}."""
    a = annihilation(state.dim)
    return {
        "a": state.expectation(a),
        "a2": state.expectation(a @ a),
        "adag2": state.expectation(a.conj().T @ a.conj().T),
        "n": state.expectation(a.conj().T @ a).real,
    }


def effective_shift(
    params: model.SystemParams, moments: dict, t: float, level: int = 1
) -> EffectiveShift:
    """First-order mean frequency shift of the internal transition.

    mean_shift = -omega_c g^2/(omega0^2 c^2) + Delta_omega (<n>+1/2)
                 + Re[A0 + alpha_g omega_1 Ag]
    with the squeeze/displacement terms

      A0 = omega_1 sinh^2 r
           - (omega_1/2) sinh(2r) (<a^2>(1 - i t omega_0) + <a^dag2>(1 + i t omega_0)),
      Ag = e^{-r} (1 + i t omega_0/2) <a^dag> + e^{-r} (1 - i t omega_0/2) <a>
           + alpha_g.

    Valid to first order in r and alpha_g; a RegimeWarning is emitted
    outside that regime.
    """
    frame = model.derive_mode_frame(params, level)
    r, alpha_g = frame.r_i, frame.alpha_gi
    if abs(r) >= _SMALL_REGIME or abs(alpha_g) >= _SMALL_REGIME:
        warnings.warn(
            f"r={r:.3e}, alpha_g={alpha_g:.3e} outside the first-order regime",
            RegimeWarning,
        )
    w0, w1 = params.omega0, frame.omega_i
    a_mean = complex(moments["a"])
    a2 = complex(moments["a2"])
    adag2 = complex(moments["adag2"])
    n_mean = float(np.real(moments["n"]))

    delta_omega = w1 - w0
    A0 = w1 * math.sinh(r) ** 2 - 0.5 * w1 * math.sinh(2.0 * r) * (
        a2 * (1.0 - 1j * t * w0) + adag2 * (1.0 + 1j * t * w0)
    )
    Ag = (
        math.exp(-r) * (1.0 + 0.5j * t * w0) * np.conj(a_mean)
        + math.exp(-r) * (1.0 - 0.5j * t * w0) * a_mean
        + alpha_g
    )
    mean = (
        -params.omega_c(level) * params.g**2 / (w0**2 * params.c**2)
        + delta_omega * (n_mean + 0.5)
        + float(np.real(A0 + alpha_g * w1 * Ag))
    )
    return EffectiveShift(
        mean_shift=mean, A0_term=complex(A0), Ag_term=complex(Ag),
        delta_omega=delta_omega,
    )


@dataclass(frozen=True)
class ApproxVisibility:
    """Quadratic-order visibility for Fock-diagonal states.

    quadratic uses the full variance of (omega_1 n_1 - omega_0 n_0);
    thermal_form is the simplified squeezing-free expression
    1 - (omega_0 Dn0 t hbar omega_c / 2 M0 c^2)^2
      - (omega_1 alpha_g t)^2 (2 <n0> + 1).
    """

    quadratic: np.ndarray
    thermal_form: np.ndarray
    variance: float


def approx_visibility(
    params: model.SystemParams, populations, t, level: int = 1
) -> ApproxVisibility:
    """V = 1 - t^2 Var(omega_1 n_1 - omega_0 n_0)/2 for a state diagonal in
    the ground-mode Fock basis with the given populations."""
    p = np.asarray(populations, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise NotNormalized("populations must be a non-empty 1-d sequence")
    if np.any(p < -1e-12):
        raise NotNormalized("populations must be non-negative")
    if abs(p.sum() - 1.0) > 1e-10:
        raise NotNormalized(f"populations sum to {p.sum()!r}, expected 1")
    t = np.asarray(t, dtype=float)

    frame = model.derive_mode_frame(params, level)
    dim = p.size + 8  # buffer so truncated products are exact on the support
    a = annihilation(dim)
    Ak = (
        math.cosh(frame.r_i) * a
        - math.sinh(frame.r_i) * a.conj().T
        + frame.alpha_gi * np.eye(dim)
    )
    O = frame.omega_i * (Ak.conj().T @ Ak) - params.omega0 * (a.conj().T @ a)
    diag_O = np.real(np.diag(O))[: p.size]
    diag_O2 = np.real(np.diag(O @ O))[: p.size]
    mean = float(p @ diag_O)
    var = float(p @ diag_O2) - mean**2

    ns = np.arange(p.size)
    n_mean = float(p @ ns)
    dn = math.sqrt(max(float(p @ ns**2) - n_mean**2, 0.0))
    omega_c = params.omega_c(level)
    thermal = (
        1.0
        - (params.omega0 * dn * t * params.hbar * omega_c
           / (2.0 * params.M0 * params.c**2)) ** 2
        - (frame.omega_i * frame.alpha_gi * t) ** 2 * (2.0 * n_mean + 1.0)
    )
    return ApproxVisibility(
        quadratic=1.0 - 0.5 * t**2 * var,
        thermal_form=thermal,
        variance=var,
    )


def number_operator_moments(frame: model.ModeFrame, state: CMState) -> dict:
    """{<n_k>, <n_k^2>, <[n_0, n_k]>} via two independent routes.

    Route 1 builds n_k from the exact normal-ordered expansion

        n_k = cosh(2r) n_0 + sinh^2 r - (sinh 2r / 2)(a^2 + a^dag2)
              + alpha_g e^{-r} (a + a^dag) + alpha_g^2,

    route 2 multiplies the truncated Bogoliubov ladder matrices directly.
    They must agree within 1e-10; disagreement means the state has weight
    at the truncation edge.
    """
    dim = state.dim
    a = annihilation(dim)
    adag = a.conj().T
    eye = np.eye(dim)
    r, alpha = frame.r_i, frame.alpha_gi

    Nk_exp = (
        math.cosh(2.0 * r) * (adag @ a)
        + math.sinh(r) ** 2 * eye
        - 0.5 * math.sinh(2.0 * r) * (a @ a + adag @ adag)
        + alpha * math.exp(-r) * (a + adag)
        + alpha**2 * eye
    )
    Ak = math.cosh(r) * a - math.sinh(r) * adag + alpha * eye
    Nk_mat = Ak.conj().T @ Ak
    N0 = adag @ a

    out = {}
    pairs = {
        "n_k": (Nk_exp, Nk_mat),
        "n_k2": (Nk_exp @ Nk_exp, Nk_mat @ Nk_mat),
        "comm_n0_nk": (N0 @ Nk_exp - Nk_exp @ N0, N0 @ Nk_mat - Nk_mat @ N0),
    }
    for key, (op_a, op_b) in pairs.items():
        va = state.expectation(op_a)
        vb = state.expectation(op_b)
        scale = max(abs(va), abs(vb), 1.0)
        if abs(va - vb) > _ROUTE_TOL * scale:
            raise TruncationInsufficient(
                f"{key}: expansion vs matrix routes differ by {abs(va - vb):.3e}"
            )
        out[key] = va if key == "comm_n0_nk" else float(np.real(va))
    return out
