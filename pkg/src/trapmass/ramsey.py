"""Exact Ramsey interference traces Tr{U_1(t) rho U_0^dag(t)}.

Geometry convention: the particle is prepared in the trap of the ground
internal level, whose center sits a distance x0 from the center of the
excited-level trap. The default x0 = g/omega0^2 reproduces the standard
gravitational-sag separation; x0 = 0 gives the gravity-free case. The mode
basis is that of the ground-level trap, so U_0_bounded is diagonal and the
excited-level bounded Hamiltonian is

    H_1b = hbar omega_1 (a_1^dag a_1 + 1/2),
    a_1  = cosh(r) a - sinh(r) a^dag + sqrt(M_1 omega_1 / 2 hbar) x0.

The enormous rest-energy phases enter only through the cancellation-safe
offset gap (see model.offset_gap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock, model
from .errors import DimensionMismatch, GridTooCoarse
from .states import CMState, fock_state, mixed_state, pure_state

_PHASE_JUMP_TOL = math.pi * (1.0 - 1e-9)


@dataclass(frozen=True)
class RamseyTrace:
    """Complex interference trace over a time grid plus derived series.

    probability = 1/2 + 1/2 Re(trace) is the ground-level detection
    probability after the second pi/2 pulse. When corotating is True the
    internal phase omega_c t has been removed from trace/phase/probability
    (a plotting frame, not the lab-frame signal).
    """

    times: np.ndarray
    trace: np.ndarray
    probability: np.ndarray
    visibility: np.ndarray
    phase: np.ndarray
    level_pair: tuple[int, int]
    x0: float
    dim: int
    corotating: bool = False


@dataclass(frozen=True)
class _SpectralPair:
    """Eigendecompositions of both bounded Hamiltonians (energies in rad/s)."""

    w0: np.ndarray           # H_0b eigenfrequencies (exact: omega0 (n + 1/2))
    w1: np.ndarray
    V1: np.ndarray
    dim: int
    gap_rate: float          # (offset_1 - offset_0) / hbar


def _excited_bounded_hamiltonian(
    ws: fock.FockWorkspace, frame: model.ModeFrame, x0: float
) -> np.ndarray:
    alpha = math.sqrt(frame.M_i * frame.omega_i / (2.0 * ws.params.hbar)) * x0
    a1 = (
        math.cosh(frame.r_i) * ws.a
        - math.sinh(frame.r_i) * ws.adag
        + alpha * np.eye(ws.dim)
    )
    return ws.params.hbar * frame.omega_i * (
        a1.conj().T @ a1 + 0.5 * np.eye(ws.dim)
    )


def _spectral_pair(params: model.SystemParams, level: int, x0: float, dim: int) -> _SpectralPair:
    ws = fock.build_workspace(params, dim)
    frame = model.derive_mode_frame(params, level)
    H1 = _excited_bounded_hamiltonian(ws, frame, x0)
    evals, V1 = np.linalg.eigh(H1)
    w0 = params.omega0 * (np.arange(dim) + 0.5)
    return _SpectralPair(
        w0=w0,
        w1=evals / params.hbar,
        V1=V1,
        dim=dim,
        gap_rate=model.offset_gap(params, level, 0) / params.hbar,
    )


def _embed_state(state: CMState, dim: int) -> CMState:
    if dim < state.dim:
        raise DimensionMismatch(
            f"workspace dim {dim} smaller than state dim {state.dim}"
        )
    if dim == state.dim:
        return state
    if state.is_pure:
        vec = np.zeros(dim, dtype=complex)
        vec[: state.dim] = state.data
        return pure_state(vec, state.prepared_level)
    rho = np.zeros((dim, dim), dtype=complex)
    rho[: state.dim, : state.dim] = state.data
    return mixed_state(rho, state.prepared_level)


def _bounded_trace(sp: _SpectralPair, state: CMState, times: np.ndarray) -> np.ndarray:
    """Tr{U_1b rho U_0b^dag} for each t; O(dim^2) per time point.

    U_0b is diagonal in the Fock basis; U_1b is applied through the H_1b
    eigenbasis. For pure psi: (U_0b psi)^dag (U_1b psi); for mixed rho the
    double sum over both eigenbases is contracted as a Hadamard product.
    """
    if state.is_pure:
        psi = state.data
        c1 = sp.V1.conj().T @ psi
        # B[m, n] = conj(psi_m) V1[m, n] c1_n; trace(t) = e0(t) . (B @ e1(t))
        B = psi.conj()[:, None] * sp.V1 * c1[None, :]
        out = np.empty(times.size, dtype=complex)
        for idx, t in enumerate(times):
            e0 = np.exp(1j * sp.w0 * t)
            e1 = np.exp(-1j * sp.w1 * t)
            out[idx] = e0 @ (B @ e1)
        return out
    rho = state.data
    # Tr = sum_{mn} C[m, n] exp(-i w1_m t) exp(+i w0_n t),
    # C = (V1^dag rho) hadamard (V1^T) summed appropriately.
    C = (sp.V1.conj().T @ rho) * sp.V1.T
    out = np.empty(times.size, dtype=complex)
    for idx, t in enumerate(times):
        e1 = np.exp(-1j * sp.w1 * t)
        e0 = np.exp(1j * sp.w0 * t)
        out[idx] = e1 @ (C @ e0)
    return out


def _resolve_x0(params: model.SystemParams, x0) -> float:
    if x0 is None:
        return params.g / params.omega0**2
    return float(x0)


def ramsey_trace(
    params: model.SystemParams,
    state: CMState,
    times,
    level_pair: tuple[int, int] = (0, 1),
    x0: float | None = None,
    dim: int | None = None,
    dim_tol: float = 1e-8,
    dim_max: int = fock.DIM_MAX_DEFAULT,
    corotating: bool = False,
) -> RamseyTrace:
    """Exact interference trace for an arbitrary initial CM state.

    dim=None converges the truncation on the doubling schedule (bounded
    trace at the latest time must move by < dim_tol between sizes); an
    explicit dim skips convergence. x0=None uses the gravitational-sag
    separation g/omega0^2.
    """
    if level_pair[0] != 0:
        raise DimensionMismatch(
            f"level pair must reference the ground mode basis, got {level_pair}"
        )
    level = level_pair[1]
    params._check_level(level)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    x0v = _resolve_x0(params, x0)

    if dim is None:
        t_ref = float(np.max(np.abs(times))) if times.size else 0.0

        def probe(d: int) -> complex:
            sp = _spectral_pair(params, level, x0v, d)
            st = _embed_state(state, d)
            return complex(_bounded_trace(sp, st, np.array([t_ref]))[0])

        dim = fock.converge_dim(probe, dim_tol, dim_max)
        dim = max(dim, state.dim)
    sp = _spectral_pair(params, level, x0v, dim)
    st = _embed_state(state, dim)

    tr = _bounded_trace(sp, st, times)
    # Safe relative scalar phase: exp(-i (offset_1 - offset_0) t / hbar).
    tr = tr * np.exp(-1j * ((sp.gap_rate * times) % (2.0 * math.pi)))
    if corotating:
        tr = tr * np.exp(1j * ((params.omega_c(level) * times) % (2.0 * math.pi)))

    probability = 0.5 + 0.5 * np.real(tr)
    visibility = np.abs(tr)
    phase = np.unwrap(np.angle(tr)) if times.size > 1 else np.angle(tr)
    return RamseyTrace(
        times=times,
        trace=tr,
        probability=probability,
        visibility=visibility,
        phase=phase,
        level_pair=(0, level),
        x0=x0v,
        dim=dim,
        corotating=corotating,
    )


def fock_revival_values(
    params: model.SystemParams,
    n0: int,
    x0: float | None = None,
    dim: int | None = None,
    level: int = 1,
) -> tuple[float, float]:
    """Visibility at the canonical times (pi/omega_1, 2*pi/omega_1) for |n0>.

    At 2*pi/omega_1 the excited-mode propagator is a global phase, so the
    value is 1 for any n0; at pi/omega_1 it is 1 exactly when x0 = 0 (pure
    squeezing preserves parity).
    """
    frame = model.derive_mode_frame(params, level)
    if dim is None:
        dim = max(256, 8 * (n0 + 1))
    state = fock_state(dim, n0)
    t_rev = math.pi / frame.omega_i
    trace = ramsey_trace(
        params, state, [t_rev, 2.0 * t_rev], level_pair=(0, level), x0=x0, dim=dim
    )
    return float(trace.visibility[0]), float(trace.visibility[1])


def extract_visibility_phase(trace: RamseyTrace) -> tuple[np.ndarray, np.ndarray]:
    """(|trace|, continuously unwrapped arg(trace)).

    Raises GridTooCoarse when adjacent raw phases jump by >= pi, which makes
    unwrapping ambiguous; the caller must refine the time grid.
    """
    z = np.asarray(trace.trace)
    visibility = np.abs(z)
    if z.size < 2:
        return visibility, np.angle(z)
    raw = np.angle(z)
    jumps = np.angle(z[1:] * np.conj(z[:-1]))
    if np.any(np.abs(jumps) >= _PHASE_JUMP_TOL):
        worst = float(np.max(np.abs(jumps)))
        raise GridTooCoarse(
            f"adjacent phase jump {worst:.6f} rad >= pi; refine the time grid"
        )
    phase = np.concatenate(([raw[0]], raw[0] + np.cumsum(jumps)))
    return visibility, phase


def uniform_time_grid(
    params: model.SystemParams,
    t_max: float,
    level: int = 1,
    points_per_period: int = 50,
    corotating: bool = False,
) -> np.ndarray:
    """Uniform grid on [0, t_max] resolving the fastest phase in the trace.

    In the lab frame that is the internal rate |offset gap|/hbar; in the
    co-rotating frame only the trap frequencies remain.
    """
    rates = [params.omega0, model.derive_mode_frame(params, level).omega_i]
    if not corotating:
        rates.append(abs(model.offset_gap(params, level, 0)) / params.hbar)
    period = 2.0 * math.pi / max(rates)
    n = max(2, int(math.ceil(points_per_period * t_max / period)) + 1)
    return np.linspace(0.0, t_max, n)
