"""Mixed CM evolution conditioned on the internal level, and Husimi
Q-function diagnostics.

Q convention: Q(beta) = <beta|rho|beta> with no 1/pi prefactor, so the
normalization quadrature is sum(Q) * delta^2 / pi = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock, model
from .errors import (
    InvalidDistribution,
    NonGaussianProfile,
    TruncationInsufficient,
)
from .states import CMState, mixed_state

_EDGE_Q = 1e-8
_COHERENT_DEFICIT = 1e-6
_GRID_START_HALF_WIDTH = 4.0
_GRID_GROWTH = 1.5
_GRID_MAX_HALF_WIDTH = 64.0


@dataclass(frozen=True)
class InternalDistribution:
    """Internal-level probabilities p_k."""

    p: tuple

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise InvalidDistribution("p must be a non-empty 1-d sequence")
        if np.any(p < 0):
            raise InvalidDistribution(f"negative probability in {self.p!r}")
        if abs(p.sum() - 1.0) > 1e-12:
            raise InvalidDistribution(f"probabilities sum to {p.sum()!r}")

    def mean_energy(self, params: model.SystemParams) -> float:
        return float(np.dot(self.p, params.levels[: len(self.p)]))


@dataclass(frozen=True)
class QGrid:
    """Rectangular Husimi grid: beta[i, j] complex, q[i, j] = <beta|rho|beta>."""

    beta: np.ndarray
    q: np.ndarray
    delta: float

    def normalization(self) -> float:
        return float(self.q.sum() * self.delta**2 / math.pi)

    def real_axis(self) -> tuple[np.ndarray, np.ndarray]:
        """(beta values, Q values) along Im(beta) = 0."""
        idx = int(np.argmin(np.abs(self.beta[:, 0].imag)))
        return self.beta[idx, :].real, self.q[idx, :]


def evolve_mixed_cm(
    params: model.SystemParams,
    rho0: CMState,
    dist: InternalDistribution,
    t: float,
    dim: int,
) -> CMState:
    """rho_cm(t) = sum_k p_k U_k rho0 U_k^dag; the scalar rest-energy phase
    of each U_k cancels against its conjugate, so only bounded propagators
    appear."""
    if len(dist.p) > params.n_levels:
        raise InvalidDistribution(
            f"{len(dist.p)} probabilities for {params.n_levels} levels"
        )
    if rho0.dim != dim:
        raise InvalidDistribution(f"state dim {rho0.dim} != requested dim {dim}")
    ws = fock.build_workspace(params, dim)
    rho = rho0.density()
    out = np.zeros((dim, dim), dtype=complex)
    for k, pk in enumerate(dist.p):
        if pk == 0.0:
            continue
        frame = model.derive_mode_frame(params, k)
        U = fock.propagate(ws, frame, t).U
        out += pk * (U @ rho @ U.conj().T)
    # Symmetrize away eigensolver roundoff before validation.
    out = 0.5 * (out + out.conj().T)
    return mixed_state(out, rho0.prepared_level)


def coherent_row(dim: int, beta: complex) -> np.ndarray:
    """Truncated coherent-state coefficients e^{-|b|^2/2} b^n / sqrt(n!)."""
    out = np.empty(dim, dtype=complex)
    out[0] = math.exp(-0.5 * abs(beta) ** 2)
    for n in range(1, dim):
        out[n] = out[n - 1] * beta / math.sqrt(n)
    return out


def _coherent_matrix(dim: int, betas: np.ndarray) -> np.ndarray:
    """Row i holds the truncated coefficients of |betas[i]>."""
    flat = betas.ravel()
    B = np.empty((flat.size, dim), dtype=complex)
    B[:, 0] = np.exp(-0.5 * np.abs(flat) ** 2)
    for n in range(1, dim):
        B[:, n] = B[:, n - 1] * flat / math.sqrt(n)
    return B


def _axis(half_width: float, delta: float) -> np.ndarray:
    m = int(math.ceil(half_width / delta))
    return delta * np.arange(-m, m + 1)


def qfunction(
    rho: CMState,
    delta: float = 0.1,
    half_width: float = _GRID_START_HALF_WIDTH,
    auto_expand: bool = True,
) -> QGrid:
    """Husimi function on a square grid centered at the origin.

    The grid half-width grows by 1.5x until Q at the boundary drops below
    1e-8 (unless auto_expand=False). Fails with TruncationInsufficient when
    the truncated basis cannot represent the boundary coherent states.
    """
    dim = rho.dim
    rho_m = rho.density()
    hw = float(half_width)
    while True:
        ax = _axis(hw, delta)
        beta = ax[None, :] + 1j * ax[:, None]
        deficit = 1.0 - float(np.sum(np.abs(coherent_row(dim, complex(hw))) ** 2))
        if deficit > _COHERENT_DEFICIT:
            raise TruncationInsufficient(
                f"coherent-state deficit {deficit:.3e} at |beta|={hw:.2f} "
                f"for dim {dim}"
            )
        B = _coherent_matrix(dim, beta)
        q = np.real(np.einsum("id,de,ie->i", B.conj(), rho_m, B)).reshape(beta.shape)
        q = np.clip(q, 0.0, None)
        edge = max(
            float(q[0, :].max()), float(q[-1, :].max()),
            float(q[:, 0].max()), float(q[:, -1].max()),
        )
        if not auto_expand or edge < _EDGE_Q:
            return QGrid(beta=beta, q=q, delta=float(delta))
        hw *= _GRID_GROWTH
        if hw > _GRID_MAX_HALF_WIDTH:
            raise TruncationInsufficient(
                f"grid half-width exceeded {_GRID_MAX_HALF_WIDTH} without "
                f"meeting the edge criterion"
            )


def _nk_expansion_matrix(frame: model.ModeFrame, dim: int) -> np.ndarray:
    a = fock.annihilation(dim)
    adag = a.conj().T
    eye = np.eye(dim)
    r, alpha = frame.r_i, frame.alpha_gi
    return (
        math.cosh(2.0 * r) * (adag @ a)
        + math.sinh(r) ** 2 * eye
        - 0.5 * math.sinh(2.0 * r) * (a @ a + adag @ adag)
        + alpha * math.exp(-r) * (a + adag)
        + alpha**2 * eye
    )


def qfunction_short_time(
    params: model.SystemParams,
    alpha: complex,
    dist: InternalDistribution,
    beta,
    t: float,
    dim: int | None = None,
) -> np.ndarray:
    """Short-time Q of an initial coherent state |alpha> under the
    level-conditioned mixture:

        Q(beta) ~ |<beta|alpha>|^2 sum_k p_k
                  exp(-(omega_k t)^2 (<beta|n_k^2|alpha>/<beta|alpha>
                                      - (<beta|n_k|alpha>/<beta|alpha>)^2)).

    The exponent is complex for beta != alpha; the value is returned as
    printed (complex), accurate to O(t^4) in the real part against the
    exact evolution.
    """
    if len(dist.p) > params.n_levels:
        raise InvalidDistribution(
            f"{len(dist.p)} probabilities for {params.n_levels} levels"
        )
    beta = np.atleast_1d(np.asarray(beta, dtype=complex))
    if dim is None:
        reach = max(abs(alpha), float(np.max(np.abs(beta))))
        dim = int(math.ceil(reach**2 + 12.0 * reach + 32.0))
    va = coherent_row(dim, complex(alpha))
    VB = _coherent_matrix(dim, beta)
    overlap = VB.conj() @ va                       # <beta|alpha>
    total = np.zeros(beta.shape, dtype=complex)
    for k, pk in enumerate(dist.p):
        if pk == 0.0:
            continue
        frame = model.derive_mode_frame(params, k)
        Nk = _nk_expansion_matrix(frame, dim)
        m1 = (VB.conj() @ (Nk @ va)) / overlap
        m2 = (VB.conj() @ (Nk @ (Nk @ va))) / overlap
        total += pk * np.exp(-((frame.omega_i * t) ** 2) * (m2 - m1**2))
    return np.abs(overlap) ** 2 * total


@dataclass(frozen=True)
class SqueezeFit:
    """Result of fitting log Q = c - (1 + r_eff) beta^2 on the real axis."""

    r_eff: float
    residual: float
    intercept: float


def effective_squeezing_fit(grid: QGrid, q_floor: float = 1e-12) -> SqueezeFit:
    """Effective squeezing parameter from the real-axis Gaussian profile.

    Fits log Q against beta^2 (points with Q > q_floor); r_eff is the
    excess of the quadratic coefficient over the vacuum value 1. The rms
    residual of the fit is the Gaussianity diagnostic; above 1e-3 the
    profile is rejected.
    """
    b, q = grid.real_axis()
    mask = q > q_floor
    if mask.sum() < 3:
        raise NonGaussianProfile("too few grid points above the Q floor")
    x = b[mask] ** 2
    y = np.log(q[mask])
    coeffs = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((np.polyval(coeffs, x) - y) ** 2)))
    if resid > 1e-3:
        raise NonGaussianProfile(f"rms log-residual {resid:.3e} exceeds 1e-3")
    return SqueezeFit(
        r_eff=float(-coeffs[0] - 1.0), residual=resid, intercept=float(coeffs[1])
    )


def predicted_r_eff(params: model.SystemParams, mean_internal_energy: float, t: float) -> float:
    """(omega_0 t)^2 <H_int> / (2 M_0 c^2): the exponent inflation of the
    vacuum Gaussian at short times."""
    return (params.omega0 * t) ** 2 * mean_internal_energy / (
        2.0 * params.M0 * params.c**2
    )
