"""Physical parameters, unit handling and per-level derived quantities.

A particle with quantized internal energy in a harmonic trap behaves, for
each internal level i, as an oscillator with mass M_i = M0 + E_i/c^2,
frequency omega_i = sqrt(k/M_i) and a gravitationally shifted equilibrium.
The mode of level i is related to the ground-level mode by a Bogoliubov
(squeeze) transformation with parameter r_i and a real displacement
alpha_gi; those derived quantities live in ModeFrame.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from . import constants
from .errors import (
    LevelOutOfRange,
    MissingField,
    NonMonotoneLevels,
    NonPositiveMass,
    WeakFieldWarning,
)

UNIT_SI = "si"
UNIT_NATURAL = "natural"


@dataclass(frozen=True)
class SystemParams:
    """Validated system parameters. Immutable; safe to share between workers.

    In natural mode the stored numbers satisfy hbar = M0 = omega0 = 1 and c
    acts as a free dial setting Delta_M/M0 = E_i/c^2.
    """

    M0: float
    levels: tuple[float, ...]
    k: float
    g: float
    c: float
    hbar: float
    unit_system: str

    @property
    def omega0(self) -> float:
        return math.sqrt(self.k / self.M0)

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def mass(self, i: int) -> float:
        self._check_level(i)
        return self.M0 + self.levels[i] / self.c**2

    def omega_c(self, i: int = 1) -> float:
        """Internal (optical) transition frequency E_i/hbar."""
        self._check_level(i)
        return self.levels[i] / self.hbar

    def _check_level(self, i: int) -> None:
        if not (0 <= i < len(self.levels)):
            raise LevelOutOfRange(i, len(self.levels))


@dataclass(frozen=True)
class ModeFrame:
    """Derived oscillator quantities for one internal level.

    Pure function of (SystemParams, level); repeated derivation is
    bit-identical.
    """

    level: int
    M_i: float
    delta_M: float
    omega_i: float
    r_i: float
    alpha_gi: float
    offset_i: float     # scalar energy M_i c^2 (1 - g^2 / 2 omega_i^2 c^2)
    x_shift_i: float    # relative sag g (M_i - M0)/k of mode i in the level-0 eigenmode basis


def build_system(config: dict) -> SystemParams:
    """Validate a SystemConfig mapping and return SystemParams.

    Accepts either "k" or "omega0" for the trap. SI fields default to the
    pinned constants table; natural mode rescales all inputs so that
    hbar = M0 = omega0 = 1.
    """
    if not isinstance(config, dict):
        raise MissingField("config")
    unit_system = str(config.get("unit_system", UNIT_SI)).lower()
    if unit_system not in (UNIT_SI, UNIT_NATURAL):
        raise MissingField("unit_system")

    if "levels" not in config:
        raise MissingField("levels")
    levels = [float(E) for E in config["levels"]]
    if not levels or levels[0] != 0.0 or any(
        b <= a for a, b in zip(levels, levels[1:])
    ):
        raise NonMonotoneLevels(levels)

    if unit_system == UNIT_SI:
        M0 = config.get("M0")
        if M0 is None:
            raise MissingField("M0")
        hbar = float(config.get("hbar", constants.HBAR))
        c = float(config.get("c", constants.C_LIGHT))
        g = float(config.get("g", constants.G_STANDARD))
    else:
        M0 = float(config.get("M0", 1.0))
        hbar = float(config.get("hbar", 1.0))
        if "c" not in config:
            raise MissingField("c")
        c = float(config["c"])
        g = float(config.get("g", 0.0))

    M0 = float(M0)
    if M0 <= 0:
        raise NonPositiveMass("M0", M0)
    if c <= 0:
        raise NonPositiveMass("c", c)
    if hbar <= 0:
        raise NonPositiveMass("hbar", hbar)
    if g < 0:
        raise NonPositiveMass("g", g)

    if "k" in config:
        k = float(config["k"])
    elif "omega0" in config:
        k = M0 * float(config["omega0"]) ** 2
    elif unit_system == UNIT_NATURAL:
        k = M0 * hbar  # omega0 = 1 after rescaling below
    else:
        raise MissingField("k")
    if k <= 0:
        raise NonPositiveMass("k", k)

    params = SystemParams(
        M0=M0, levels=tuple(levels), k=k, g=g, c=c, hbar=hbar,
        unit_system=unit_system,
    )
    if unit_system == UNIT_NATURAL:
        params = _to_natural(params)
    return params


def _to_natural(p: SystemParams) -> SystemParams:
    """Rescale so hbar = M0 = omega0 = 1, preserving all dimensionless ratios.

    Units: mass M0, energy hbar*omega0, length sqrt(hbar/M0 omega0),
    time 1/omega0. In particular E_i/c^2 (mass defect) is invariant.
    """
    w0 = p.omega0
    e_unit = p.hbar * w0
    return SystemParams(
        M0=1.0,
        levels=tuple(E / e_unit for E in p.levels),
        k=1.0,
        g=p.g * math.sqrt(p.M0 / (p.hbar * w0**3)),
        c=p.c * math.sqrt(p.M0 / (p.hbar * w0)),
        hbar=1.0,
        unit_system=UNIT_NATURAL,
    )


def derive_mode_frame(params: SystemParams, i: int) -> ModeFrame:
    """All per-level derived quantities, from the exact quarter-power formulas."""
    params._check_level(i)
    M_i = params.mass(i)
    delta_M = params.levels[i] / params.c**2
    omega_i = math.sqrt(params.k / M_i)
    # 2 cosh r = (M0/Mi)^(1/4) + (Mi/M0)^(1/4) and the sinh counterpart
    # combine to exp(r) = (M0/Mi)^(1/4).
    r_i = 0.25 * math.log(params.M0 / M_i)
    alpha_gi = params.g * delta_M / math.sqrt(2.0 * params.hbar * M_i * omega_i**3)
    offset_i = M_i * params.c**2 * (1.0 - params.g**2 / (2.0 * omega_i**2 * params.c**2))
    return ModeFrame(
        level=i,
        M_i=M_i,
        delta_M=delta_M,
        omega_i=omega_i,
        r_i=r_i,
        alpha_gi=alpha_gi,
        offset_i=offset_i,
        # g/omega_i^2 - g/omega_0^2 without cancellation: the basis is the
        # (gravity-sagged) level-0 eigenmode, so only relative sag enters.
        x_shift_i=params.g * (M_i - params.M0) / params.k,
    )


def offset_gap(params: SystemParams, i: int, j: int = 0) -> float:
    """offset_i - offset_j evaluated without catastrophic cancellation.

    offset_i = M_i c^2 - g^2 M_i^2 / 2k, so the difference reduces to
    E_i - E_j minus a small gravitational correction; the rest masses never
    enter. This is the only scalar-phase combination interference traces
    depend on.
    """
    params._check_level(i)
    params._check_level(j)
    Mi, Mj = params.mass(i), params.mass(j)
    return (params.levels[i] - params.levels[j]) - (
        params.g**2 / (2.0 * params.k)
    ) * (Mi - Mj) * (Mi + Mj)


def displacement_lowest_order(params: SystemParams, i: int) -> float:
    """Leading-order mode displacement g*dM / sqrt(2 hbar M0 omega0^3).

    Deviates from the exact alpha_gi by a relative O(dM/M0).
    """
    params._check_level(i)
    delta_M = params.levels[i] / params.c**2
    return params.g * delta_M / math.sqrt(2.0 * params.hbar * params.M0 * params.omega0**3)


def redshifted_stiffness(params: SystemParams, h: float) -> tuple[float, float]:
    """Stiffness and frequency ratios between locally identical traps at
    heights differing by h: (1 + 2gh/c^2, 1 + gh/c^2) to first order."""
    eps = params.g * h / params.c**2
    if abs(eps) > 1e-3:
        warnings.warn(
            f"gh/c^2 = {eps:.3e} outside the weak-field regime", WeakFieldWarning
        )
    return 1.0 + 2.0 * eps, 1.0 + eps
