"""Independent brute-force oracles for the closed-form results.

Each oracle reports a normalized deviation (deviation/tolerance per probed
quantity, maximized), so a report passes iff max_deviation <= 1.0. Oracles
deliberately use code paths independent of the implementations they check
(hand-rolled golden-section search against the closed-form optimum, dense
Fock traces against the analytic amplitude, log-log scaling fits against
the operator identity).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import analytic, drive, model, ramsey, states


@dataclass(frozen=True)
class OracleReport:
    name: str
    inputs_digest: str
    max_deviation: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "inputs_digest": self.inputs_digest,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "details": self.details,
        }


def _digest(obj) -> str:
    return hashlib.sha256(
        json.dumps(obj, sort_keys=True, default=str).encode()
    ).hexdigest()[:16]


def _report(name, inputs, ratios: dict, details=None) -> OracleReport:
    worst = max(ratios.values())
    det = dict(details or {})
    det.update({f"{k}_over_tolerance": v for k, v in ratios.items()})
    return OracleReport(
        name=name,
        inputs_digest=_digest(inputs),
        max_deviation=float(worst),
        tolerance=1.0,
        passed=bool(worst <= 1.0),
        details=det,
    )


def _natural_params(S: float, c: float = 10.0, g: float = 0.0) -> model.SystemParams:
    """Natural-unit system with mass ratio M1/M0 = 1/S^2."""
    E1 = (1.0 / S**2 - 1.0) * c**2
    return model.build_system(
        {"unit_system": "natural", "c": c, "levels": [0.0, E1], "g": g}
    )


def oracle_vacuum_visibility(
    s_values=(0.5, 0.9, 0.99),
    x0_values=(0.0, 0.02, 5.0),
    n_times: int = 400,
    dim_max: int = 512,
    dim_tol: float = 1e-8,
    vis_tol: float = 1e-6,
    phase_tol: float = 1e-5,
) -> OracleReport:
    """Dense Fock trace vs the closed-form vacuum amplitude over the full
    (S, x0, omega_1 t in [0, 4 pi]) grid. Phase is compared pointwise where
    the amplitude is resolvable (V > 1e-6); below that the phase carries no
    numerical meaning."""
    worst_v = worst_p = 0.0
    for S in s_values:
        params = _natural_params(S)
        w1 = model.derive_mode_frame(params, 1).omega_i
        times = np.linspace(0.0, 4.0 * math.pi / w1, n_times)
        for x0 in x0_values:
            trace = ramsey.ramsey_trace(
                params, states.fock_state(64, 0), times, x0=x0,
                dim_tol=dim_tol, dim_max=dim_max,
            )
            amp = analytic.vacuum_coherent_amplitude(params, x0, times)
            worst_v = max(worst_v, float(np.max(np.abs(np.abs(amp) - trace.visibility))))
            mask = np.abs(amp) > 1e-6
            dphi = np.abs(np.angle(trace.trace[mask] * np.conj(amp[mask])))
            worst_p = max(worst_p, float(np.max(dphi)))
    return _report(
        "vacuum_visibility",
        {"S": s_values, "x0": x0_values, "n_times": n_times, "dim_max": dim_max},
        {"visibility": worst_v / vis_tol, "phase": worst_p / phase_tol},
        {"visibility_deviation": worst_v, "phase_deviation": worst_p},
    )


def _golden_section(f, lo: float, hi: float, iters: int = 60) -> float:
    """Golden-section bracket followed by one parabolic-vertex refinement.

    Pure bracketing stalls at sqrt(machine-eps) relative accuracy on a
    smooth quadratic minimum; the final three-point parabola fit recovers
    the vertex to near machine precision. Independent of scipy.
    """
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    m = 0.5 * (a + b)
    # Shrinking-step vertex fits: bias is O(h^2) per pass while the values
    # remain well resolved, so two passes reach ~1e-10.
    for h in (1e-3, 1e-5):
        fm, fl, fr = f(m), f(m - h), f(m + h)
        denom = fl - 2.0 * fm + fr
        if denom > 0:
            m = m + 0.5 * h * (fl - fr) / denom
    return m


def oracle_minshift(
    params: model.SystemParams | None = None,
    n_values=(0.0, 1.0, 5.0),
    rel_tol: float = 1e-9,
) -> OracleReport:
    """Golden-section minimization of the lowest-order fractional shift over
    trap frequency vs the closed-form optimum."""
    from . import clock

    if params is None:
        params = model.build_system(
            {"unit_system": "si", "M0": 1e-26, "omega0": 1e6, "levels": [0.0, 1e-19]}
        )
    worst = 0.0
    details = {}
    for n in n_values:
        opt = clock.minimal_shift(params, n)

        def shift(w, n=n):
            return -clock._shift_at_omega(params, w, n)

        # Log-domain golden section over a wide bracket.
        w_num = math.exp(
            _golden_section(lambda u: shift(math.exp(u)), math.log(1.0), math.log(1e9))
        )
        d_num = -shift(w_num)
        dev = max(
            abs(w_num / opt.omega_min - 1.0), abs(d_num / opt.delta_min - 1.0)
        )
        worst = max(worst, dev)
        details[f"n={n}"] = {"omega_min": opt.omega_min, "delta_min": opt.delta_min}
    return _report(
        "minshift",
        {"n_values": n_values, "M0": params.M0, "g": params.g},
        {"relative": worst / rel_tol},
        details,
    )


def _fit_exponent(xs, ys) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def oracle_cycle_identity(
    u_values=(1e-2, 5e-3, 2.5e-3),
    g: float = 0.3,
    dim: int = 128,
    exponent_tol: float = 0.2,
) -> OracleReport:
    """The per-cycle product must deviate from -i P S(2r) D(beta) at second
    order in Delta_M/M_0: the fitted log-log slope of the deviation versus
    Delta_M/M_0 must be 2.0 +/- 0.2."""
    devs = []
    for u in u_values:
        c = math.sqrt(100.0 / u)
        params = model.build_system(
            {"unit_system": "natural", "c": c, "levels": [0.0, 100.0], "g": g}
        )
        cyc = drive.cycle_operator(params, dim)
        devs.append(drive.comparator_deviation(cyc))
    exponent = _fit_exponent(u_values, devs)
    return _report(
        "cycle_identity",
        {"u_values": u_values, "g": g, "dim": dim},
        {"exponent": abs(exponent - 2.0) / exponent_tol},
        {"exponent": exponent, "deviations": devs},
    )


def ablation_cycle_identity(
    u_values=(1e-2, 5e-3, 2.5e-3), g: float = 0.3, dim: int = 128
) -> float:
    """Exponent of the deviation when the displacement factor is dropped
    from the comparator: degrades to ~1, demonstrating its necessity."""
    import trapmass.fock as fock

    devs = []
    for u in u_values:
        c = math.sqrt(100.0 / u)
        params = model.build_system(
            {"unit_system": "natural", "c": c, "levels": [0.0, 100.0], "g": g}
        )
        cyc = drive.cycle_operator(params, dim)
        ws = fock.build_workspace(params, dim)
        bare = (
            -1j
            * fock.parity_matrix(dim)
            @ fock.squeeze_matrix(ws, cyc.schedule.per_cycle_r)
        )
        m = fock.interior(dim)
        devs.append(float(np.linalg.norm(cyc.product[:m, :m] - bare[:m, :m], 2)))
    return _fit_exponent(u_values, devs)


ORACLES = {
    "vacuum_visibility": oracle_vacuum_visibility,
    "minshift": oracle_minshift,
    "cycle_identity": oracle_cycle_identity,
}


def run_all() -> list[OracleReport]:
    """Run every registered oracle with default inputs, in name order."""
    return [ORACLES[name]() for name in sorted(ORACLES)]
