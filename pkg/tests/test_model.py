import math

import numpy as np
import pytest

from trapmass import constants, model
from trapmass.errors import (
    LevelOutOfRange,
    MissingField,
    NonMonotoneLevels,
    NonPositiveMass,
    WeakFieldWarning,
)


def si_params(**over):
    cfg = {"unit_system": "si", "M0": 1e-26, "omega0": 1e6, "levels": [0.0, 1e-19]}
    cfg.update(over)
    return model.build_system(cfg)


def natural_params(**over):
    cfg = {"unit_system": "natural", "c": 10.0, "levels": [0.0, 20.0], "g": 0.5}
    cfg.update(over)
    return model.build_system(cfg)


def test_si_defaults():
    p = si_params()
    assert p.c == constants.C_LIGHT
    assert p.hbar == constants.HBAR
    assert p.g == constants.G_STANDARD
    assert math.isclose(p.omega0, 1e6, rel_tol=1e-12)


def test_k_and_omega0_equivalent():
    p1 = si_params()
    p2 = model.build_system(
        {"unit_system": "si", "M0": 1e-26, "k": 1e-26 * 1e12, "levels": [0.0, 1e-19]}
    )
    assert p1.k == pytest.approx(p2.k, rel=1e-14)


def test_missing_fields():
    with pytest.raises(MissingField):
        model.build_system({"unit_system": "si", "levels": [0.0, 1.0]})
    with pytest.raises(MissingField):
        model.build_system({"unit_system": "si", "M0": 1e-26, "levels": [0.0, 1.0]})
    with pytest.raises(MissingField):
        model.build_system({"unit_system": "natural", "levels": [0.0, 1.0]})  # no c
    with pytest.raises(MissingField):
        model.build_system({"unit_system": "si", "M0": 1e-26, "omega0": 1e6})


def test_level_validation():
    for levels in ([], [1.0, 2.0], [0.0, 2.0, 1.0], [0.0, 1.0, 1.0]):
        with pytest.raises(NonMonotoneLevels):
            model.build_system(
                {"unit_system": "si", "M0": 1e-26, "omega0": 1e6, "levels": levels}
            )


def test_positivity_validation():
    with pytest.raises(NonPositiveMass):
        si_params(M0=-1e-26)
    with pytest.raises(NonPositiveMass):
        si_params(omega0=0.0)
    with pytest.raises(NonPositiveMass):
        si_params(g=-1.0)


def test_natural_rescaling_normalizes():
    p = natural_params()
    assert p.M0 == 1.0 and p.hbar == 1.0
    assert math.isclose(p.omega0, 1.0, rel_tol=1e-14)


def test_natural_rescaling_preserves_ratios():
    # Mass defect E_i/c^2 relative to M0 must be invariant under rescaling.
    raw = {"unit_system": "natural", "c": 3.0, "levels": [0.0, 4.5],
           "M0": 2.0, "omega0": 5.0, "g": 1.25}
    p = model.build_system(raw)
    # Mass defect in units of M0: E1/(c^2 M0) = 4.5/(9*2).
    assert p.mass(1) - p.M0 == pytest.approx(4.5 / (9.0 * 2.0), rel=1e-12)
    # Dimensionless alpha_g must equal its value computed in the raw units.
    frame = model.derive_mode_frame(p, 1)
    M1_raw = 2.0 + 4.5 / 3.0**2
    w1_raw = math.sqrt(2.0 * 5.0**2 / M1_raw)
    alpha_raw = 1.25 * (4.5 / 9.0) / math.sqrt(2.0 * M1_raw * w1_raw**3)
    assert frame.alpha_gi == pytest.approx(alpha_raw, rel=1e-12)


def test_mode_frame_quarter_power():
    p = si_params()
    f = model.derive_mode_frame(p, 1)
    assert math.exp(f.r_i) == pytest.approx((p.M0 / f.M_i) ** 0.25, rel=1e-14)
    # omega_i sqrt(M_i) is level-independent.
    assert f.omega_i * math.sqrt(f.M_i) == pytest.approx(
        p.omega0 * math.sqrt(p.M0), rel=1e-14
    )
    assert f.r_i < 0  # heavier excited level -> softer trap


def test_mode_frame_repeatable():
    p = natural_params()
    assert model.derive_mode_frame(p, 1) == model.derive_mode_frame(p, 1)


def test_level_bounds():
    p = si_params()
    with pytest.raises(LevelOutOfRange):
        p.mass(2)
    with pytest.raises(LevelOutOfRange):
        model.derive_mode_frame(p, -1)


def test_offset_gap_cancellation_free():
    # In SI units offset_i ~ M c^2 ~ 1e-9 J while the gap is ~1e-19 J;
    # the direct difference of offsets would lose everything.
    p = si_params()
    gap = model.offset_gap(p, 1, 0)
    grav = (p.g**2 / (2.0 * p.k)) * (p.mass(1) - p.M0) * (p.mass(1) + p.M0)
    assert gap == pytest.approx(1e-19 - grav, rel=1e-15)
    assert model.offset_gap(p, 0, 0) == 0.0
    assert model.offset_gap(p, 0, 1) == -gap


def test_offset_gap_matches_naive_at_benign_scale():
    p = natural_params()
    f0 = model.derive_mode_frame(p, 0)
    f1 = model.derive_mode_frame(p, 1)
    assert model.offset_gap(p, 1, 0) == pytest.approx(
        f1.offset_i - f0.offset_i, rel=1e-12
    )


def test_displacement_lowest_order():
    p = natural_params(levels=[0.0, 1.0])
    exact = model.derive_mode_frame(p, 1).alpha_gi
    approx = model.displacement_lowest_order(p, 1)
    dm_rel = (p.mass(1) - p.M0) / p.M0
    assert abs(approx / exact - 1.0) < 3.0 * dm_rel


def test_x_shift_is_relative_sag():
    p = natural_params()
    f1 = model.derive_mode_frame(p, 1)
    assert f1.x_shift_i == pytest.approx(
        p.g / f1.omega_i**2 - p.g / p.omega0**2, rel=1e-9
    )
    assert model.derive_mode_frame(p, 0).x_shift_i == 0.0


def test_redshifted_stiffness():
    p = si_params()
    k_ratio, w_ratio = model.redshifted_stiffness(p, 1.0)
    eps = p.g * 1.0 / p.c**2
    assert k_ratio == pytest.approx(1.0 + 2.0 * eps, rel=1e-14)
    assert w_ratio == pytest.approx(1.0 + eps, rel=1e-14)
    with pytest.warns(WeakFieldWarning):
        model.redshifted_stiffness(natural_params(c=2.0), 100.0)


def test_omega_c():
    p = si_params()
    assert p.omega_c(1) == pytest.approx(1e-19 / p.hbar, rel=1e-14)
