import math

import numpy as np
import pytest

from trapmass import model, phasespace, states
from trapmass.errors import (
    InvalidDistribution,
    NonGaussianProfile,
    TruncationInsufficient,
)


def natural_params(E1=2.0, c=2.0, g=0.0, extra=()):
    levels = [0.0, E1, *extra]
    return model.build_system(
        {"unit_system": "natural", "c": c, "levels": levels, "g": g}
    )


def test_internal_distribution_validation():
    d = phasespace.InternalDistribution((0.25, 0.75))
    assert d.mean_energy(natural_params()) == pytest.approx(1.5)
    with pytest.raises(InvalidDistribution):
        phasespace.InternalDistribution(())
    with pytest.raises(InvalidDistribution):
        phasespace.InternalDistribution((0.5, 0.6))
    with pytest.raises(InvalidDistribution):
        phasespace.InternalDistribution((-0.1, 1.1))


def test_vacuum_qfunction_exact():
    # Vacuum: Q(beta) = exp(-|beta|^2), normalization 1.
    vac = states.fock_state(128, 0)
    grid = phasespace.qfunction(vac)
    expected = np.exp(-np.abs(grid.beta) ** 2)
    assert np.max(np.abs(grid.q - expected)) < 1e-12
    assert grid.normalization() == pytest.approx(1.0, abs=1e-3)


def test_coherent_qfunction_exact():
    alpha = 1.0 + 0.5j
    st = states.coherent_state(128, alpha)
    grid = phasespace.qfunction(st)
    expected = np.exp(-np.abs(grid.beta - alpha) ** 2)
    assert np.max(np.abs(grid.q - expected)) < 1e-10
    assert grid.normalization() == pytest.approx(1.0, abs=1e-3)


def test_qfunction_linearity_bitwise():
    rho_a = states.fock_state(96, 0).density()
    rho_b = states.fock_state(96, 2).density()
    mix = states.mixed_state(0.5 * rho_a + 0.5 * rho_b)
    g_mix = phasespace.qfunction(mix, auto_expand=False)
    g_a = phasespace.qfunction(states.fock_state(96, 0), auto_expand=False)
    g_b = phasespace.qfunction(states.fock_state(96, 2), auto_expand=False)
    assert np.max(np.abs(g_mix.q - 0.5 * g_a.q - 0.5 * g_b.q)) < 1e-13


def test_qfunction_truncation_guard():
    # dim 8 cannot represent coherent states at |beta| = 4.
    with pytest.raises(TruncationInsufficient):
        phasespace.qfunction(states.fock_state(8, 0))


def test_evolve_mixed_cm_basics():
    p = natural_params()
    dim = 64
    rho0 = states.mixed_state(states.coherent_state(dim, 0.5).density())
    dist = phasespace.InternalDistribution((1.0,))
    # Single level: evolution is unitary, purity preserved.
    out = phasespace.evolve_mixed_cm(p, rho0, dist, 0.8, dim)
    purity = float(np.real(np.trace(out.data @ out.data)))
    assert purity == pytest.approx(1.0, abs=1e-9)
    # t = 0 returns the initial state for any mixture.
    dist2 = phasespace.InternalDistribution((0.5, 0.5))
    out0 = phasespace.evolve_mixed_cm(p, rho0, dist2, 0.0, dim)
    assert np.max(np.abs(out0.data - rho0.density())) < 1e-12
    # Two distinct levels at t > 0 decohere the mixture.
    outm = phasespace.evolve_mixed_cm(p, rho0, dist2, 0.8, dim)
    puritym = float(np.real(np.trace(outm.data @ outm.data)))
    assert puritym < 1.0 - 1e-4


def test_evolve_mixed_cm_validation():
    p = natural_params()
    rho0 = states.mixed_state(states.fock_state(32, 0).density())
    with pytest.raises(InvalidDistribution):
        phasespace.evolve_mixed_cm(
            p, rho0, phasespace.InternalDistribution((0.2, 0.3, 0.5)), 0.1, 32
        )
    with pytest.raises(InvalidDistribution):
        phasespace.evolve_mixed_cm(
            p, rho0, phasespace.InternalDistribution((1.0,)), 0.1, 64
        )


def test_short_time_reduces_at_t_zero():
    p = natural_params()
    dist = phasespace.InternalDistribution((0.5, 0.5))
    betas = np.array([0.0 + 0.0j, 0.5 + 0.2j, -1.0j])
    q0 = phasespace.qfunction_short_time(p, 0.4, dist, betas, 0.0)
    expected = np.abs(
        np.exp(-0.5 * np.abs(betas) ** 2 - 0.5 * 0.4**2 + np.conj(betas) * 0.4)
    ) ** 2
    assert np.max(np.abs(q0 - expected)) < 1e-12


def test_short_time_error_is_fourth_order():
    # Against the exact mixed evolution, the short-time Q errs at O(t^4):
    # halving t shrinks the on-axis error 16x.
    p = natural_params(E1=0.5, c=2.0)
    dist = phasespace.InternalDistribution((0.5, 0.5))
    dim = 96
    alpha = 0.6
    rho0 = states.mixed_state(states.coherent_state(dim, alpha).density())
    beta = np.array([0.3 + 0.0j])

    def err(t):
        exact = phasespace.evolve_mixed_cm(p, rho0, dist, t, dim)
        row = phasespace.coherent_row(dim, complex(beta[0]))
        q_exact = float(np.real(row.conj() @ exact.data @ row))
        q_st = float(np.real(
            phasespace.qfunction_short_time(p, alpha, dist, beta, t, dim=dim)[0]
        ))
        return abs(q_exact - q_st)

    t0 = 0.2
    ratio = err(t0) / err(t0 / 2.0)
    assert ratio == pytest.approx(16.0, abs=4.0)


def test_effective_squeezing_fit_on_synthetic_gaussian():
    ax = np.linspace(-3.0, 3.0, 61)
    beta = ax[None, :] + 1j * ax[:, None]
    r_true = 0.07
    q = np.exp(-(1.0 + r_true) * beta.real**2 - np.abs(beta.imag) ** 2)
    grid = phasespace.QGrid(beta=beta, q=q, delta=ax[1] - ax[0])
    fit = phasespace.effective_squeezing_fit(grid)
    assert fit.r_eff == pytest.approx(r_true, rel=1e-10)
    assert fit.residual < 1e-10


def test_effective_squeezing_fit_rejects_non_gaussian():
    ax = np.linspace(-3.0, 3.0, 61)
    beta = ax[None, :] + 1j * ax[:, None]
    q = np.exp(-np.abs(beta) ** 2) + 0.3 * np.exp(-4.0 * np.abs(beta - 1.5) ** 2)
    grid = phasespace.QGrid(beta=beta, q=q, delta=ax[1] - ax[0])
    with pytest.raises(NonGaussianProfile):
        phasespace.effective_squeezing_fit(grid)


def test_predicted_r_eff_matches_short_time_profile():
    # Small mass defect: the fitted exponent inflation of the short-time Q
    # matches (omega0 t)^2 <H_int> / 2 M0 c^2 within 1%.
    p = natural_params(E1=1e-3, c=1.0)
    dist = phasespace.InternalDistribution((0.0, 1.0))
    t = 0.4
    ax = np.linspace(-2.0, 2.0, 81)
    beta = ax[None, :] + 1j * ax[:, None]
    q = np.real(
        phasespace.qfunction_short_time(p, 0.0, dist, beta.ravel(), t, dim=64)
    ).reshape(beta.shape)
    grid = phasespace.QGrid(beta=beta, q=q, delta=ax[1] - ax[0])
    fit = phasespace.effective_squeezing_fit(grid)
    pred = phasespace.predicted_r_eff(p, dist.mean_energy(p), t)
    assert fit.r_eff == pytest.approx(pred, rel=1e-2)


def test_distributions_with_equal_mean_energy_differ():
    # Two internal distributions with the same mean energy but different
    # variance produce distinguishable Q values at second order in t.
    p = natural_params(E1=1.0, c=2.0, extra=[2.0])
    d_mid = phasespace.InternalDistribution((0.0, 1.0, 0.0))
    d_ends = phasespace.InternalDistribution((0.5, 0.0, 0.5))
    assert d_mid.mean_energy(p) == d_ends.mean_energy(p)
    beta = np.array([0.0 + 0.0j])
    t = 0.3
    q_mid = phasespace.qfunction_short_time(p, 0.0, d_mid, beta, t)[0]
    q_ends = phasespace.qfunction_short_time(p, 0.0, d_ends, beta, t)[0]
    assert abs(q_mid - q_ends) > 1e-6
