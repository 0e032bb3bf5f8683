"""Density-matrix elements, equilibrium-apparatus machinery, grids, Wigner.

Frozen element values were produced by the same code the first time it agreed
with the independent routes in _oracles (time-domain friction integral for
g_t, dense-trapezoid xi integral for the R_t bracket); they pin the numbers
against regressions.  The structural identities (product forms at t = 0,
peak coherence = e^{-D_peak}, shifted-density mixtures on the diagonal) are
exact in this representation and asserted near machine precision.
"""
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import _oracles
from decometer import bath as bm
from decometer import dynamics as dyn
from decometer.bath import SpectralBath
from decometer.decoherence import (
    MeasurementSetup,
    ObjectSpec,
    PointerSpec,
    Variant,
    d_exponent,
    d_peak,
    equilibrium_pointer,
    measurement_t_dec,
)
from decometer.errors import ConfigError, ResolutionError, StabilityError

OHMIC = SpectralBath(m=1, gamma_hat=1.0, w_D=5.0, beta=1.0)
DEAD = SpectralBath(m=1, gamma_hat=1e-14, w_D=5.0, beta=1.0)  # bath-off limit
EQ_BATH = SpectralBath(m=1, gamma_hat=0.05, w_D=5.0, beta=1.0)
EQ_POINTER = equilibrium_pointer(EQ_BATH, mass=1.0, v2=2.0)

NORM = 1.0 / math.sqrt(2.0 * math.pi)  # peak pointer density at delta = 1


def two_level(lo=0.0, hi=1.0, coh=0.45, p0=0.55, energies=None):
    return ObjectSpec(
        eigenvalues=(lo, hi),
        rho_s=np.array([[p0, coh], [coh, 1.0 - p0]], dtype=complex),
        energies=energies,
    )


def plain_pointer(delta=1.0):
    v2 = 1.0 / (4.0 * delta**4)
    return PointerSpec(delta=delta, lam=4.0 * math.pi * delta, mass=1.0, v2=v2)


def make_setup(alpha=2, epsilon=2.0, bath=OHMIC, obj=None, delta=1.0, **kw):
    return MeasurementSetup(
        epsilon=epsilon,
        alpha=alpha,
        object=obj if obj is not None else two_level(),
        pointer=plain_pointer(delta),
        bath=bath,
        **kw,
    )


def eq_setup(alpha=2, epsilon=2.0, obj=None):
    return MeasurementSetup(
        epsilon=epsilon,
        alpha=alpha,
        object=obj if obj is not None else two_level(),
        pointer=EQ_POINTER,
        bath=EQ_BATH,
        variant=Variant.EQUILIBRIUM_APPARATUS,
    )


def spin_half(coh=0.5):
    return ObjectSpec(
        eigenvalues=(-0.5, 0.5),
        rho_s=np.array([[0.5, coh], [coh, 0.5]], dtype=complex),
    )


class TestPointerDensity:
    def test_origin_value(self):
        ptr = plain_pointer(1.0)
        assert dyn.pointer_density(ptr, 0.0, 0.0) == pytest.approx(NORM, rel=1e-14)
        ptr2 = plain_pointer(0.3)
        want = 1.0 / math.sqrt(2.0 * math.pi * 0.09)
        assert dyn.pointer_density(ptr2, 0.0, 0.0) == pytest.approx(want, rel=1e-14)

    def test_symmetric_and_bounded(self):
        ptr = plain_pointer(0.7)
        rng = np.random.default_rng(5)
        for x, xp in rng.normal(scale=2.0, size=(40, 2)):
            a = dyn.pointer_density(ptr, x, xp)
            assert a == dyn.pointer_density(ptr, xp, x)
            assert 0.0 < a <= dyn.pointer_density(ptr, 0.0, 0.0) + 1e-15

    def test_diagonal_normalized(self):
        ptr = plain_pointer(1.3)
        xs = np.linspace(-12 * ptr.delta, 12 * ptr.delta, 4001)
        norm = np.trapezoid(dyn.pointer_density(ptr, xs, xs), xs)
        assert norm == pytest.approx(1.0, abs=1e-9)

    def test_squeezing_narrows_coherence(self):
        # smaller lam at fixed delta kills off-diagonal weight faster
        wide = plain_pointer(1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            narrow = PointerSpec(delta=1.0, lam=2.0 * math.pi, mass=1.0, v2=0.25)
        y = 0.8
        assert dyn.pointer_density(narrow, -y, y) < dyn.pointer_density(wide, -y, y)


class TestPremeasurement:
    def test_initial_product(self):
        stp = make_setup()
        for x, xp in [(0.0, 0.0), (0.4, -1.1)]:
            el = dyn.premeasurement_element(stp, x, xp, 0.0, 1.0, 0.0)
            want = 0.45 * dyn.pointer_density(stp.pointer, x, xp)
            assert el == pytest.approx(want, rel=1e-14)

    def test_peak_element_is_time_independent(self):
        stp = make_setup(epsilon=1.5)
        vals = [
            dyn.premeasurement_element(stp, 1.5 * t * 0.0, 1.5 * t * 1.0, 0.0, 1.0, t)
            for t in (0.0, 0.7, 3.0)
        ]
        for v in vals:
            assert v == pytest.approx(0.45 * NORM, rel=1e-12)

    def test_diagonal_peak_tracks_drag(self):
        stp = make_setup(epsilon=2.0)
        t = 1.3
        moving = dyn.premeasurement_element(stp, 2.0 * t, 2.0 * t, 1.0, 1.0, t)
        still = dyn.premeasurement_element(stp, 0.0, 0.0, 1.0, 1.0, 0.0)
        assert moving == pytest.approx(still, rel=1e-14)

    def test_no_free_dephasing_phases(self):
        a = dyn.premeasurement_element(make_setup(), 0.2, -0.1, 0.0, 1.0, 0.9)
        b = dyn.premeasurement_element(
            make_setup(obj=two_level(energies=(0.0, 1.5))), 0.2, -0.1, 0.0, 1.0, 0.9
        )
        assert a == b

    def test_guards(self):
        stp = make_setup()
        with pytest.raises(ConfigError):
            dyn.premeasurement_element(stp, 0.0, 0.0, 0.0, 1.0, -0.1)
        with pytest.raises(ConfigError):
            dyn.premeasurement_element(stp, 0.0, 0.0, 0.3, 1.0, 0.5)  # not an eigenvalue


class TestSequentialCaricature:
    def test_dephasing_time_example(self):
        # <B^2> = 2 and unit displacement gap: t_dec = sqrt(2)/(1*sqrt(2)) = 1
        assert dyn.sequential_t_dec(0.3, 1.3, 2.0, 1) == pytest.approx(1.0, rel=1e-14)
        assert dyn.sequential_exponent(0.3, 1.3, 1.0, 0.0, 2.0, 1) == pytest.approx(
            1.0, rel=1e-14
        )

    def test_alpha_two_scale(self):
        # gap |x'^2 - x^2| = 3 at x=1, x'=2
        want = math.sqrt(2.0) / (3.0 * math.sqrt(5.0))
        assert dyn.sequential_t_dec(1.0, 2.0, 5.0, 2) == pytest.approx(want, rel=1e-14)

    def test_equal_powers_never_dephase(self):
        assert dyn.sequential_t_dec(0.7, -0.7, 4.0, 2) == math.inf
        assert dyn.sequential_exponent(0.7, -0.7, 9.0, 0.0, 4.0, 2) == 0.0
        assert dyn.sequential_t_dec(0.5, 0.5, 4.0, 1) == math.inf
        assert dyn.sequential_t_dec(0.1, 2.0, 0.0, 1) == math.inf

    def test_guards(self):
        with pytest.raises(ConfigError):
            dyn.sequential_t_dec(0.0, 1.0, -1.0, 1)
        with pytest.raises(ConfigError):
            dyn.sequential_t_dec(0.0, 1.0, 1.0, 0)
        with pytest.raises(ConfigError):
            dyn.sequential_exponent(0.0, 1.0, 0.5, 1.0, 1.0, 1)  # t < t0

    @given(
        t=st.floats(0.0, 20.0),
        dt=st.floats(0.0, 5.0),
        bv=st.floats(0.01, 50.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_exponent_nonnegative_and_monotone(self, t, dt, bv):
        lo = dyn.sequential_exponent(0.2, 1.4, t, 0.0, bv, 1)
        hi = dyn.sequential_exponent(0.2, 1.4, t + dt, 0.0, bv, 1)
        assert 0.0 <= lo <= hi


class TestPartialElement:
    def test_frozen_regression(self):
        el = dyn.rho_ps_element_partial(make_setup(), 0.3, -0.7, 0.0, 1.0, 0.8)
        assert el.real == pytest.approx(-0.00023458339553380532, rel=1e-10)
        assert el.imag == pytest.approx(0.0001325225344116559, rel=1e-10)

    def test_initial_product(self):
        stp = make_setup()
        el = dyn.rho_ps_element_partial(stp, 0.4, -0.2, 0.0, 1.0, 0.0)
        want = 0.45 * dyn.pointer_density(stp.pointer, 0.4, -0.2)
        assert el == pytest.approx(want, rel=1e-12)

    def test_diagonal_moving_peak_undamped(self):
        # equal eigenvalues at equal co-moving positions: D = phi = 0 exactly
        stp = make_setup(epsilon=2.0)
        t = 1.1
        el = dyn.rho_ps_element_partial(stp, 2.0 * t, 2.0 * t, 1.0, 1.0, t)
        assert el.imag == 0.0
        assert el.real == pytest.approx(0.45 * NORM, rel=1e-12)

    def test_peak_coherence_matches_peak_exponent(self):
        stp = make_setup(epsilon=2.0)
        for t in (0.4, 0.8):
            el = dyn.rho_ps_element_partial(stp, 0.0, 2.0 * t, 0.0, 1.0, t)
            want = 0.45 * NORM * math.exp(-d_peak(stp, 0.0, 1.0, t))
            assert abs(el) == pytest.approx(want, rel=1e-12)

    def test_hermiticity(self):
        stp = make_setup()
        a = dyn.rho_ps_element_partial(stp, 0.3, -0.9, 0.0, 1.0, 0.7)
        b = dyn.rho_ps_element_partial(stp, -0.9, 0.3, 1.0, 0.0, 0.7)
        assert a == pytest.approx(np.conj(b), rel=1e-12)

    def test_free_dephasing_phase(self):
        plain = make_setup()
        dressed = make_setup(obj=two_level(energies=(0.0, 1.5)))
        t = 0.9
        a = dyn.rho_ps_element_partial(plain, 0.3, -0.7, 0.0, 1.0, t)
        b = dyn.rho_ps_element_partial(dressed, 0.3, -0.7, 0.0, 1.0, t)
        assert b == pytest.approx(a * np.exp(1.5j * t), rel=1e-12)

    def test_dead_bath_degenerates_to_premeasurement(self):
        stp = make_setup(bath=DEAD)
        for x, xp in [(0.3, -0.7), (1.2, 0.4)]:
            a = dyn.rho_ps_element_partial(stp, x, xp, 0.0, 1.0, 0.8)
            b = dyn.premeasurement_element(stp, x, xp, 0.0, 1.0, 0.8)
            assert a == pytest.approx(b, abs=1e-8)

    def test_guards(self):
        with pytest.raises(ConfigError):
            dyn.rho_ps_element_partial(eq_setup(), 0.0, 0.0, 0.0, 1.0, 0.5)
        with pytest.raises(ConfigError):
            dyn.rho_ps_element_partial(make_setup(), 0.0, 0.0, 0.0, 1.0, -0.5)


class TestEffectivePotential:
    def test_vanishing_coupling_is_bare_well(self):
        ptr = plain_pointer(1.0)  # v2 = 1/4
        xs = np.linspace(-3.0, 3.0, 7)
        got = dyn.effective_potential(ptr, DEAD, 2, xs)
        np.testing.assert_allclose(got, 0.125 * xs**2, rtol=1e-10)

    def test_linear_coupling_softens_curvature(self):
        ptr = PointerSpec(delta=1.0, lam=4.0 * math.pi, mass=1.0, v2=2.0)
        g0 = bm.gamma0(EQ_BATH)
        h = 1e-4
        curv = (
            dyn.effective_potential(ptr, EQ_BATH, 1, h)
            - 2.0 * dyn.effective_potential(ptr, EQ_BATH, 1, 0.0)
            + dyn.effective_potential(ptr, EQ_BATH, 1, -h)
        ) / h**2
        assert curv == pytest.approx(2.0 - 2.0 * g0, rel=1e-6)

    def test_barrier_geometry_quartic(self):
        # gamma0 = 1/8 (m=1, w_D=1, gamma_hat = sqrt(pi)/4) against v2 = 1
        b = SpectralBath(m=1, gamma_hat=math.sqrt(math.pi) / 4.0, w_D=1.0, beta=1.0)
        assert bm.gamma0(b) == pytest.approx(0.125, rel=1e-14)
        ptr = PointerSpec(delta=1.0, lam=4.0 * math.pi, mass=1.0, v2=1.0)
        assert dyn.w_eff(ptr, b, 2) == pytest.approx(2.0 * math.sqrt(2.0), rel=1e-12)
        assert dyn.barrier_height(ptr, b, 2) == pytest.approx(0.5, rel=1e-12)
        # the barrier top really is the potential value at +- W_eff / 2
        top = dyn.effective_potential(ptr, b, 2, 0.5 * dyn.w_eff(ptr, b, 2))
        assert top == pytest.approx(0.5, rel=1e-12)

    def test_barrier_value_matches_potential_sextic(self):
        ptr = PointerSpec(delta=1.0, lam=4.0 * math.pi, mass=1.0, v2=0.7)
        half = 0.5 * dyn.w_eff(ptr, OHMIC, 3)
        want = dyn.effective_potential(ptr, OHMIC, 3, half)
        assert dyn.barrier_height(ptr, OHMIC, 3) == pytest.approx(want, rel=1e-12)

    def test_linear_instability(self):
        ptr = PointerSpec(delta=1.0, lam=4.0 * math.pi, mass=1.0, v2=0.25)
        with pytest.raises(StabilityError):
            dyn.effective_potential(ptr, OHMIC, 1, 0.5)  # 2 gamma0 >> 1/4
        with pytest.raises(StabilityError):
            dyn.w_eff(ptr, OHMIC, 1)

    def test_stable_linear_coupling_has_no_barrier(self):
        ptr = PointerSpec(delta=1.0, lam=4.0 * math.pi, mass=1.0, v2=2.0)
        assert dyn.w_eff(ptr, EQ_BATH, 1) == math.inf
        assert dyn.barrier_height(ptr, EQ_BATH, 1) == math.inf


class TestR0Density:
    def test_requires_equilibrium_variant(self):
        with pytest.raises(ConfigError):
            dyn.r0_density(make_setup(), 0.0, 0.0)

    def test_normalized_on_the_well(self):
        stp = eq_setup(alpha=2)
        half = 0.5 * dyn.w_eff(stp.pointer, stp.bath, 2)
        xs = np.linspace(-half, half, 6001)
        norm = np.trapezoid(dyn.r0_density(stp, xs, xs), xs)
        assert norm == pytest.approx(1.0, abs=1e-8)

    def test_normalized_linear_coupling(self):
        stp = eq_setup(alpha=1)
        d_eff = 1.0 / math.sqrt(stp.bath.beta * (2.0 - 2.0 * bm.gamma0(stp.bath)))
        xs = np.linspace(-10 * d_eff, 10 * d_eff, 4001)
        norm = np.trapezoid(dyn.r0_density(stp, xs, xs), xs)
        assert norm == pytest.approx(1.0, abs=1e-8)

    def test_linear_diagonal_is_gaussian_with_effective_width(self):
        # quadratic V_eff makes the diagonal exactly Gaussian, width Delta_eff
        stp = eq_setup(alpha=1)
        d_eff = 1.0 / math.sqrt(stp.bath.beta * (2.0 - 2.0 * bm.gamma0(stp.bath)))
        xs = np.linspace(-3 * d_eff, 3 * d_eff, 31)
        got = dyn.r0_density(stp, xs, xs)
        want = np.exp(-(xs**2) / (2.0 * d_eff**2)) / math.sqrt(
            2.0 * math.pi * d_eff**2
        )
        np.testing.assert_allclose(got, want, rtol=1e-10)

    def test_quartic_diagonal_near_gaussian_at_small_x(self):
        stp = eq_setup(alpha=2)
        d_eff = 1.0 / math.sqrt(stp.bath.beta * 2.0)  # quartic term leaves v2 alone
        xs = np.linspace(-0.5 * d_eff, 0.5 * d_eff, 21)
        got = dyn.r0_density(stp, xs, xs)
        want = np.exp(-(xs**2) / (2.0 * d_eff**2)) * dyn.r0_density(stp, 0.0, 0.0)
        np.testing.assert_allclose(got, want, rtol=1e-2)

    def test_peak_value_regression(self):
        # 1 / Z_eff for the quartic fixture
        assert dyn.r0_density(eq_setup(alpha=2), 0.0, 0.0) == pytest.approx(
            1.0 / 1.9096954485961795, rel=1e-10
        )

    def test_off_diagonal_decay(self):
        stp = eq_setup(alpha=2)
        mid = dyn.r0_density(stp, -0.4, 0.4)
        assert 0.0 < mid < dyn.r0_density(stp, 0.0, 0.0)


class TestFrictionDrift:
    def test_vanishes_at_zero_time_and_equal_trajectories(self):
        stp = eq_setup(alpha=2)
        assert dyn.g_t(stp, 0.31, -0.47, 0.0, 1.0, 0.0) == 0.0
        assert dyn.g_t(stp, 0.6, 0.6, 1.0, 1.0, 1.3) == pytest.approx(0.0, abs=1e-18)

    def test_frozen_values(self):
        args = (0.31, -0.47, 0.0, 1.0, 0.9)
        assert dyn.g_t(eq_setup(alpha=1), *args) == pytest.approx(
            -0.005840071659308, rel=1e-9
        )
        assert dyn.g_t(eq_setup(alpha=2), *args) == pytest.approx(
            0.00021777323863446732, rel=1e-9
        )
        assert dyn.g_t(eq_setup(alpha=3), *args) == pytest.approx(
            -1.511484275449e-05, rel=1e-9
        )

    @pytest.mark.parametrize("alpha", [1, 2, 3])
    def test_matches_time_domain_oracle(self, alpha):
        stp = eq_setup(alpha=alpha)
        for x, xp, s, sp, t in [
            (0.31, -0.47, 0.0, 1.0, 0.9),
            (-0.2, 0.55, 1.0, 0.0, 1.7),
            (0.1, 0.3, 0.0, 1.0, -0.8),
        ]:
            lib = dyn.g_t(stp, x, xp, s, sp, t)
            ora = _oracles.g_time_domain(
                EQ_BATH.m,
                EQ_BATH.gamma_hat,
                EQ_BATH.w_D,
                EQ_POINTER.lam,
                2.0,
                alpha,
                x,
                xp,
                s,
                sp,
                t,
            )
            assert lib == pytest.approx(ora, rel=1e-9)

    def test_reflection_identity(self):
        # g_{-T} with charges (s, s') equals -g_T with charges (-s, -s')
        stp = eq_setup(alpha=2)
        for x, xp, s, sp, t in [(0.4, -0.2, 0.0, 1.0, 0.7), (0.1, 0.9, 1.0, 0.0, 1.2)]:
            left = dyn.g_t(stp, x, xp, s, sp, -t)
            right = -dyn.g_t(stp, x, xp, -s, -sp, t)
            assert left == pytest.approx(right, rel=1e-12)

    def test_bounded_by_decoherence_exponent(self):
        # g^2 <= (8 pi^2)^{-a} lam^{2a} beta gamma0 D, Cauchy-Schwarz on the
        # shared trajectory polynomial; checked on 210 random draws
        rng = np.random.default_rng(11)
        g0 = bm.gamma0(EQ_BATH)
        checked = 0
        for alpha in (1, 2, 3):
            stp = eq_setup(alpha=alpha)
            bound_pref = (
                (8.0 * math.pi**2) ** (-alpha)
                * EQ_POINTER.lam ** (2 * alpha)
                * EQ_BATH.beta
                * g0
            )
            for t in (0.4, 0.9, 1.7):
                for _ in range(24):
                    x, xp = rng.normal(scale=1.2, size=2)
                    s, sp = rng.choice([0.0, 1.0], size=2, replace=True)
                    g = dyn.g_t(stp, x, xp, s, sp, t)
                    d = d_exponent(stp, x, xp, s, sp, t).d
                    assert g * g <= bound_pref * d + 1e-13
                    checked += 1
        assert checked >= 200


class TestRtBracket:
    def test_reduces_to_static_envelope_at_zero_time(self):
        for alpha in (1, 2, 3):
            stp = eq_setup(alpha=alpha)
            got = dyn.r_t(stp, 0.31, -0.47, 0.0, 1.0, 0.0)
            want = dyn.r0_density(stp, 0.31, -0.47)
            assert got == pytest.approx(want, rel=1e-12)

    def test_frozen_values(self):
        args = (0.31, -0.47, 0.0, 1.0, 0.9)
        v1 = dyn.r_t(eq_setup(alpha=1), *args)
        assert v1 == pytest.approx(0.346286469441947 - 0.00045760307261452355j, rel=1e-9)
        v2 = dyn.r_t(eq_setup(alpha=2), *args)
        assert v2 == pytest.approx(0.3303516661863125 - 7.378345741924257e-05j, rel=1e-9)
        v3 = dyn.r_t(eq_setup(alpha=3), *args)
        assert v3 == pytest.approx(0.3540480271707744 - 1.831817932501484e-06j, rel=1e-9)

    @pytest.mark.parametrize("alpha", [1, 2])
    def test_closed_forms_match_numeric_bracket(self, alpha):
        stp = eq_setup(alpha=alpha)
        for x, xp, s, sp, t in [
            (0.31, -0.47, 0.0, 1.0, 0.9),
            (-0.8, 0.3, 1.0, 0.0, 1.6),
            (0.05, 0.9, 0.0, 1.0, 2.4),
        ]:
            closed = dyn.r_t(stp, x, xp, s, sp, t)
            numeric = dyn.r_t_numeric(stp, x, xp, s, sp, t)
            assert closed == pytest.approx(numeric, rel=1e-8)

    @pytest.mark.parametrize("alpha", [2, 3])
    def test_numeric_bracket_against_dense_trapezoid(self, alpha):
        stp = eq_setup(alpha=alpha)
        x, xp, s, sp, t = 0.31, -0.47, 0.0, 1.0, 0.9
        g = dyn.g_t(stp, x, xp, s, sp, t)
        a = 2.0 * math.sqrt(2.0) * math.pi * (x + xp) / EQ_POINTER.lam
        zs = np.linspace(-8.5, 8.5, 40001)
        vals = np.exp(-(zs**2) - 2j * g * (zs + 0.5 * a) ** alpha)
        bracket = np.trapezoid(vals, zs) / math.sqrt(math.pi)
        want = dyn.r0_density(stp, x, xp) * bracket
        got = dyn.r_t_numeric(stp, x, xp, s, sp, t)
        assert got == pytest.approx(want, rel=1e-10)

    def test_drift_only_attenuates(self):
        # |bracket| <= 1 for every argument (triangle inequality on the
        # xi average), so the envelope never grows
        rng = np.random.default_rng(23)
        for alpha in (1, 2, 3):
            stp = eq_setup(alpha=alpha)
            for _ in range(10):
                x, xp = rng.normal(scale=0.9, size=2)
                t = float(rng.uniform(0.1, 2.0))
                got = abs(dyn.r_t(stp, x, xp, 0.0, 1.0, t))
                assert got <= dyn.r0_density(stp, x, xp) * (1.0 + 1e-12)

    def test_requires_equilibrium_variant(self):
        with pytest.raises(ConfigError):
            dyn.r_t(make_setup(), 0.0, 0.0, 0.0, 1.0, 0.5)


class TestEquilibriumElement:
    def test_initial_product(self):
        stp = eq_setup(alpha=2)
        el = dyn.rho_ps_element_equilibrium(stp, 0.4, -0.2, 0.0, 1.0, 0.0)
        want = 0.45 * dyn.r0_density(stp, 0.4, -0.2)
        assert el == pytest.approx(want, rel=1e-12)

    def test_frozen_regression(self):
        el = dyn.rho_ps_element_equilibrium(eq_setup(alpha=2), 0.31, -0.47, 0.0, 1.0, 0.9)
        assert el.real == pytest.approx(0.0011283771496083483, rel=1e-9)
        assert el.imag == pytest.approx(-0.00044059967282868086, rel=1e-9)

    def test_hermiticity(self):
        stp = eq_setup(alpha=2)
        a = dyn.rho_ps_element_equilibrium(stp, 0.3, -0.9, 0.0, 1.0, 0.7)
        b = dyn.rho_ps_element_equilibrium(stp, -0.9, 0.3, 1.0, 0.0, 0.7)
        assert a == pytest.approx(np.conj(b), rel=1e-12)

    def test_decay_matches_partial_while_exponent_small(self):
        # strip the (different) envelopes; both preparations then damp
        # coherences by the same e^{-D} until D grows past order one
        stp = eq_setup(alpha=2)
        stp_partial = MeasurementSetup(
            epsilon=2.0,
            alpha=2,
            object=two_level(),
            pointer=EQ_POINTER,
            bath=EQ_BATH,
        )
        x, xp = 0.4, -0.3
        for t, tol in [(0.3, 1e-4), (0.6, 5e-3), (1.0, 2.5e-2)]:
            xs, xps = x, xp - 2.0 * t
            d = d_exponent(stp, xs, xps, 0.0, 1.0, t).d
            assert d < 0.3
            eq_decay = abs(
                dyn.rho_ps_element_equilibrium(stp, x, xp, 0.0, 1.0, t)
            ) / (0.45 * dyn.r0_density(stp, xs, xps))
            partial_decay = abs(
                dyn.rho_ps_element_partial(stp_partial, x, xp, 0.0, 1.0, t)
            ) / (0.45 * dyn.pointer_density(EQ_POINTER, xs, xps))
            assert partial_decay == pytest.approx(math.exp(-d), rel=1e-10)
            assert eq_decay == pytest.approx(partial_decay, rel=tol)

    def test_diagonal_is_shifted_equilibrium_density(self):
        # on the block diagonal both D and g vanish identically, so the
        # density is the initial equilibrium profile dragged by eps t s
        stp = eq_setup(alpha=2)
        for t in (0.5, 4.0):
            for x in (-0.3, 0.0, 0.8):
                el = dyn.rho_ps_element_equilibrium(stp, x, x, 1.0, 1.0, t)
                want = 0.45 * dyn.r0_density(stp, x - 2.0 * t, x - 2.0 * t)
                assert complex(el) == pytest.approx(want, rel=1e-12)

    def test_guards(self):
        with pytest.raises(ConfigError):
            dyn.rho_ps_element_equilibrium(make_setup(), 0.0, 0.0, 0.0, 1.0, 0.5)
        with pytest.raises(ConfigError):
            dyn.rho_ps_element_equilibrium(eq_setup(), 0.0, 0.0, 0.0, 1.0, -0.5)


class TestGridState:
    def test_constructor_validation(self):
        good = np.array([[1.0, 0.1], [0.1, 0.5]], dtype=complex)
        with pytest.raises(ConfigError):
            dyn.GridState(np.array([0.0, -1.0]), {(0, 0): good}, 0.0)
        with pytest.raises(ConfigError):
            dyn.GridState(np.array([0.0, 1.0]), {(0, 0): np.ones((3, 3))}, 0.0)
        with pytest.raises(ConfigError):
            dyn.GridState(np.array([0.0, 1.0]), {(0, 1): good}, 0.0)  # no partner
        bad = np.array([[1.0, 0.3 + 0.2j], [0.3 + 0.2j, 0.5]])
        with pytest.raises(ConfigError):
            dyn.GridState(np.array([0.0, 1.0]), {(0, 0): bad}, 0.0)

    def test_frozen_containers(self):
        xg = np.linspace(-1.0, 1.0, 5)
        mat = np.eye(5, dtype=complex)
        state = dyn.GridState(xg, {(0, 0): mat}, 0.0)
        with pytest.raises(TypeError):
            state.elements[(0, 0)] = mat
        with pytest.raises(ValueError):
            state.elements[(0, 0)][0, 0] = 2.0
        with pytest.raises(ValueError):
            state.x_grid[0] = -2.0

    def test_trace_and_density_of_gaussian(self):
        ptr = plain_pointer(1.0)
        xg = np.linspace(-8.0, 8.0, 801)
        mat = np.asarray(dyn.pointer_density(ptr, xg[:, None], xg[None, :]))
        state = dyn.GridState(xg, {(0, 0): mat.astype(complex)}, 0.0)
        assert state.trace() == pytest.approx(1.0, abs=1e-9)
        np.testing.assert_allclose(
            state.position_density(), dyn.pointer_density(ptr, xg, xg), rtol=1e-14
        )

    def test_assembly_initial_product(self):
        stp = make_setup()
        xg = np.linspace(-4.0, 4.0, 33)
        state = dyn.grid_state(stp, 0.0, x_grid=xg)
        dens = np.asarray(dyn.pointer_density(stp.pointer, xg[:, None], xg[None, :]))
        np.testing.assert_allclose(state.elements[(0, 1)], 0.45 * dens, rtol=1e-12)
        np.testing.assert_allclose(state.elements[(0, 0)], 0.55 * dens, rtol=1e-12)

    def test_assembly_matches_scalar_elements(self):
        stp = make_setup(epsilon=1.0)
        xg = np.linspace(-2.0, 3.0, 7)
        t = 0.6
        state = dyn.grid_state(stp, t, x_grid=xg)
        for (i, j), block in state.elements.items():
            s, sp = stp.object.eigenvalues[i], stp.object.eigenvalues[j]
            for a in (0, 3, 6):
                for b in (1, 4):
                    want = dyn.rho_ps_element_partial(stp, xg[a], xg[b], s, sp, t)
                    assert block[a, b] == pytest.approx(want, rel=1e-10, abs=1e-16)

    def test_hermitian_blocks(self):
        stp = make_setup()
        state = dyn.grid_state(stp, 0.5, x_grid=np.linspace(-3.0, 5.0, 21))
        np.testing.assert_array_equal(
            state.elements[(1, 0)], state.elements[(0, 1)].conj().T
        )

    def test_default_grid_covers_dragged_peaks(self):
        stp = make_setup(epsilon=2.0)  # eigenvalues 0 and 1
        xg = dyn.default_x_grid(stp, 3.0)
        assert xg[0] <= -4.0 and xg[-1] >= 6.0 + 4.0
        state = dyn.grid_state(stp, 3.0)
        assert state.trace() == pytest.approx(1.0, abs=1e-3)

    def test_trace_tight_with_wide_margin(self):
        stp = make_setup(epsilon=1.0)
        xg = dyn.default_x_grid(stp, 1.0, n=1201, margin=8.0)
        state = dyn.grid_state(stp, 1.0, x_grid=xg)
        assert state.trace() == pytest.approx(1.0, abs=1e-8)

    def test_off_diagonal_block_damped_at_dephasing_time(self):
        # at t = t_dec the peak coherence has fallen by e^{-1} relative to
        # the populations (equal-population spin so the ratio is clean)
        stp = make_setup(alpha=1, epsilon=50.0, obj=spin_half(), bath=_c10_bath())
        td = measurement_t_dec(stp)
        xg = dyn.default_x_grid(stp, td, n=801, margin=6.0)
        state = dyn.grid_state(stp, td, x_grid=xg)
        off = np.max(np.abs(state.elements[(0, 1)]))
        diag = np.max(np.abs(state.elements[(0, 0)]))
        assert off / diag == pytest.approx(math.exp(-1.0), rel=0.02)

    def test_time_guard(self):
        with pytest.raises(ConfigError):
            dyn.grid_state(make_setup(), -0.1)


def _c10_bath():
    """Weak super-Ohmic bath with <B^2> = 0.01 (eta = 0.1 at beta = Delta = 1)."""
    probe = SpectralBath(m=3, gamma_hat=1.0, w_D=5.0, beta=1.0)
    return SpectralBath(
        m=3, gamma_hat=0.01 / bm.b_variance(probe), w_D=5.0, beta=1.0
    )


class TestPointerReduced:
    def test_initial_state_is_the_bare_pointer(self):
        stp = make_setup(obj=spin_half())
        xg = np.linspace(-6.0, 6.0, 601)
        red = dyn.pointer_reduced(stp, 0.0, x_grid=xg)
        np.testing.assert_allclose(
            red.position_density(), dyn.pointer_density(stp.pointer, xg, xg), rtol=1e-10
        )

    def test_density_is_mixture_of_dragged_gaussians(self):
        # the position diagonal of every populated block is undamped, so the
        # density is exactly the classical mixture of dragged packets
        stp = make_setup(alpha=1, epsilon=1.0, obj=spin_half(), bath=OHMIC)
        for t in (1.0, 3.0):
            xg = dyn.default_x_grid(stp, t, n=801, margin=6.0)
            red = dyn.pointer_reduced(stp, t, x_grid=xg)
            mix = 0.5 * (
                dyn.pointer_density(stp.pointer, xg - 0.5 * t, xg - 0.5 * t)
                + dyn.pointer_density(stp.pointer, xg + 0.5 * t, xg + 0.5 * t)
            )
            np.testing.assert_allclose(red.position_density(), mix, atol=1e-12)
            assert red.trace() == pytest.approx(1.0, abs=1e-6)

    def test_two_peaks_emerge_after_separation(self):
        stp = make_setup(alpha=1, epsilon=1.0, obj=spin_half(), bath=OHMIC)
        xg = dyn.default_x_grid(stp, 3.0, n=1201, margin=6.0)

        def maxima(red):
            d = red.position_density()
            idx = (np.diff(np.sign(np.diff(d))) < 0).nonzero()[0] + 1
            return xg[idx]

        early = dyn.pointer_reduced(stp, 1.0, x_grid=xg)
        assert maxima(early).size == 1  # packets still overlap into one bump
        late = dyn.pointer_reduced(stp, 3.0, x_grid=xg)
        locs = maxima(late)
        assert locs.size == 2
        assert locs[0] == pytest.approx(-locs[1], abs=1e-9)
        # overlap pulls the maxima slightly inside the packet centres +-1.5
        assert 2.8 <= locs[1] - locs[0] <= 3.0

    def test_unpopulated_levels_are_skipped(self):
        obj = ObjectSpec(
            eigenvalues=(0.0, 1.0), rho_s=np.array([[1.0, 0.0], [0.0, 0.0]])
        )
        stp = make_setup(obj=obj, epsilon=2.0)
        xg = np.linspace(-5.0, 9.0, 701)
        red = dyn.pointer_reduced(stp, 1.0, x_grid=xg)
        want = dyn.pointer_density(stp.pointer, xg, xg)  # level 0 never moves
        np.testing.assert_allclose(red.position_density(), want, rtol=1e-10)


class TestWigner:
    def test_initial_gaussian_closed_form(self):
        stp = make_setup(obj=spin_half())
        wg = dyn.wigner(stp, 0.0, x_grid=np.linspace(-8.0, 8.0, 641))
        lam = stp.pointer.lam
        pref = NORM * lam / (2.0 * math.sqrt(2.0 * math.pi) * math.pi)
        want = pref * np.exp(
            -0.5 * wg.x_grid[:, None] ** 2 - lam**2 * wg.p_grid[None, :] ** 2 / (8.0 * math.pi**2)
        )
        assert np.max(np.abs(wg.w - want)) < 1e-6 * np.max(want)
        assert wg.normalization() == pytest.approx(1.0, abs=1e-6)

    def test_marginal_matches_position_density(self):
        stp = make_setup(alpha=1, epsilon=1.0, obj=spin_half(), bath=OHMIC)
        t = 1.0
        xg = dyn.default_x_grid(stp, t, n=801, margin=8.0)
        wg = dyn.wigner(stp, t, x_grid=xg)
        red = dyn.pointer_reduced(stp, t, x_grid=xg)
        dens = red.position_density()
        assert np.max(np.abs(wg.position_marginal() - dens)) < 1e-5 * dens.max()
        assert wg.normalization() == pytest.approx(1.0, abs=1e-5)

    def test_explicit_momentum_grid_is_respected(self):
        stp = make_setup(obj=spin_half())
        pg = np.linspace(-2.0, 2.0, 161)
        wg = dyn.wigner(stp, 0.0, x_grid=np.linspace(-8.0, 8.0, 641), p_grid=pg)
        np.testing.assert_array_equal(wg.p_grid, pg)

    def test_transform_reproduces_cat_interference(self):
        # pure superposition of displaced packets fed straight through the
        # antidiagonal transform: fringes with the exact closed form,
        # strongly negative at the midpoint
        d = 3.0
        xg = np.linspace(-10.0, 10.0, 1001)
        psi = np.exp(-0.5 * (xg - d) ** 2) + np.exp(-0.5 * (xg + d) ** 2)
        psi = psi / (math.pi**0.25 * math.sqrt(2.0 * (1.0 + math.exp(-(d**2)))))
        rho = np.outer(psi, psi)
        pg = np.linspace(-4.0, 4.0, 321)
        w = dyn._wigner_transform(xg, rho, pg)
        xs, ps = xg[:, None], pg[None, :]
        want = (
            np.exp(-((xs - d) ** 2) - ps**2)
            + np.exp(-((xs + d) ** 2) - ps**2)
            + 2.0 * np.exp(-(xs**2) - ps**2) * np.cos(2.0 * ps * d)
        ) / (2.0 * math.pi * (1.0 + math.exp(-(d**2))))
        assert np.max(np.abs(w - want)) < 1e-8 * want.max()
        assert w.min() < -0.5 * w.max()

    def test_reduced_mixture_stays_nonnegative(self):
        # tracing out the object leaves a classical mixture of packets even
        # with the bath switched off -- the which-path record lives in the
        # object, so the reduced pointer Wigner function carries no fringes
        stp = make_setup(alpha=1, epsilon=1.0, obj=spin_half(), bath=DEAD)
        wg = dyn.wigner(stp, 8.0, x_grid=np.linspace(-12.0, 12.0, 961))
        assert wg.w.min() > -1e-6 * wg.w.max()
        assert wg.normalization() == pytest.approx(1.0, abs=1e-5)

    def test_decoherence_kills_interference(self):
        # bath on at eta = 0.1, five dephasing times: any residual ridge
        # between the packets sits below one part in 10^3 (this guards the
        # transform numerics -- momentum aliasing would leave ghost ridges)
        stp = make_setup(alpha=1, epsilon=50.0, obj=spin_half(), bath=_c10_bath())
        td = measurement_t_dec(stp)
        t = 5.0 * td
        xg = dyn.default_x_grid(stp, t, n=2049, margin=8.0)
        wg = dyn.wigner(stp, t, x_grid=xg)
        assert wg.normalization() == pytest.approx(1.0, abs=1e-5)
        peak = wg.w.max()
        mid = np.abs(wg.x_grid) < 0.2 * (25.0 * t)  # between the two packets
        assert np.max(np.abs(wg.w[mid, :])) < 1e-3 * peak
        assert wg.w.min() > -1e-3 * peak

    def test_default_momentum_grid_spans_drift(self):
        # the bath drags the packets in momentum; the automatic p-window
        # must follow the measured drift and keep the marginal faithful
        stp = make_setup(alpha=1, epsilon=50.0, obj=spin_half(), bath=_c10_bath())
        td = measurement_t_dec(stp)
        t = 2.0 * td
        xg = dyn.default_x_grid(stp, t, n=1025, margin=8.0)
        wg = dyn.wigner(stp, t, x_grid=xg)
        red = dyn.pointer_reduced(stp, t, x_grid=xg)
        dens = red.position_density()
        assert np.max(np.abs(wg.position_marginal() - dens)) < 1e-5 * dens.max()
        assert wg.p_grid[-1] > 1.0  # window noticeably beyond the bare 5 sigma_p

    def test_coarse_grids_are_rejected(self):
        stp = make_setup(obj=spin_half())
        with pytest.raises(ResolutionError):
            dyn.wigner(stp, 0.0, x_grid=np.linspace(-12.0, 12.0, 9))
        with pytest.raises(ResolutionError):
            dyn.wigner(
                stp,
                0.0,
                x_grid=np.linspace(-8.0, 8.0, 641),
                p_grid=np.linspace(-5.0, 5.0, 5),
            )
        with pytest.raises(ConfigError):
            bad = np.concatenate([np.linspace(-8.0, 0.0, 300), np.linspace(0.1, 8.0, 200)])
            dyn.wigner(stp, 0.0, x_grid=bad)

    def test_aliased_momentum_drift_is_rejected(self):
        # synthetic boosted state whose phase advances 2.8 rad per grid step:
        # inside the detectable band (2.2, pi) the guard must fire.  (A boost
        # aliasing by a full 2 pi is indistinguishable from rest on a uniform
        # grid; no sampled representation can flag that case.)
        xg = np.linspace(-8.0, 8.0, 161)  # dx = 0.1
        p_bar = 14.0  # phase step 2 p dx = 2.8 rad
        mat = dyn.pointer_density(plain_pointer(1.0), xg[:, None], xg[None, :])
        mat = mat * np.exp(1j * p_bar * (xg[None, :] - xg[:, None]))
        with pytest.raises(ResolutionError):
            dyn._drift_bound(xg, mat)

    def test_resolved_momentum_drift_is_measured(self):
        xg = np.linspace(-8.0, 8.0, 801)  # dx = 0.02
        p_bar = 3.0
        mat = dyn.pointer_density(plain_pointer(1.0), xg[:, None], xg[None, :])
        mat = mat * np.exp(1j * p_bar * (xg[None, :] - xg[:, None]))
        assert dyn._drift_bound(xg, mat) == pytest.approx(p_bar, rel=1e-9)
