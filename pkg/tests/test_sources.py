import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from wavesource import (
    ConfigError,
    ExponentialProfile,
    GaussianBlob,
    RickerProfile,
    SourceModel,
    eval_f,
    f_hat_analytic,
    f_l2_norm,
    f_l2_norm_analytic,
    g_derivatives,
    g_eval,
    g_hat,
    make_ball_grid,
    random_source_model,
    shell_moments,
)

from oracles import cap_moments, gaussian_bump, halfline_transform, lattice_fourier


def narrow_model():
    return SourceModel((GaussianBlob((0.0, 0.0, 0.0), 0.1, 1.0),), 0.95)


# ---------------------------------------------------------------- point values

def test_eval_f_matches_bump_expression():
    model = narrow_model()
    val = eval_f(model, np.array([[0.1, 0.0, 0.0]]))[0]
    assert abs(val - math.exp(-0.5)) <= 1e-14


def test_eval_f_truncates_at_four_widths():
    model = narrow_model()
    pts = np.array([[0.401, 0.0, 0.0], [0.399, 0.0, 0.0]])
    vals = eval_f(model, pts)
    assert vals[0] == 0.0
    assert vals[1] > 0.0


def test_eval_f_adds_blobs():
    b1 = GaussianBlob((0.2, 0.0, 0.0), 0.1, 1.0)
    b2 = GaussianBlob((-0.2, 0.0, 0.0), 0.15, -0.5)
    both = SourceModel((b1, b2), 0.95)
    pts = np.random.default_rng(5).uniform(-0.4, 0.4, size=(40, 3))
    expected = gaussian_bump(b1.center, b1.width, b1.amplitude, pts)
    expected += gaussian_bump(b2.center, b2.width, b2.amplitude, pts)
    assert_allclose(eval_f(both, pts), expected, atol=1e-15)


def test_empty_model_is_zero():
    model = SourceModel((), 0.95)
    assert np.all(eval_f(model, np.zeros((3, 3))) == 0.0)
    assert f_l2_norm_analytic(model) == 0.0


# ---------------------------------------------------------------- Fourier side

def test_fhat_at_origin_is_total_mass():
    model = narrow_model()
    val = f_hat_analytic(model, np.zeros((1, 3)))[0]
    expected = (2.0 * math.pi) ** 1.5 * 0.1**3
    assert abs(val - expected) <= 1e-12 * expected


def test_fhat_matches_lattice_sum():
    blobs = (
        GaussianBlob((0.1, -0.05, 0.2), 0.16, 1.0),
        GaussianBlob((-0.2, 0.1, 0.0), 0.15, 0.7),
    )
    model = SourceModel(blobs, 0.95)
    for xi in ([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, -1.5, 0.5], [0.0, 4.0, 3.0]):
        ref = lattice_fourier(
            [(b.center, b.width, b.amplitude) for b in blobs], np.asarray(xi)
        )
        val = f_hat_analytic(model, np.asarray(xi)[None, :])[0]
        # the closed form ignores the 4-width cut; its mass is ~1e-3 relative
        assert abs(val - ref) <= 3e-3 * abs(f_hat_analytic(model, np.zeros((1, 3)))[0])


@given(
    st.tuples(*[st.floats(-3.0, 3.0) for _ in range(3)]),
    st.tuples(*[st.floats(-0.2, 0.2) for _ in range(3)]),
)
@settings(max_examples=40, deadline=None)
def test_fhat_conjugate_symmetry(xi, center):
    model = SourceModel((GaussianBlob(center, 0.12, 0.8),), 0.95)
    xi = np.asarray(xi)
    plus = f_hat_analytic(model, xi[None, :])[0]
    minus = f_hat_analytic(model, -xi[None, :])[0]
    assert abs(minus - np.conj(plus)) <= 1e-13 * (1.0 + abs(plus))


def test_fhat_translation_phase():
    base = GaussianBlob((0.0, 0.0, 0.0), 0.12, 1.0)
    shift = np.array([0.1, -0.2, 0.15])
    moved = GaussianBlob(tuple(shift), 0.12, 1.0)
    xi = np.array([[3.0, 1.0, -2.0]])
    f0 = f_hat_analytic(SourceModel((base,), 0.95), xi)[0]
    f1 = f_hat_analytic(SourceModel((moved,), 0.95), xi)[0]
    assert abs(f1 - np.exp(-1j * float(xi[0] @ shift)) * f0) <= 1e-13


def test_f_l2_norm_closed_form():
    model = narrow_model()
    expected = math.pi**0.75 * 0.1**1.5
    assert abs(f_l2_norm_analytic(model) - expected) <= 1e-12
    # independently verified digits of the same quantity
    assert_allclose(f_l2_norm_analytic(model), 0.0746212302, rtol=1e-8)


def test_f_l2_norm_quadrature_agrees_with_closed_form():
    model = SourceModel(
        (
            GaussianBlob((0.1, 0.0, -0.1), 0.2, 1.0),
            GaussianBlob((-0.15, 0.2, 0.0), 0.15, 0.6),
        ),
        0.95,
    )
    ball = make_ball_grid(0.95, 48)
    assert abs(f_l2_norm(model, ball) - f_l2_norm_analytic(model)) <= 0.01 * (
        f_l2_norm_analytic(model)
    )


# ---------------------------------------------------------------- shell moments

def test_shell_moments_match_cap_quadrature():
    blob = GaussianBlob((0.05, 0.0, 0.025), 0.22, 1.0)
    model = SourceModel((blob,), 0.95)
    x = np.array([0.3, -0.8, 0.55])
    x = x / np.linalg.norm(x)
    nu = x.copy()
    ts = np.linspace(0.05, 2.4, 33)
    m0, _, m1, _ = shell_moments(model, x, nu, ts)
    scale0 = np.abs(m0).max()
    scale1 = np.abs(m1).max()
    for i, t in enumerate(ts):
        b0, b1 = cap_moments(blob.center, blob.width, blob.amplitude, x, nu, t)
        # the 1e-7 band is the quadrature oracle's own accuracy limit
        assert abs(m0[i] - b0) <= 1e-7 * scale0
        assert abs(m1[i] - b1) <= 1e-7 * scale1


def test_shell_moment_derivatives_match_finite_differences():
    blob = GaussianBlob((0.05, 0.0, 0.025), 0.22, 1.0)
    model = SourceModel((blob,), 0.95)
    x = np.array([0.0, 0.6, 0.8])
    nu = x.copy()
    d = np.linalg.norm(x - np.asarray(blob.center))
    ts = np.linspace(0.2, 2.3, 4001)
    m0, m0p, m1, m1p = shell_moments(model, x, nu, ts)
    fd0 = np.gradient(m0, ts)
    fd1 = np.gradient(m1, ts)
    # the moments kink where the shell meets the truncation radius; away
    # from those two times the finite difference should be clean O(dt^2)
    keep = np.ones_like(ts, dtype=bool)
    for edge in (d - 4.0 * blob.width, d + 4.0 * blob.width):
        keep &= np.abs(ts - edge) > 0.02
    keep[:2] = keep[-2:] = False
    assert np.abs(m0p[keep] - fd0[keep]).max() <= 1e-5 * np.abs(m0p).max()
    assert np.abs(m1p[keep] - fd1[keep]).max() <= 1e-5 * np.abs(m1p).max()
    inner = slice(2, -2)
    assert np.abs(m0p[inner] - fd0[inner]).max() <= 5e-3 * np.abs(m0p).max()
    assert np.abs(m1p[inner] - fd1[inner]).max() <= 5e-3 * np.abs(m1p).max()


def test_shell_moments_vanish_off_support():
    model = SourceModel((GaussianBlob((0.0, 0.0, 0.0), 0.1, 1.0),), 0.95)
    x = np.array([0.0, 0.0, 1.0])
    nu = x.copy()
    # shells with radius below |x| - 4w or above |x| + 4w miss the bump
    ts = np.array([0.25, 0.55, 1.45, 2.0])
    m0, m0p, m1, m1p = shell_moments(model, x, nu, ts)
    assert np.all(m0 == 0.0) and np.all(m1 == 0.0)
    assert np.all(m0p == 0.0) and np.all(m1p == 0.0)


# ---------------------------------------------------------------- time profiles

def test_exponential_profile_values():
    prof = ExponentialProfile(1.0)
    assert g_eval(prof, 0.5) == pytest.approx(math.exp(-0.5), rel=1e-14)
    assert g_eval(prof, -0.1) == 0.0
    gp, gpp = g_derivatives(prof, 0.0)
    assert gp == -1.0 and gpp == 1.0
    assert g_hat(prof, 1.0) == pytest.approx((1.0 - 1.0j) / 2.0, rel=1e-14)
    assert g_hat(prof, 0.0) == pytest.approx(1.0, rel=1e-14)
    assert prof.zero_ws == ()


@given(st.floats(0.0, 5.0), st.floats(0.0, 5.0))
@settings(max_examples=30, deadline=None)
def test_exponential_semigroup(s1, s2):
    prof = ExponentialProfile(0.7)
    assert g_eval(prof, s1 + s2) == pytest.approx(
        g_eval(prof, s1) * g_eval(prof, s2), rel=1e-12
    )


def test_ricker_profile_shape():
    prof = RickerProfile(1.0, 2.0)
    assert g_eval(prof, 2.0) == pytest.approx(1.0, abs=1e-14)
    gp, _ = g_derivatives(prof, 2.0)
    assert abs(gp) <= 1e-12
    assert g_eval(prof, -0.5) == 0.0
    assert prof.zero_ws == (0.0,)
    assert abs(g_hat(prof, 0.0)) <= 1e-15


@pytest.mark.parametrize(
    "profile", [ExponentialProfile(1.3), RickerProfile(0.8, 2.5)]
)
def test_ghat_matches_quadrature(profile):
    for w in (0.3, 1.0, 4.0):
        ref = halfline_transform(
            lambda t: g_eval(profile, t), w, 40.0
        )
        assert abs(g_hat(profile, w) - ref) <= 1e-6


# ---------------------------------------------------------------- model checks

def test_blob_outside_support_rejected():
    with pytest.raises(ConfigError):
        SourceModel((GaussianBlob((0.8, 0.0, 0.0), 0.1, 1.0),), 0.95)


def test_nonpositive_width_rejected():
    with pytest.raises(ConfigError):
        SourceModel((GaussianBlob((0.0, 0.0, 0.0), -0.1, 1.0),), 0.95)


@pytest.mark.parametrize("seed", range(12))
def test_random_models_stay_inside_support(seed):
    model = random_source_model(seed, 0.95)
    assert 1 <= len(model.blobs) <= 3
    for blob in model.blobs:
        reach = np.linalg.norm(blob.center) + 4.0 * blob.width
        assert reach <= 0.95 + 1e-12


def test_random_model_deterministic():
    a = random_source_model(4, 0.95)
    b = random_source_model(4, 0.95)
    assert a.blobs == b.blobs
    c = random_source_model(5, 0.95)
    assert a.blobs != c.blobs
