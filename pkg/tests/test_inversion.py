import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavesource import (
    ConfigError,
    DeconvolutionError,
    ExponentialProfile,
    FrequencyGrid,
    InputError,
    RickerProfile,
    SourceModel,
    SpectralData,
    SphereGrid,
    WaveVectorGrid,
    f_hat_analytic,
    helmholtz_oracle,
    helmholtz_oracle_dn,
    make_sphere_grid,
    reconstruct_fhat,
    reconstruct_field,
    select_band_limit,
    synthesize_f,
    temporal_fourier,
)
from wavesource.inversion import FourierField


# ------------------------------------------------------------ band selection

def test_band_limit_plateau_for_weak_noise():
    # noise at or above 1/e pins the cutoff at the observation time
    assert select_band_limit(3.0, 0.5, 1.0) == 3.0
    assert select_band_limit(3.0, math.exp(-1.0), 1.0) == 3.0


def test_band_limit_growth_case():
    # once |ln eps|^(1/4) clears the changeover the cutoff grows
    T, gamma = 1.0, 1.0
    val = select_band_limit(T, math.exp(-100.0), gamma)
    expected = T ** (2.0 / 3.0) * 100.0**0.25 / ((2.0 * gamma + 3.0) * math.pi) ** (
        1.0 / 3.0
    )
    assert val == pytest.approx(expected, rel=1e-12)
    assert val == pytest.approx(1.2626802114658, rel=1e-10)


def test_band_limit_accepts_log_noise():
    # discrepancies far below float underflow enter through their logarithm
    val = select_band_limit(1.0, 0.5, 1.0, log_eps=-1e4)
    assert val == pytest.approx(3.992945424655, rel=1e-10)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(T=0.0, eps=0.5, gamma=1.0),
        dict(T=1.0, eps=0.0, gamma=1.0),
        dict(T=1.0, eps=1.0, gamma=1.0),
        dict(T=1.0, eps=-0.5, gamma=1.0),
        dict(T=1.0, eps=0.5, gamma=1.0, log_eps=2.0),
    ],
)
def test_band_limit_rejects_bad_inputs(kwargs):
    with pytest.raises(InputError):
        select_band_limit(**kwargs)


@given(
    st.floats(min_value=-1e6, max_value=-1.5),
    st.floats(min_value=-1e6, max_value=-1.5),
    st.floats(min_value=0.5, max_value=20.0),
)
@settings(max_examples=60, deadline=None)
def test_band_limit_monotone_in_noise(le1, le2, T):
    lo, hi = min(le1, le2), max(le1, le2)
    # smaller noise (more negative log) never shrinks the usable band
    assert select_band_limit(T, 0.5, 1.0, log_eps=lo) >= select_band_limit(
        T, 0.5, 1.0, log_eps=hi
    )


# ----------------------------------------------------------- fhat via boundary

def test_reconstructed_fhat_matches_analytic(medium, medium_sd):
    for xi in (
        np.zeros(3),
        np.array([0.0, 0.0, 1.0]),
        np.array([2.0, 1.0, -1.0]),
        np.array([4.0, -3.0, 2.0]),
    ):
        fh = reconstruct_fhat(medium_sd, xi, medium.profile)
        fa = f_hat_analytic(medium.model, xi[None, :])[0]
        assert abs(fh - fa) <= 0.01 * abs(fa)


def test_reconstructed_fhat_from_exact_spectra(medium):
    """Feeding oracle spectra isolates the boundary-identity step."""
    sphere = make_sphere_grid(1.0, 8)
    fg = FrequencyGrid(5.0, 6)  # integer frequencies 0..5
    u = np.empty((len(sphere.weights), fg.n_freq), dtype=complex)
    dnu = np.empty_like(u)
    for i, w in enumerate(fg.ws):
        u[:, i] = helmholtz_oracle(
            medium.model, medium.profile, sphere.nodes, float(w), medium.ball
        )
        dnu[:, i] = helmholtz_oracle_dn(
            medium.model, medium.profile, sphere.nodes, sphere.normals, float(w),
            medium.ball,
        )
    sd = SpectralData(sphere, fg, u, dnu)
    for xi in (
        np.array([0.0, 0.0, 3.0]),
        4.0 * np.array([2.0, 1.0, 2.0]) / 3.0,
    ):
        fh = reconstruct_fhat(sd, xi, medium.profile)
        fa = f_hat_analytic(medium.model, xi[None, :])[0]
        assert abs(fh - fa) <= 3e-3 * abs(f_hat_analytic(medium.model, np.zeros((1, 3)))[0])


def test_fhat_requires_band_inside_record(medium_sd, medium):
    xi = np.array([0.0, 0.0, medium_sd.fgrid.w_max + 1.0])
    with pytest.raises(InputError):
        reconstruct_fhat(medium_sd, xi, medium.profile)


def test_deconvolution_guard_on_profile_zero():
    sphere = SphereGrid(
        radius=1.0,
        order=1,
        nodes=np.array([[0.0, 0.0, 1.0]]),
        normals=np.array([[0.0, 0.0, 1.0]]),
        weights=np.array([1.0]),
    )
    fg = FrequencyGrid(2.0, 9)
    sd = SpectralData(
        sphere, fg, np.ones((1, 9), dtype=complex), np.ones((1, 9), dtype=complex)
    )
    # the zero-mean pulse has no dc content, so xi = 0 cannot be deconvolved
    with pytest.raises(DeconvolutionError):
        reconstruct_fhat(sd, np.zeros(3), RickerProfile(1.0, 2.0))
    # the same guard trips when the floor is set above the response magnitude
    with pytest.raises(DeconvolutionError) as err:
        reconstruct_fhat(sd, np.zeros(3), ExponentialProfile(1.0), c0=2.0)
    assert err.value.magnitude == pytest.approx(1.0)
    assert err.value.threshold == 2.0


# ------------------------------------------------------------- field assembly

def test_reconstruct_field_guards(medium_sd, medium):
    with pytest.raises(ConfigError):
        reconstruct_field(medium_sd, WaveVectorGrid(30.0, 8), medium.profile)
    # the cube corner frequency sqrt(3) K must also stay inside the record
    with pytest.raises(ConfigError):
        reconstruct_field(medium_sd, WaveVectorGrid(16.0, 8), medium.profile)


def test_field_is_hermitian_after_symmetrization(medium, medium_sd):
    field = reconstruct_field(medium_sd, WaveVectorGrid(6.0, 16), medium.profile)
    assert field.hermitian_residual() <= 1e-14
    before = field.provenance["hermitian_residual_before"]
    assert 0.0 < before < 0.5
    assert field.band_limit == 6.0
    assert field.provenance["excluded_points"] == 0


def test_field_excludes_deconvolution_floor(medium, medium_sd):
    # push the floor above |ghat| at the largest corner frequencies
    field = reconstruct_field(
        medium_sd, WaveVectorGrid(8.0, 16), medium.profile, c0=0.08
    )
    assert field.provenance["excluded_points"] > 0
    assert np.all(np.isfinite(field.values))


def test_synthesis_recovers_band_limited_source(medium, medium_sd):
    field = reconstruct_field(medium_sd, WaveVectorGrid(8.0, 24), medium.profile)
    res = synthesize_f(field, medium.ball, truth=medium.model)
    # K = 8 leaves ~14% of the source mass above the cut for this width
    assert res.rel_l2_error <= 0.2
    assert res.imag_residual <= 1e-10
    assert res.band_limit == 8.0
    assert len(res.diagnostics["shell_rel_errors"]) == 8
    assert res.f_voxels.shape == (medium.ball.n_voxels,)


def test_synthesis_without_truth_reports_no_error(medium, medium_sd):
    field = reconstruct_field(medium_sd, WaveVectorGrid(4.0, 8), medium.profile)
    res = synthesize_f(field, medium.ball)
    assert res.rel_l2_error is None


def test_zero_field_synthesizes_to_zero(medium):
    grid = WaveVectorGrid(4.0, 8)
    field = FourierField(grid, np.zeros(8**3, dtype=complex))
    res = synthesize_f(field, medium.ball, truth=medium.model)
    assert np.all(res.f_voxels == 0.0)
    assert res.rel_l2_error == pytest.approx(1.0)


def test_field_value_shape_guard():
    grid = WaveVectorGrid(4.0, 8)
    with pytest.raises(InputError):
        FourierField(grid, np.zeros(7, dtype=complex))
