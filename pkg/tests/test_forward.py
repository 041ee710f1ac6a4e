import numpy as np
import pytest
from numpy.testing import assert_allclose

from wavesource import (
    CHANNELS,
    ConfigError,
    ExponentialProfile,
    GaussianBlob,
    PreconditionError,
    RickerProfile,
    SourceModel,
    SphereGrid,
    TimeGrid,
    exponential_decay_check,
    forward_sweep,
    make_ball_grid,
    make_sphere_grid,
    probe_channels,
    retarded_potential,
    saturation_time,
)

from oracles import radial_potential


def test_channel_layout(medium):
    ds = medium.ds
    n_nodes = len(medium.sphere.weights)
    for name in CHANNELS:
        assert ds.channels[name].shape == (n_nodes, medium.tgrid.n_steps + 1)
        # quiescent start
        assert np.all(ds.channels[name][:, 0] == 0.0)
    assert ds.provenance["profile"]["kind"] == "exponential"


def test_causality(medium):
    """Nothing arrives at a node before the first shell meets the support."""
    ds = medium.ds
    blob = medium.model.blobs[0]
    scale = np.abs(ds.channels["U"]).max()
    for i, x in enumerate(medium.sphere.nodes):
        arrival = np.linalg.norm(x - np.asarray(blob.center)) - 4.0 * blob.width
        early = medium.tgrid.times < arrival - 1e-9
        for name in CHANNELS:
            assert np.abs(ds.channels[name][i, early]).max() <= 1e-12 * scale


def test_linearity():
    b1 = GaussianBlob((0.1, 0.0, 0.0), 0.15, 1.0)
    b2 = GaussianBlob((-0.1, 0.05, 0.0), 0.2, -0.7)
    prof = ExponentialProfile(1.0)
    sphere = make_sphere_grid(1.0, 3)
    ball = make_ball_grid(0.95, 20)
    tg = TimeGrid(4.0, 200)
    ds1 = forward_sweep(SourceModel((b1,), 0.95), prof, sphere, ball, tg)
    ds2 = forward_sweep(SourceModel((b2,), 0.95), prof, sphere, ball, tg)
    both = forward_sweep(SourceModel((b1, b2), 0.95), prof, sphere, ball, tg)
    for name in CHANNELS:
        combo = ds1.channels[name] + ds2.channels[name]
        scale = np.abs(combo).max()
        assert np.abs(both.channels[name] - combo).max() <= 1e-12 * scale


def test_translation_covariance():
    """Shifting source and observer by one lattice pitch leaves U unchanged."""
    ball = make_ball_grid(0.95, 48)
    h = ball.spacing
    prof = ExponentialProfile(1.0)
    blob = GaussianBlob((0.05, 0.0, 0.025), 0.2, 1.0)
    moved = GaussianBlob((0.05, 0.0, 0.025 + h), 0.2, 1.0)
    x = np.array([[0.3, -0.4, 1.1]])
    nu = x / np.linalg.norm(x)
    times = np.linspace(0.0, 6.0, 25)
    base = probe_channels(SourceModel((blob,), 0.95), prof, ball, x, nu, times)
    shifted = probe_channels(
        SourceModel((moved,), 0.95), prof, ball, x + [0.0, 0.0, h], nu, times
    )
    for name in CHANNELS:
        scale = max(np.abs(base[name]).max(), 1e-300)
        assert np.abs(base[name] - shifted[name]).max() <= 1e-12 * scale


def test_exponential_decay_regime(medium):
    assert exponential_decay_check(medium.ds, 1.0) <= 1e-10


def test_decay_check_needs_exponential_profile():
    model = SourceModel((GaussianBlob((0.0, 0.0, 0.0), 0.15, 1.0),), 0.95)
    ds = forward_sweep(
        model,
        RickerProfile(1.0, 2.0),
        make_sphere_grid(1.0, 2),
        make_ball_grid(0.95, 10),
        TimeGrid(2.0, 40),
    )
    with pytest.raises(PreconditionError):
        exponential_decay_check(ds, 1.0)


def test_time_derivative_channels_post_saturation(medium):
    """Centered differences of U reproduce dtU to O(dt^2) once smooth."""
    ds = medium.ds
    tg = medium.tgrid
    sat = tg.times >= saturation_time(medium.model, medium.sphere.nodes) + 2 * tg.dt
    U = ds.channels["U"]
    fd = (U[:, 2:] - U[:, :-2]) / (2.0 * tg.dt)
    m = sat[1:-1]
    err = np.abs(fd[:, m] - ds.channels["dtU"][:, 1:-1][:, m]).max()
    assert err <= tg.dt**2 * np.abs(U).max()


def test_potential_integrates_its_derivative(medium):
    """U(t) equals the running trapezoid integral of dtU, transit included."""
    ds = medium.ds
    dt = medium.tgrid.dt
    dtU = ds.channels["dtU"]
    cum = np.cumsum((dtU[:, 1:] + dtU[:, :-1]) * 0.5 * dt, axis=1)
    err = np.abs(cum - ds.channels["U"][:, 1:]).max()
    assert err <= 0.03 * np.abs(ds.channels["U"]).max()


def test_normal_derivative_matches_radial_difference(medium):
    ds = medium.ds
    tg = medium.tgrid
    sat = tg.times >= saturation_time(medium.model, medium.sphere.nodes)
    h = 1e-3
    node, nrm = medium.sphere.nodes[0], medium.sphere.normals[0]
    pts = np.vstack([node * (1 + h), node * (1 - h)])
    nrms = np.vstack([nrm, nrm])
    pr = probe_channels(
        medium.model, medium.profile, medium.ball, pts, nrms, tg.times[sat]
    )
    fd_dn = (pr["U"][0] - pr["U"][1]) / (2.0 * h)
    err = np.abs(fd_dn - ds.channels["dnU"][0, sat]).max()
    assert err <= 0.01 * np.abs(ds.channels["dnU"]).max()
    fd_dndt = (pr["dtU"][0] - pr["dtU"][1]) / (2.0 * h)
    err = np.abs(fd_dndt - ds.channels["dndtU"][0, sat]).max()
    assert err <= 0.01 * np.abs(ds.channels["dndtU"]).max()


def test_probe_matches_radial_oracle():
    width = 0.22
    model = SourceModel((GaussianBlob((0.0, 0.0, 0.0), width, 1.0),), 0.95)
    prof = ExponentialProfile(1.0)
    ball = make_ball_grid(0.95, 32)
    x = np.array([[0.0, 0.0, 1.0]])
    nu = x.copy()
    times = np.array([4.0, 6.5])
    probe = probe_channels(model, prof, ball, x, nu, times)
    for j, t in enumerate(times):
        ref = radial_potential(width, 1.0, 1.0, t)
        assert abs(probe["U"][0, j] - ref) <= 5e-4 * abs(ref)


def test_retarded_potential_agrees_with_probe(medium):
    x = medium.sphere.nodes[7]
    nu = medium.sphere.normals[7]
    t = 3.7
    val = retarded_potential(medium.model, medium.profile, x, t, medium.ball)
    probe = probe_channels(
        medium.model, medium.profile, medium.ball, x[None, :], nu[None, :],
        np.array([t]),
    )
    assert_allclose(val, probe["U"][0, 0], rtol=1e-12)


def test_thread_count_does_not_change_results():
    model = SourceModel((GaussianBlob((0.05, 0.0, 0.025), 0.22, 1.0),), 0.95)
    prof = ExponentialProfile(1.0)
    sphere = make_sphere_grid(1.0, 3)
    ball = make_ball_grid(0.95, 16)
    tg = TimeGrid(3.0, 150)
    ds1 = forward_sweep(model, prof, sphere, ball, tg, threads=1)
    ds3 = forward_sweep(model, prof, sphere, ball, tg, threads=3)
    for name in CHANNELS:
        assert np.array_equal(ds1.channels[name], ds3.channels[name])


def test_empty_source_yields_silence():
    ds = forward_sweep(
        SourceModel((), 0.95),
        ExponentialProfile(1.0),
        make_sphere_grid(1.0, 2),
        make_ball_grid(0.95, 10),
        TimeGrid(2.0, 40),
    )
    for name in CHANNELS:
        assert np.all(ds.channels[name] == 0.0)


def test_geometry_preconditions():
    model = SourceModel((GaussianBlob((0.0, 0.0, 0.0), 0.15, 1.0),), 0.95)
    prof = ExponentialProfile(1.0)
    with pytest.raises(ConfigError):
        forward_sweep(
            model, prof, make_sphere_grid(0.9, 2), make_ball_grid(0.95, 10),
            TimeGrid(2.0, 40),
        )
    with pytest.raises(ConfigError):
        forward_sweep(
            model, prof, make_sphere_grid(1.0, 2), make_ball_grid(0.5, 10),
            TimeGrid(2.0, 40),
        )
    with pytest.raises(PreconditionError):
        probe_channels(
            model, prof, make_ball_grid(0.95, 10),
            np.array([[0.1, 0.0, 0.0]]), np.array([[1.0, 0.0, 0.0]]),
            np.array([1.0]),
        )


def test_saturation_time_formula():
    blob = GaussianBlob((0.05, 0.0, 0.025), 0.22, 1.0)
    model = SourceModel((blob,), 0.95)
    pts = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    expected = max(
        np.linalg.norm(p - np.asarray(blob.center)) + 4.0 * blob.width for p in pts
    )
    assert saturation_time(model, pts) == pytest.approx(expected, rel=1e-12)


def test_dataset_copy_is_deep(medium):
    ds2 = medium.ds.copy()
    ds2.channels["U"][0, 0] = 123.0
    assert medium.ds.channels["U"][0, 0] == 0.0
    ds2.provenance["probe"] = True
    assert "probe" not in medium.ds.provenance
