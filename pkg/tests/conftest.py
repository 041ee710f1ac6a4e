"""Shared fixtures: one moderate scenario reused across the module tests.

The scenario is deliberately smaller than the packaged default (coarser
sphere rule, coarser voxel lattice, shorter record) so the whole suite stays
fast; tolerances in the module tests are set for this resolution.  The
acceptance tests build the full default scenario themselves.
"""

from types import SimpleNamespace

import numpy as np
import pytest

from wavesource import (
    ExponentialProfile,
    FrequencyGrid,
    GaussianBlob,
    SourceModel,
    TimeGrid,
    forward_sweep,
    make_ball_grid,
    make_sphere_grid,
    temporal_fourier,
)


@pytest.fixture(scope="session")
def medium():
    model = SourceModel((GaussianBlob((0.05, 0.0, 0.025), 0.22, 1.0),), 0.95)
    profile = ExponentialProfile(1.0)
    sphere = make_sphere_grid(1.0, 6)
    ball = make_ball_grid(0.95, 32)
    tgrid = TimeGrid(12.0, 1200)
    ds = forward_sweep(model, profile, sphere, ball, tgrid, threads=0)
    return SimpleNamespace(
        model=model, profile=profile, sphere=sphere, ball=ball, tgrid=tgrid, ds=ds
    )


@pytest.fixture(scope="session")
def medium_sd(medium):
    return temporal_fourier(medium.ds, FrequencyGrid(24.0, 512))


@pytest.fixture()
def single_node_dataset():
    """Factory for synthetic one-node datasets with prescribed channels."""
    from wavesource import CHANNELS, BoundaryDataset, SphereGrid

    def build(horizon, n_steps, fills, gamma=1.0):
        sphere = SphereGrid(
            radius=1.0,
            order=1,
            nodes=np.array([[0.0, 0.0, 1.0]]),
            normals=np.array([[0.0, 0.0, 1.0]]),
            weights=np.array([1.0]),
        )
        tgrid = TimeGrid(horizon, n_steps)
        channels = {k: np.zeros((1, n_steps + 1)) for k in CHANNELS}
        for name, fn in fills.items():
            channels[name] = fn(tgrid.times)[None, :]
        prov = {"profile": {"kind": "exponential", "gamma": gamma}}
        return BoundaryDataset(sphere, tgrid, channels, provenance=prov)

    return build
