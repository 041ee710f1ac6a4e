"""Measurement-sphere, volume, time, frequency and wave-vector grids.

The sphere rule is a product rule: Gauss-Legendre in the polar direction
(``order`` points in cos(theta)) times a uniform periodic trapezoid in azimuth
(``2*order`` points).  It integrates spherical polynomials up to degree
``2*order - 1`` exactly and its weights sum to the sphere area.

The ball grid is the uniform voxel lattice of a bounding cube restricted to
the ball; every voxel carries the full cube-cell volume, so the indicator sum
approximates the ball volume to O(h).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InputError

__all__ = [
    "SphereGrid",
    "BallGrid",
    "TimeGrid",
    "FrequencyGrid",
    "WaveVectorGrid",
    "make_sphere_grid",
    "make_ball_grid",
    "surface_integrate",
    "volume_integrate",
]


@dataclass(frozen=True)
class SphereGrid:
    """Quadrature nodes on the measurement sphere ``|x| = radius``.

    nodes : (n, 3) cartesian positions
    normals : (n, 3) outward unit normals (= nodes / radius)
    weights : (n,) quadrature weights, summing to 4*pi*radius**2
    """

    radius: float
    order: int
    nodes: np.ndarray
    normals: np.ndarray
    weights: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]


@dataclass(frozen=True)
class BallGrid:
    """Voxel-center quadrature of the ball ``|y| <= radius``.

    Cell centers lie on the lattice of the bounding cube; only centers inside
    the ball are kept.  ``volume_rel_tol`` is the constructor's declared O(h)
    tolerance on the indicator-volume error.
    """

    radius: float
    resolution: int
    centers: np.ndarray            # (n_inside, 3)
    voxel_volume: float
    axis: np.ndarray = field(repr=False)          # (resolution,) lattice coordinates
    inside_flat: np.ndarray = field(repr=False)   # flat indices into the full cube
    volume_rel_tol: float = 0.0

    @property
    def n_voxels(self) -> int:
        return self.centers.shape[0]

    @property
    def spacing(self) -> float:
        return 2.0 * self.radius / self.resolution


@dataclass(frozen=True)
class TimeGrid:
    """Uniform samples t_j = j*dt, j = 0..n_steps (n_steps+1 samples)."""

    horizon: float
    n_steps: int

    def __post_init__(self):
        if self.horizon <= 0 or self.n_steps < 1:
            raise ConfigError("time grid needs horizon > 0 and n_steps >= 1")

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform samples of w in [0, w_max], n_freq points including both ends."""

    w_max: float
    n_freq: int

    def __post_init__(self):
        if self.w_max <= 0 or self.n_freq < 2:
            raise ConfigError("frequency grid needs w_max > 0 and n_freq >= 2")

    @property
    def ws(self) -> np.ndarray:
        return np.linspace(0.0, self.w_max, self.n_freq)

    @property
    def dw(self) -> float:
        return self.w_max / (self.n_freq - 1)


@dataclass(frozen=True)
class WaveVectorGrid:
    """Cubic grid of wave vectors xi with |xi|_inf <= band_limit.

    Points per axis are symmetric about the origin (axis[j] = -axis[n-1-j]),
    so every xi has its mirror -xi on the grid.
    """

    band_limit: float
    resolution: int

    def __post_init__(self):
        if self.band_limit <= 0:
            raise ConfigError("band limit must be positive")
        if self.resolution < 2:
            raise ConfigError("wave-vector grid needs at least 2 points per axis")

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.band_limit, self.band_limit, self.resolution)

    @property
    def spacing(self) -> float:
        return 2.0 * self.band_limit / (self.resolution - 1)

    def points(self) -> np.ndarray:
        """All grid points as an (resolution**3, 3) array, z fastest."""
        a = self.axis
        g = np.meshgrid(a, a, a, indexing="ij")
        return np.stack([c.ravel() for c in g], axis=1)

    def mirror_indices(self) -> np.ndarray:
        """Flat index of -xi for every flat index of xi."""
        n = self.resolution
        idx = np.arange(n)
        rev = n - 1 - idx
        i, j, k = np.meshgrid(idx, idx, idx, indexing="ij")
        return ((rev[i] * n + rev[j]) * n + rev[k]).ravel()


def make_sphere_grid(radius: float, order: int) -> SphereGrid:
    """Build the product Gauss-Legendre x trapezoid rule on ``|x| = radius``.

    ``order`` is the polar point count; azimuth gets ``2*order`` uniform
    points, for ``2*order**2`` nodes total.
    """
    if radius <= 0:
        raise ConfigError("sphere radius must be positive")
    if order < 1:
        raise ConfigError(f"unsupported sphere order {order}: need order >= 1")
    mu, wmu = np.polynomial.legendre.leggauss(order)   # mu = cos(theta)
    n_az = 2 * order
    phi = np.linspace(0.0, 2.0 * np.pi, n_az, endpoint=False)
    dphi = 2.0 * np.pi / n_az

    sin_t = np.sqrt(1.0 - mu**2)
    # polar-major ordering: all azimuths of the first polar ring, then the next
    x = np.outer(sin_t, np.cos(phi)).ravel()
    y = np.outer(sin_t, np.sin(phi)).ravel()
    z = np.repeat(mu, n_az)
    normals = np.stack([x, y, z], axis=1)
    nodes = radius * normals
    weights = np.repeat(wmu, n_az) * dphi * radius**2
    return SphereGrid(radius=float(radius), order=int(order),
                      nodes=nodes, normals=normals, weights=weights)


def make_ball_grid(radius: float, resolution: int) -> BallGrid:
    if radius <= 0:
        raise ConfigError("ball radius must be positive")
    if resolution < 2:
        raise ConfigError("ball resolution must be >= 2")
    h = 2.0 * radius / resolution
    axis = (np.arange(resolution) + 0.5) * h - radius
    gx, gy, gz = np.meshgrid(axis, axis, axis, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    r2 = np.einsum("ij,ij->i", pts, pts)
    inside = np.flatnonzero(r2 <= radius * radius)
    return BallGrid(
        radius=float(radius),
        resolution=int(resolution),
        centers=pts[inside],
        voxel_volume=h**3,
        axis=axis,
        inside_flat=inside,
        volume_rel_tol=1.5 * h / radius,
    )


def surface_integrate(grid: SphereGrid, values: np.ndarray) -> float | complex:
    """Integrate node samples over the sphere: sum(w_q * values_q).

    ``values`` may carry leading axes; the node axis must be last.
    """
    values = np.asarray(values)
    if values.shape[-1] != grid.n_nodes:
        raise InputError(
            f"value array has {values.shape[-1]} entries for "
            f"{grid.n_nodes} sphere nodes"
        )
    out = values @ grid.weights
    return out if np.ndim(out) else np.asarray(out).item()


def volume_integrate(grid: BallGrid, values: np.ndarray) -> float | complex:
    """Integrate voxel samples over the ball: sum(values_i) * voxel_volume."""
    values = np.asarray(values)
    if values.shape[-1] != grid.n_voxels:
        raise InputError(
            f"value array has {values.shape[-1]} entries for "
            f"{grid.n_voxels} voxels"
        )
    out = values.sum(axis=-1) * grid.voxel_volume
    return out if np.ndim(out) else np.asarray(out).item()
