"""Source reconstruction from spectral boundary data.

The reconstruction identity: for xi in R^3 with w = |xi|, testing the
Helmholtz field u(., w) against the plane wave e^{-i xi . x} over the
measurement sphere gives

    f_hat(xi) g_hat(w) = - Int_{|x|=R} e^{-i xi . x}
                           (dn_u(x, w) + i (nu . xi) u(x, w)) ds(x),

so f_hat is recovered by deconvolving g_hat, with a floor c0 on |g_hat|
guarding against near-zeros of the profile spectrum.  The spatial source is
then synthesized by the matching inverse convention

    f(y) ~ (2 pi)^{-3} Sum_xi values(xi) e^{+i xi . y}  dxi^3

over a cubic grid with hard band limit |xi|_inf <= K (the only
regularization in the package).  Frequencies off the grid are handled by
linear interpolation in w, which is why the frequency grid must cover the
cube corner |xi| = sqrt(3) K.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DeconvolutionError, InputError
from .geometry import BallGrid, WaveVectorGrid, volume_integrate
from .sources import SourceModel, eval_f, f_hat_analytic
from .spectral import SpectralData

__all__ = [
    "FourierField",
    "ReconstructionResult",
    "reconstruct_fhat",
    "reconstruct_field",
    "synthesize_f",
    "select_band_limit",
]


@dataclass
class FourierField:
    """f_hat sampled on a cubic wave-vector grid (flat, z fastest)."""

    grid: WaveVectorGrid
    values: np.ndarray = field(repr=False)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.grid.resolution**3
        if self.values.shape != (n,):
            raise InputError(f"field values must have shape ({n},)")

    @property
    def band_limit(self) -> float:
        return self.grid.band_limit

    def hermitian_residual(self) -> float:
        """Relative L2 departure from values(-xi) = conj(values(xi))."""
        mirrored = np.conj(self.values[self.grid.mirror_indices()])
        scale = np.linalg.norm(self.values)
        if scale == 0.0:
            return 0.0
        return float(np.linalg.norm(self.values - mirrored) / scale)

    def symmetrized(self) -> "FourierField":
        mirrored = np.conj(self.values[self.grid.mirror_indices()])
        prov = dict(self.provenance)
        prov["hermitian_residual_before"] = self.hermitian_residual()
        return FourierField(self.grid, 0.5 * (self.values + mirrored), prov)


@dataclass
class ReconstructionResult:
    """Synthesized voxel source plus error metrics."""

    ball: BallGrid
    f_voxels: np.ndarray = field(repr=False)
    band_limit: float
    imag_residual: float
    rel_l2_error: float | None = None
    diagnostics: dict = field(default_factory=dict)


def _interp_spectra(sd: SpectralData, w: np.ndarray):
    """Linear interpolation of u and dnu in w; returns (n_nodes, len(w))."""
    fg = sd.fgrid
    if np.any(w > fg.w_max * (1 + 1e-12)):
        raise InputError(
            f"requested frequency {w.max():.6g} beyond the grid w_max {fg.w_max}"
        )
    pos = np.clip(w, 0.0, fg.w_max) / fg.dw
    i0 = np.minimum(pos.astype(int), fg.n_freq - 2)
    frac = pos - i0
    u = sd.u[:, i0] * (1.0 - frac) + sd.u[:, i0 + 1] * frac
    dnu = sd.dnu[:, i0] * (1.0 - frac) + sd.dnu[:, i0 + 1] * frac
    return u, dnu


def _fhat_batch(
    sd: SpectralData,
    xis: np.ndarray,
    profile,
    c0: float,
    on_small_ghat: str = "raise",
):
    """Green's-identity values at (m, 3) wave vectors.

    Returns (values, excluded_mask); points with |g_hat| < c0 are either
    raised on or zeroed out and flagged, per ``on_small_ghat``.
    """
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    w = np.linalg.norm(xis, axis=1)
    ghat = np.atleast_1d(profile.g_hat(w))
    small = np.abs(ghat) < c0
    if np.any(small):
        if on_small_ghat == "raise":
            i = int(np.argmax(small))
            raise DeconvolutionError(w[i], float(np.abs(ghat[i])), c0)
        ghat = np.where(small, 1.0, ghat)

    nodes = sd.sphere.nodes
    normals = sd.sphere.normals
    weights = sd.sphere.weights
    out = np.empty(xis.shape[0], dtype=complex)
    block = 2048
    for lo in range(0, xis.shape[0], block):
        hi = min(lo + block, xis.shape[0])
        xi_b = xis[lo:hi]
        u, dnu = _interp_spectra(sd, w[lo:hi])          # (n_nodes, b)
        phases = np.exp(-1j * (nodes @ xi_b.T))         # (n_nodes, b)
        nu_xi = normals @ xi_b.T
        integrand = phases * (dnu + 1j * nu_xi * u)
        out[lo:hi] = -(weights @ integrand) / ghat[lo:hi]
    out[small] = 0.0
    return out, small


def reconstruct_fhat(sd: SpectralData, xi, profile, c0: float = 1e-3) -> complex:
    """f_hat at a single wave vector; raises DeconvolutionError when the
    profile spectrum at w = |xi| is below the c0 floor."""
    values, _ = _fhat_batch(sd, np.asarray(xi, dtype=float)[None, :], profile, c0)
    return complex(values[0])


def reconstruct_field(
    sd: SpectralData, grid: WaveVectorGrid, profile, c0: float = 1e-3
) -> FourierField:
    """f_hat on the full cubic grid, Hermitian-symmetrized.

    Grid points where |g_hat| < c0 (profile spectral zeros) are excluded from
    the field (zeroed) and counted in provenance rather than inverted.
    """
    if grid.band_limit > sd.fgrid.w_max:
        raise ConfigError(
            f"band limit {grid.band_limit} exceeds the frequency grid w_max "
            f"{sd.fgrid.w_max}"
        )
    corner = grid.band_limit * math.sqrt(3.0)
    if corner > sd.fgrid.w_max * (1 + 1e-12):
        raise ConfigError(
            f"cube corner |xi| = {corner:.6g} exceeds w_max {sd.fgrid.w_max}; "
            "enlarge the frequency grid or reduce the band limit"
        )
    values, small = _fhat_batch(
        sd, grid.points(), profile, c0, on_small_ghat="exclude"
    )
    prov = {
        "band_limit": grid.band_limit,
        "c0": c0,
        "excluded_points": int(np.count_nonzero(small)),
        "tail_mode": sd.provenance.get("tail_mode"),
    }
    return FourierField(grid, values, prov).symmetrized()


def synthesize_f(
    field: FourierField, ball: BallGrid, truth: SourceModel | None = None
) -> ReconstructionResult:
    """Band-limited inverse transform of the field onto the ball voxels.

    The cube sum factorizes over axes, so the synthesis is three tensor
    contractions over the full voxel lattice, then a restriction to the ball.
    The imaginary residue (nonzero only through numerical asymmetry) is
    reported relative to the real part's L2 norm and discarded.
    """
    n = field.grid.resolution
    vals = field.values.reshape(n, n, n)
    scale = field.grid.spacing**3 / (2.0 * np.pi) ** 3
    phase = np.exp(1j * np.outer(field.grid.axis, ball.axis))   # (n, m)
    t1 = np.tensordot(vals, phase, axes=([0], [0]))             # (n, n, m)
    t2 = np.tensordot(t1, phase, axes=([0], [0]))               # (n, m, m)
    cube = np.tensordot(t2, phase, axes=([0], [0])) * scale     # (m, m, m) x,y,z
    flat = cube.ravel()[ball.inside_flat]

    re = np.real(flat)
    re_norm = float(np.linalg.norm(re))
    imag_residual = float(np.linalg.norm(np.imag(flat)) / re_norm) if re_norm else 0.0

    rel_err = None
    diagnostics = {}
    if truth is not None:
        f_true = eval_f(truth, ball.centers)
        denom = volume_integrate(ball, f_true**2)
        if denom > 0:
            rel_err = float(
                np.sqrt(volume_integrate(ball, (re - f_true) ** 2) / denom)
            )
        else:
            rel_err = float(np.sqrt(volume_integrate(ball, re**2)))
        diagnostics["shell_rel_errors"] = _shell_errors(field, truth)

    return ReconstructionResult(
        ball=ball,
        f_voxels=re,
        band_limit=field.band_limit,
        imag_residual=imag_residual,
        rel_l2_error=rel_err,
        diagnostics=diagnostics,
    )


def _shell_errors(field: FourierField, truth: SourceModel, n_bins: int = 8):
    """Relative field error binned by |xi| (diagnostic for result reports)."""
    pts = field.grid.points()
    r = np.linalg.norm(pts, axis=1)
    exact = f_hat_analytic(truth, pts)
    edges = np.linspace(0.0, r.max() + 1e-12, n_bins + 1)
    rows = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = (r >= lo) & (r < hi)
        if not np.any(m):
            continue
        denom = np.linalg.norm(exact[m])
        err = np.linalg.norm(field.values[m] - exact[m])
        rows.append(
            {
                "r_lo": float(lo),
                "r_hi": float(hi),
                "rel_err": float(err / denom) if denom > 0 else float(err),
            }
        )
    return rows


def select_band_limit(
    T: float, eps: float, gamma: float, *, log_eps: float | None = None
) -> float:
    """Observation-time / noise driven frequency cutoff s0.

    For eps >= 1/e the cutoff is simply T.  Otherwise, with
    L = |ln eps| and  b = ((2 gamma + 3) pi)^(1/3):
    if 2^(1/4) b T^(1/3) < L^(1/4), return T^(2/3) L^(1/4) / b, else T.

    Discrepancies far below float underflow (eps < ~1e-308) can be passed
    as ln(eps) via ``log_eps``, which then takes precedence over ``eps``.
    """
    if T <= 0:
        raise InputError(f"T must be positive, got {T}")
    if log_eps is not None:
        if log_eps >= 0.0:
            raise InputError(f"log_eps must be negative, got {log_eps}")
        log_abs = -float(log_eps)
    else:
        if eps >= 1.0 or eps <= 0.0:
            raise InputError(f"eps must lie in (0, 1), got {eps}")
        log_abs = -math.log(eps)
    if log_abs <= 1.0:
        return float(T)
    log_term = log_abs**0.25
    b = ((2.0 * gamma + 3.0) * math.pi) ** (1.0 / 3.0)
    if 2.0**0.25 * b * T ** (1.0 / 3.0) < log_term:
        return float(T ** (2.0 / 3.0) * log_term / b)
    return float(T)
