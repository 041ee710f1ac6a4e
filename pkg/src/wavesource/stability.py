"""Noise injection, energy functionals, and the stability sweep harness.

The sweep exercises the whole chain on a grid of (observation time T,
noise level, seed) cells: truncate the clean boundary dataset to T, add
white Gaussian noise scaled to each channel's RMS, measure the actual data
discrepancy epsilon, pick the frequency band limit from (T, epsilon), run
the reconstruction, and compare the recovered source against the truth and
against the predicted error bound

    e_rec^2  <~  epsilon^2 + M^2 / (T^(2/3) |ln eps|^(1/4))^alpha .

Alongside the sweep live the time-tail energy integrals

    I1(k) = Int_0^k Oint |d_tt U|^2,   I2(k) same for d_n d_t U,

whose decay and induced long-time continuation estimate are checked
directly on datasets.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from time import perf_counter

import numpy as np

from .errors import ConfigError, DomainError, InputError, PreconditionError
from .forward import CHANNELS, BoundaryDataset
from .geometry import BallGrid, FrequencyGrid, WaveVectorGrid, surface_integrate
from .inversion import reconstruct_field, select_band_limit, synthesize_f
from .sources import GaussianBlob, SourceModel, f_l2_norm_analytic
from .spectral import temporal_fourier

__all__ = [
    "StabilityConfig",
    "ExperimentRecord",
    "TailIntegrals",
    "add_noise",
    "epsilon_of",
    "tail_integrals",
    "energy_ratio",
    "mu",
    "continuation_bound_check",
    "bound_rhs",
    "random_source_model",
    "run_sweep",
    "fit_verify_bound",
    "sweep_summary",
]


@dataclass(frozen=True)
class StabilityConfig:
    """Sweep plan plus the a-priori constants of the error bound."""

    gamma: float
    m_bound: float
    alpha: float
    horizons: tuple
    noise_levels: tuple
    seeds: tuple
    k_max: float
    c0: float = 1e-3
    xi_resolution: int = 32
    exponent_offset: float = 3.0

    def __post_init__(self):
        for name in ("gamma", "m_bound", "alpha", "k_max", "c0"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        hs = tuple(float(t) for t in self.horizons)
        if not hs or any(t <= 0 for t in hs) or list(hs) != sorted(hs):
            raise ConfigError("horizons must be positive and ascending")
        if any(s < 0 or s >= 1 for s in self.noise_levels):
            raise ConfigError("noise levels must lie in [0, 1)")
        if self.xi_resolution < 2:
            raise ConfigError("xi_resolution must be at least 2")
        object.__setattr__(self, "horizons", hs)
        object.__setattr__(
            self, "noise_levels", tuple(float(s) for s in self.noise_levels)
        )
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))


@dataclass
class ExperimentRecord:
    """One sweep cell; numeric fields are NaN when the cell failed."""

    T: float
    sigma_rel: float
    seed: int
    epsilon: float
    s0: float
    K: float
    e_rec: float
    bound_rhs: float
    ratio: float
    runtime_s: float
    error: str | None = None

    CSV_COLUMNS = (
        "T", "sigma_rel", "seed", "epsilon", "s0", "K",
        "e_rec", "bound_rhs", "ratio", "runtime_s",
    )

    def as_row(self):
        return [getattr(self, c) for c in self.CSV_COLUMNS]


def add_noise(ds: BoundaryDataset, sigma_rel: float, seed: int) -> BoundaryDataset:
    """White Gaussian noise, std = sigma_rel times each channel's RMS.

    Independent per channel, node, and time sample; deterministic for a
    given (dataset shape, sigma_rel, seed).  sigma_rel = 0 returns a copy
    with bit-identical channels.
    """
    if sigma_rel < 0:
        raise InputError(f"sigma_rel must be nonnegative, got {sigma_rel}")
    out = ds.copy()
    out.provenance["noise"] = {"sigma_rel": float(sigma_rel), "seed": int(seed)}
    if sigma_rel == 0.0:
        return out
    rng = np.random.default_rng([902113, int(seed), ds.tgrid.n_steps, ds.sphere.n_nodes])
    for name in CHANNELS:
        ch = out.channels[name]
        rms = float(np.sqrt(np.mean(ch**2)))
        if rms == 0.0:
            continue
        ch += rng.normal(0.0, sigma_rel * rms, size=ch.shape)
    return out


def _surface_energy_density(ds: BoundaryDataset) -> np.ndarray:
    """S(t) = Oint (|d_tt U|^2 + |d_n d_t U|^2) ds at each time sample."""
    sq = ds.channels["dttU"] ** 2 + ds.channels["dndtU"] ** 2
    return surface_integrate(ds.sphere, sq.T)


def _cumulative_to(times: np.ndarray, density: np.ndarray, T: float) -> float:
    """Trapezoid integral of a sampled density over [0, T], with a linear
    partial last cell when T is off the grid."""
    dt = times[1] - times[0]
    if T < 0:
        raise InputError(f"integration endpoint must be nonnegative, got {T}")
    if T > times[-1] + 1e-9 * dt:
        raise InputError(
            f"endpoint {T} lies beyond the dataset horizon {times[-1]:.6g}"
        )
    j = min(int(T / dt + 1e-9), times.size - 1)
    total = float(np.trapezoid(density[: j + 1], dx=dt))
    rem = T - times[j]
    if rem > 1e-12 * dt and j + 1 < times.size:
        frac = rem / dt
        s_T = density[j] + (density[j + 1] - density[j]) * frac
        total += 0.5 * (density[j] + s_T) * rem
    return total


def epsilon_of(ds: BoundaryDataset, T: float) -> float:
    """Data size sqrt( Int_0^T Oint |d_tt U|^2 + |d_n d_t U|^2 ) of the
    dataset up to time T; monotone nondecreasing in T."""
    density = _surface_energy_density(ds)
    return math.sqrt(_cumulative_to(ds.tgrid.times, density, T))


@dataclass(frozen=True)
class TailIntegrals:
    """Cumulative second-derivative energies and their infinite-time limits."""

    i1: float
    i2: float
    i1_inf: float
    i2_inf: float

    @property
    def i(self) -> float:
        return self.i1 + self.i2

    @property
    def i_inf(self) -> float:
        return self.i1_inf + self.i2_inf

    @property
    def tail(self) -> float:
        return self.i_inf - self.i


def _require_gamma(ds: BoundaryDataset) -> float:
    prof = ds.provenance.get("profile", {})
    if prof.get("kind") != "exponential":
        raise PreconditionError(
            "infinite-time tails require an exponentially decaying profile"
        )
    return float(prof["gamma"])


def tail_integrals(ds: BoundaryDataset, k: float) -> TailIntegrals:
    """I1(k), I2(k) and their k -> infinity limits.

    The limits close the quadrature with the exact analytic remainder
    ch(T_h)^2 / (2 gamma) per node beyond the dataset horizon T_h, valid
    because the channels decay as e^{-gamma t} once the wavefront has left
    the support (enforced upstream by the horizon configuration).
    """
    gamma = _require_gamma(ds)
    times = ds.tgrid.times
    out = []
    for name in ("dttU", "dndtU"):
        ch = ds.channels[name]
        density = surface_integrate(ds.sphere, (ch**2).T)
        ik = _cumulative_to(times, density, k)
        i_inf = float(np.trapezoid(density, dx=ds.tgrid.dt))
        i_inf += float(surface_integrate(ds.sphere, ch[:, -1] ** 2)) / (2.0 * gamma)
        out.append((ik, i_inf))
    return TailIntegrals(i1=out[0][0], i2=out[1][0], i1_inf=out[0][1], i2_inf=out[1][1])


def energy_ratio(ds: BoundaryDataset, model: SourceModel) -> float:
    """||f||_L2^2 divided by the total second-derivative boundary energy
    I(infinity); finite and bounded across sources by the stability theory."""
    total = tail_integrals(ds, 0.0).i_inf
    if total <= 0:
        raise InputError("dataset carries no boundary energy")
    return f_l2_norm_analytic(model) ** 2 / total


def mu(k: float, T: float) -> float:
    """Holder exponent of the long-time continuation estimate.

    1/2 on (T, 2^(1/4) T], then (1/pi) ((k/T)^4 - 1)^(-1/2); the exponent
    drops at the changeover and decays like (T/k)^2 for large k.
    """
    if T <= 0:
        raise DomainError(f"T must be positive, got {T}")
    if k <= T:
        raise DomainError(f"mu(k, T) requires k > T, got k={k}, T={T}")
    if k <= 2.0**0.25 * T:
        return 0.5
    return float(1.0 / (math.pi * math.sqrt((k / T) ** 4 - 1.0)))


def continuation_bound_check(
    ds: BoundaryDataset,
    T: float,
    M: float,
    gamma: float,
    k_list,
    exponent_offset: float = 3.0,
) -> dict:
    """Ratios rho(k) = I(k) / ( M^2 e^{(2 gamma + q) k} (eps/M)^{2 mu(k,T)} )
    for k in k_list, with eps = epsilon_of(ds, T).

    The (eps/M) normalization makes both sides homogeneous of degree two in
    the source, so rho is invariant under f -> c f.  A bounded max rho over
    k certifies the continuation estimate with constant C = max rho.
    """
    if M <= 0:
        raise InputError(f"M must be positive, got {M}")
    eps = epsilon_of(ds, T)
    ks, mus, rhos = [], [], []
    for k in k_list:
        m = mu(k, T)
        ik = tail_integrals(ds, k).i
        denom = M**2 * math.exp((2.0 * gamma + exponent_offset) * k)
        if ik == 0.0:
            rho = 0.0
        elif eps == 0.0:
            rho = math.inf
        else:
            rho = ik / (denom * (eps / M) ** (2.0 * m))
        ks.append(float(k))
        mus.append(m)
        rhos.append(float(rho))
    return {
        "epsilon": eps,
        "T": float(T),
        "M": float(M),
        "ks": ks,
        "mus": mus,
        "rhos": rhos,
        "max_rho": max(rhos) if rhos else 0.0,
    }


def bound_rhs(eps: float, T: float, M: float, alpha: float) -> float:
    """Predicted squared-error level eps^2 + M^2 / (T^(2/3) |ln eps|^(1/4))^alpha."""
    if not (0.0 < eps < 1.0):
        raise InputError(f"eps must lie in (0, 1), got {eps}")
    if T <= 0 or M <= 0 or alpha <= 0:
        raise InputError("T, M, alpha must all be positive")
    denom = (T ** (2.0 / 3.0) * abs(math.log(eps)) ** 0.25) ** alpha
    return eps**2 + M**2 / denom


def random_source_model(
    seed: int, support_radius: float, max_blobs: int = 3
) -> SourceModel:
    """Seeded random blob mixture, always contained in the support ball."""
    rng = np.random.default_rng([24289, int(seed)])
    n = int(rng.integers(1, max_blobs + 1))
    width_hi = min(0.25, 0.95 * support_radius / 4.0)
    width_lo = min(0.10, 0.5 * width_hi)
    blobs = []
    for _ in range(n):
        width = float(rng.uniform(width_lo, width_hi))
        amp = float(rng.uniform(0.5, 2.0))
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        reach = max(support_radius - 4.0 * width, 0.0)
        radius = 0.9 * reach * float(rng.uniform()) ** (1.0 / 3.0)
        blobs.append(
            GaussianBlob(center=tuple(radius * direction), width=width, amplitude=amp)
        )
    return SourceModel(blobs=tuple(blobs), support_radius=support_radius)


def _cell_frequency_grid(fgrid: FrequencyGrid, K: float) -> FrequencyGrid:
    """Smallest prefix of the frequency grid covering the cube corner at K."""
    need = K * math.sqrt(3.0)
    n = min(fgrid.n_freq, int(math.ceil(need / fgrid.dw)) + 3)
    n = max(n, 2)
    return FrequencyGrid(w_max=fgrid.dw * (n - 1), n_freq=n)


def _run_cell(
    ds: BoundaryDataset,
    model: SourceModel,
    profile,
    stab: StabilityConfig,
    fgrid: FrequencyGrid,
    ball: BallGrid,
    T: float,
    sigma_rel: float,
    seed: int,
) -> ExperimentRecord:
    t0 = perf_counter()
    try:
        trunc = ds.truncated(T)
        noisy = add_noise(trunc, sigma_rel, seed)
        resid = BoundaryDataset(
            sphere=ds.sphere,
            tgrid=trunc.tgrid,
            channels={
                c: noisy.channels[c] - trunc.channels[c] for c in CHANNELS
            },
            provenance={"kind": "boundary", "profile": ds.provenance.get("profile", {})},
        )
        eps = epsilon_of(resid, T)
        if eps <= 0.0:
            s0 = math.inf
        elif eps >= 1.0:
            s0 = float(T)
        else:
            s0 = select_band_limit(T, eps, stab.gamma)
        K = min(s0, stab.k_max)
        sd = temporal_fourier(noisy, _cell_frequency_grid(fgrid, K), tail="truncate")
        wgrid = WaveVectorGrid(band_limit=K, resolution=stab.xi_resolution)
        fld = reconstruct_field(sd, wgrid, profile, c0=stab.c0)
        res = synthesize_f(fld, ball, truth=model)
        e_rec = float(res.rel_l2_error)
        if 0.0 < eps < 1.0:
            rhs = bound_rhs(eps, T, stab.m_bound, stab.alpha)
            ratio = e_rec**2 / rhs
        else:
            rhs = math.nan
            ratio = math.nan
        return ExperimentRecord(
            T=float(T), sigma_rel=float(sigma_rel), seed=int(seed),
            epsilon=eps, s0=s0, K=float(K), e_rec=e_rec,
            bound_rhs=rhs, ratio=ratio, runtime_s=perf_counter() - t0,
        )
    except Exception as exc:  # cell failures land in the row, sweep continues
        return ExperimentRecord(
            T=float(T), sigma_rel=float(sigma_rel), seed=int(seed),
            epsilon=math.nan, s0=math.nan, K=math.nan, e_rec=math.nan,
            bound_rhs=math.nan, ratio=math.nan,
            runtime_s=perf_counter() - t0,
            error=f"{type(exc).__name__}: {exc}",
        )


def run_sweep(
    ds: BoundaryDataset,
    model: SourceModel,
    profile,
    stab: StabilityConfig,
    fgrid: FrequencyGrid,
    ball: BallGrid,
    threads: int = 0,
) -> list:
    """Evaluate every (T, noise level, seed) cell; row order is the sorted
    cell order regardless of scheduling, so reruns compare column-for-column
    apart from runtimes."""
    t_max = max(stab.horizons)
    if t_max > ds.tgrid.horizon + 1e-9:
        raise ConfigError(
            f"sweep horizon {t_max} exceeds the dataset horizon {ds.tgrid.horizon}"
        )
    corner = stab.k_max * math.sqrt(3.0)
    if corner > fgrid.w_max * (1 + 1e-12):
        raise ConfigError(
            f"k_max cube corner {corner:.6g} exceeds the frequency grid w_max "
            f"{fgrid.w_max}"
        )
    cells = [
        (T, s, seed)
        for T in stab.horizons
        for s in stab.noise_levels
        for seed in stab.seeds
    ]
    workers = threads if threads > 0 else min(os.cpu_count() or 1, len(cells))
    if workers <= 1:
        return [
            _run_cell(ds, model, profile, stab, fgrid, ball, *cell) for cell in cells
        ]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_run_cell, ds, model, profile, stab, fgrid, ball, *cell)
            for cell in cells
        ]
        return [f.result() for f in futures]


def sweep_summary(records) -> list:
    """Median recovered error per (noise level, T) over seeds."""
    rows = []
    levels = sorted({r.sigma_rel for r in records})
    horizons = sorted({r.T for r in records})
    for s in levels:
        for T in horizons:
            errs = [
                r.e_rec
                for r in records
                if r.sigma_rel == s and r.T == T and r.error is None
                and math.isfinite(r.e_rec)
            ]
            if errs:
                rows.append(
                    {
                        "sigma_rel": s,
                        "T": T,
                        "median_e_rec": float(np.median(errs)),
                        "n": len(errs),
                    }
                )
    return rows


def fit_verify_bound(records, headroom: float = 1.1) -> dict:
    """Split cells into calibration (even rank) and holdout (odd rank) by the
    sorted (T, sigma_rel, seed) order, fit C = headroom * max calibration
    ratio, and verify every holdout ratio stays below C."""
    usable = [
        r
        for r in records
        if r.error is None and math.isfinite(r.ratio) and r.ratio >= 0
    ]
    usable.sort(key=lambda r: (r.T, r.sigma_rel, r.seed))
    cal = usable[0::2]
    hold = usable[1::2]
    if not cal or not hold:
        raise InputError("need at least two usable sweep cells to fit and verify")
    c_fit = headroom * max(r.ratio for r in cal)
    max_hold = max(r.ratio for r in hold)
    return {
        "c_fit": float(c_fit),
        "max_calibration_ratio": float(max(r.ratio for r in cal)),
        "max_holdout_ratio": float(max_hold),
        "n_calibration": len(cal),
        "n_holdout": len(hold),
        "passed": bool(max_hold <= c_fit),
    }
