"""Run configuration: YAML file, schema validation, and object builders.

A single YAML file describes a complete run (geometry, source, profile,
grids, reconstruction and sweep parameters).  Structural validation is
done against the bundled JSON schema; cross-field constraints that a
schema cannot express (containment, horizon coverage, band limits vs the
frequency grid) are checked here with specific errors.
"""

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import yaml

from .errors import ConfigError
from .geometry import BallGrid, FrequencyGrid, SphereGrid, TimeGrid, WaveVectorGrid
from .geometry import make_ball_grid, make_sphere_grid
from .sources import ExponentialProfile, GaussianBlob, RickerProfile, SourceModel
from .sources import f_l2_norm_analytic
from .stability import StabilityConfig

__all__ = [
    "RunConfig",
    "load_config",
    "config_from_dict",
    "default_config_path",
    "config_digest",
]


@dataclass(frozen=True)
class RunConfig:
    """Typed view of one run's YAML document."""

    sphere_radius: float
    sphere_order: int
    support_radius: float
    ball_resolution: int
    profile_kind: str
    gamma: float | None
    peak_frequency: float | None
    delay: float | None
    blobs: tuple                   # of (center, width, amplitude)
    horizon: float
    n_steps: int
    w_max: float
    n_freq: int
    band_limit: float
    xi_resolution: int
    c0: float
    alpha: float
    m_bound: float | None
    sweep_horizons: tuple
    noise_levels: tuple
    seeds: tuple
    exponent_offset: float
    raw: dict = field(repr=False, compare=False)

    # ---- builders ----

    def model(self) -> SourceModel:
        blobs = tuple(
            GaussianBlob(center=tuple(c), width=w, amplitude=a)
            for c, w, a in self.blobs
        )
        return SourceModel(blobs=blobs, support_radius=self.support_radius)

    def profile(self):
        if self.profile_kind == "exponential":
            return ExponentialProfile(gamma=self.gamma)
        return RickerProfile(peak_frequency=self.peak_frequency, delay=self.delay)

    def sphere(self) -> SphereGrid:
        return make_sphere_grid(self.sphere_radius, self.sphere_order)

    def ball(self) -> BallGrid:
        return make_ball_grid(self.support_radius, self.ball_resolution)

    def tgrid(self) -> TimeGrid:
        return TimeGrid(horizon=self.horizon, n_steps=self.n_steps)

    def fgrid(self) -> FrequencyGrid:
        return FrequencyGrid(w_max=self.w_max, n_freq=self.n_freq)

    def wgrid(self) -> WaveVectorGrid:
        return WaveVectorGrid(band_limit=self.band_limit, resolution=self.xi_resolution)

    def resolved_m_bound(self) -> float:
        if self.m_bound is not None:
            return self.m_bound
        return f_l2_norm_analytic(self.model())

    def stability(self) -> StabilityConfig:
        if self.profile_kind != "exponential":
            raise ConfigError("the stability sweep requires an exponential profile")
        return StabilityConfig(
            gamma=self.gamma,
            m_bound=self.resolved_m_bound(),
            alpha=self.alpha,
            horizons=self.sweep_horizons,
            noise_levels=self.noise_levels,
            seeds=self.seeds,
            k_max=self.band_limit,
            c0=self.c0,
            xi_resolution=self.xi_resolution,
            exponent_offset=self.exponent_offset,
        )


def default_config_path() -> str:
    return str(resources.files("wavesource").joinpath("configs/default.yaml"))


def _schema() -> dict:
    text = resources.files("wavesource").joinpath("configs/schema.json").read_text()
    return json.loads(text)


def config_digest(doc: dict) -> str:
    """Stable hash of the configuration document, for provenance fields."""
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def config_from_dict(doc: dict) -> RunConfig:
    try:
        jsonschema.validate(doc, _schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {path}: {exc.message}") from None

    geo = doc["geometry"]
    prof = doc["profile"]
    time_ = doc["time"]
    freq = doc["frequency"]
    rec = doc["reconstruction"]
    stab = doc["stability"]

    cfg = RunConfig(
        sphere_radius=float(geo["sphere_radius"]),
        sphere_order=int(geo["sphere_order"]),
        support_radius=float(geo["support_radius"]),
        ball_resolution=int(geo["ball_resolution"]),
        profile_kind=prof["kind"],
        gamma=float(prof["gamma"]) if "gamma" in prof else None,
        peak_frequency=(
            float(prof["peak_frequency"]) if "peak_frequency" in prof else None
        ),
        delay=float(prof.get("delay", 0.0)) if prof["kind"] == "ricker" else None,
        blobs=tuple(
            (tuple(float(v) for v in b["center"]), float(b["width"]), float(b["amplitude"]))
            for b in doc["source"]["blobs"]
        ),
        horizon=float(time_["horizon"]),
        n_steps=int(time_["n_steps"]),
        w_max=float(freq["w_max"]),
        n_freq=int(freq["n_freq"]),
        band_limit=float(rec["band_limit"]),
        xi_resolution=int(rec["xi_resolution"]),
        c0=float(rec.get("c0", 1e-3)),
        alpha=float(stab["alpha"]),
        m_bound=float(stab["m_bound"]) if stab.get("m_bound") is not None else None,
        sweep_horizons=tuple(float(t) for t in stab["horizons"]),
        noise_levels=tuple(float(s) for s in stab["noise_levels"]),
        seeds=tuple(int(s) for s in stab["seeds"]),
        exponent_offset=float(stab.get("exponent_offset", 3.0)),
        raw=doc,
    )
    _cross_validate(cfg)
    return cfg


def _cross_validate(cfg: RunConfig) -> None:
    if cfg.support_radius >= cfg.sphere_radius:
        raise ConfigError(
            f"support radius {cfg.support_radius} must be strictly inside the "
            f"measurement sphere radius {cfg.sphere_radius}"
        )
    if cfg.profile_kind == "exponential" and (cfg.gamma is None or cfg.gamma <= 0):
        raise ConfigError("exponential profile requires gamma > 0")
    if cfg.profile_kind == "ricker" and (
        cfg.peak_frequency is None or cfg.peak_frequency <= 0
    ):
        raise ConfigError("ricker profile requires peak_frequency > 0")
    if cfg.band_limit > cfg.w_max:
        raise ConfigError(
            f"band limit {cfg.band_limit} exceeds the frequency grid w_max {cfg.w_max}"
        )
    if cfg.band_limit * 3.0**0.5 > cfg.w_max * (1 + 1e-12):
        raise ConfigError(
            "frequency grid must cover the wave-vector cube corner: need "
            f"w_max >= sqrt(3) * band_limit = {cfg.band_limit * 3.0 ** 0.5:.6g}"
        )
    t_needed = max(cfg.sweep_horizons) + cfg.sphere_radius + cfg.support_radius
    if cfg.horizon < t_needed - 1e-9:
        raise ConfigError(
            f"time horizon {cfg.horizon} too short: sweep horizons up to "
            f"{max(cfg.sweep_horizons)} plus wavefront transit need >= {t_needed:.6g}"
        )
    dt = cfg.horizon / cfg.n_steps
    for T in cfg.sweep_horizons:
        steps = T / dt
        if abs(steps - round(steps)) > 1e-9:
            raise ConfigError(
                f"sweep horizon {T} does not land on the time grid (dt = {dt:.6g})"
            )
    # blob containment is enforced by the source model itself; build it now so
    # an invalid config fails at load time rather than mid-run
    cfg.model()


def load_config(path=None) -> RunConfig:
    if path is None:
        path = default_config_path()
    with open(path, encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a YAML mapping")
    return config_from_dict(doc)
