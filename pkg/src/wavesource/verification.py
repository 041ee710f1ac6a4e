"""Consistency-check battery for a configured run.

Each check compares two independent routes to the same quantity (time-domain
vs frequency-domain energy, transform vs direct Helmholtz evaluation, decay
laws vs their fitted envelopes) and reports a PASS/FAIL verdict against a
fixed threshold.  Values marked as regression pins were measured once on the
default configuration and are asserted to stay put; they catch silent
numerical drift rather than define correctness.
"""

import math
import traceback
from dataclasses import dataclass

import numpy as np

from .forward import exponential_decay_check, forward_sweep
from .geometry import FrequencyGrid, TimeGrid, make_ball_grid, make_sphere_grid
from .sources import GaussianBlob, SourceModel, f_l2_norm_analytic
from .spectral import (
    halfline_parseval_residual,
    helmholtz_oracle,
    helmholtz_oracle_dn,
    parseval_residual,
    temporal_fourier,
)
from .stability import (
    continuation_bound_check,
    energy_ratio,
    mu,
    random_source_model,
    tail_integrals,
)

__all__ = ["CheckResult", "run_checks", "format_report", "PINS"]

# Regression pins, measured once on the default configuration (see README).
# Bands are +-5% except where noted; None disables the pin comparison.
PINS = {
    "energy_identity_default": 3.8826e-04,   # +-25%, dominated by dt^2 transform error
    "energy_ratio_max": 1.0331,              # max over the 10 seeded mixtures
    "reconstruction_error_t20": 1.4378e-02,  # noiseless T=20, K=12 rel L2 error
}


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""


def _pin_band(value: float, pin: float | None, rel: float = 0.05) -> bool:
    if pin is None:
        return True
    return abs(value - pin) <= rel * abs(pin)


def _check_spectral_consistency(cfg, ds, sd) -> CheckResult:
    """Transform output vs direct Helmholtz sums at 16 probe frequencies."""
    model, profile, ball = cfg.model(), cfg.profile(), cfg.ball()
    ws_grid = sd.fgrid.ws
    probes = np.unique(
        np.searchsorted(ws_grid, np.linspace(0.5, 12.0, 16), side="left")
    )
    worst = 0.0
    for idx in probes:
        w = float(ws_grid[idx])
        u_ref = helmholtz_oracle(model, profile, ds.sphere.nodes, w, ball)
        dn_ref = helmholtz_oracle_dn(
            model, profile, ds.sphere.nodes, ds.sphere.normals, w, ball
        )
        rel_u = np.linalg.norm(sd.u[:, idx] - u_ref) / np.linalg.norm(u_ref)
        rel_dn = np.linalg.norm(sd.dnu[:, idx] - dn_ref) / np.linalg.norm(dn_ref)
        worst = max(worst, float(rel_u), float(rel_dn))
    return CheckResult(
        "spectral consistency", worst <= 0.01, worst, 0.01,
        f"{probes.size} frequencies in [0.5, 12]",
    )


def _check_halfline_identity() -> CheckResult:
    """Energy identity on the half line for h(t) = e^{-t}."""
    dt, T = 1e-3, 12.0
    t = np.arange(0.0, T + dt / 2, dt)
    h = np.exp(-t)
    fg = FrequencyGrid(w_max=200.0, n_freq=4096)
    hhat = 1.0 / (1.0 + 1j * fg.ws)
    res = halfline_parseval_residual(h, dt, hhat, fg.dw, decay_rate=1.0)
    return CheckResult("half-line energy identity", res <= 1e-6, res, 1e-6)


def _check_energy_identity(ds, sd) -> CheckResult:
    res = parseval_residual(ds, sd)
    passed = res <= 1e-3 and _pin_band(res, PINS["energy_identity_default"], 0.25)
    return CheckResult(
        "energy identity", passed, res, 1e-3,
        f"pin {PINS['energy_identity_default']}",
    )


def _check_energy_ratio_band(cfg) -> CheckResult:
    """||f||^2 / I(inf) across ten seeded random mixtures stays in a fixed band."""
    profile = cfg.profile()
    sphere = make_sphere_grid(cfg.sphere_radius, 8)
    ball = make_ball_grid(cfg.support_radius, 24)
    tg = TimeGrid(horizon=12.0, n_steps=1200)
    ratios = []
    for seed in range(10):
        m = random_source_model(seed, cfg.support_radius)
        d = forward_sweep(m, profile, sphere, ball, tg)
        ratios.append(energy_ratio(d, m))
    worst = max(ratios)
    passed = math.isfinite(worst) and _pin_band(worst, PINS["energy_ratio_max"])
    return CheckResult(
        "source energy ratio", passed, worst,
        PINS["energy_ratio_max"] or math.inf,
        f"min {min(ratios):.4f}, max {worst:.4f} over 10 mixtures",
    )


def _check_tail_decay(ds) -> CheckResult:
    """I(inf) - I(k) <= C/k with C fitted at the first grid point."""
    t0 = 4.0
    ks = np.linspace(t0, min(4.0 * t0, ds.tgrid.horizon), 9)
    tails = np.array([tail_integrals(ds, float(k)).tail for k in ks])
    c_fit = tails[0] * t0
    if c_fit <= 0:
        return CheckResult("tail decay", False, math.inf, 1.0, "degenerate fit")
    margins = tails * ks / c_fit
    worst = float(margins.max())
    return CheckResult(
        "tail decay", worst <= 1.0 + 1e-9, worst, 1.0,
        f"k in [{ks[0]:g}, {ks[-1]:g}]",
    )


def _check_continuation(cfg, ds) -> CheckResult:
    """Continuation ratios on a held-out source stay below 3x the default's."""
    t0 = 4.0
    ks = [1.2 * t0, 2.0 * t0, 4.0 * t0]
    m_default = cfg.resolved_m_bound()
    rep = continuation_bound_check(
        ds, t0, m_default, cfg.gamma, ks, cfg.exponent_offset
    )
    c_cal = 3.0 * rep["max_rho"]

    held_out = SourceModel(
        blobs=(
            GaussianBlob(center=(0.2, -0.15, 0.1), width=0.15, amplitude=0.8),
            GaussianBlob(center=(-0.25, 0.2, -0.15), width=0.12, amplitude=1.2),
        ),
        support_radius=cfg.support_radius,
    )
    sphere = make_sphere_grid(cfg.sphere_radius, 8)
    ball = make_ball_grid(cfg.support_radius, 32)
    ds_h = forward_sweep(held_out, cfg.profile(), sphere, ball, ds.tgrid)
    m_h = f_l2_norm_analytic(held_out)
    rep_h = continuation_bound_check(ds_h, t0, m_h, cfg.gamma, ks, cfg.exponent_offset)

    # homogeneity: doubling the source and M must leave every rho unchanged
    ds_2 = ds_h.copy()
    for c in ds_2.channels:
        ds_2.channels[c] *= 2.0
    rep_2 = continuation_bound_check(
        ds_2, t0, 2.0 * m_h, cfg.gamma, ks, cfg.exponent_offset
    )
    scale_dev = max(
        abs(a - b) / a if a else abs(a - b)
        for a, b in zip(rep_h["rhos"], rep_2["rhos"])
    )

    value = rep_h["max_rho"] / c_cal if c_cal > 0 else math.inf
    passed = value <= 1.0 and scale_dev <= 1e-10
    return CheckResult(
        "continuation bound", passed, value, 1.0,
        f"calibrated C = {c_cal:.3e}, scale invariance dev {scale_dev:.2e}",
    )


def _check_mu_table() -> CheckResult:
    devs = [
        abs(mu(1.1, 1.0) - 0.5),
        abs(mu(2.0**0.25, 1.0) - 0.5),
        abs(mu(math.sqrt(2.0), 1.0) - 1.0 / (math.pi * math.sqrt(3.0))),
    ]
    jump_ok = mu(2.0**0.25 + 1e-9, 1.0) < 0.5
    worst = max(devs)
    return CheckResult(
        "exponent table", worst <= 1e-12 and jump_ok, worst, 1e-12,
        "drop after the changeover verified",
    )


def _check_decay_regime(cfg, ds) -> CheckResult:
    res = exponential_decay_check(ds, cfg.gamma)
    return CheckResult("decay regime", res <= 1e-10, res, 1e-10)


def run_checks(cfg, dataset=None) -> list:
    """Run the battery; a dataset computed elsewhere can be injected."""
    results = []
    try:
        ds = dataset
        if ds is None:
            ds = forward_sweep(
                cfg.model(), cfg.profile(), cfg.sphere(), cfg.ball(), cfg.tgrid()
            )
        sd = temporal_fourier(ds, cfg.fgrid())
    except Exception as exc:
        detail = "".join(traceback.format_exception_only(exc)).strip()
        return [CheckResult("forward/transform", False, math.nan, math.nan, detail)]

    battery = [
        ("spectral consistency", lambda: _check_spectral_consistency(cfg, ds, sd)),
        ("half-line energy identity", _check_halfline_identity),
        ("exponent table", _check_mu_table),
    ]
    if cfg.profile_kind == "exponential":
        battery += [
            ("energy identity", lambda: _check_energy_identity(ds, sd)),
            ("source energy ratio", lambda: _check_energy_ratio_band(cfg)),
            ("tail decay", lambda: _check_tail_decay(ds)),
            ("continuation bound", lambda: _check_continuation(cfg, ds)),
            ("decay regime", lambda: _check_decay_regime(cfg, ds)),
        ]
    for name, fn in battery:
        try:
            results.append(fn())
        except Exception as exc:
            detail = "".join(traceback.format_exception_only(exc)).strip()
            results.append(CheckResult(name, False, math.nan, math.nan, detail))
    return results


def format_report(results) -> str:
    lines = []
    for r in results:
        tag = "PASS" if r.passed else "FAIL"
        extra = f"  ({r.detail})" if r.detail else ""
        lines.append(
            f"[{tag}] {r.name}: value={r.value:.6g} threshold={r.threshold:.6g}{extra}"
        )
    n_fail = sum(not r.passed for r in results)
    lines.append(
        f"{len(results) - n_fail}/{len(results)} checks passed"
        + (f", {n_fail} FAILED" if n_fail else "")
    )
    return "\n".join(lines)
