"""On-disk containers, sweep CSV, and SVG charts.

Containers are a text header (``key: value`` lines, provenance as one JSON
line) terminated by a ``---`` line, followed by raw little-endian float64
array payloads in the declared order.  Complex arrays are stored as
interleaved (real, imag) pairs.  Grids are rebuilt from their defining
parameters on read, so a container is self-describing and reproducible
byte for byte for a fixed dataset.
"""

import json

import numpy as np

from .errors import InputError
from .forward import CHANNELS, BoundaryDataset
from .geometry import (
    BallGrid,
    FrequencyGrid,
    TimeGrid,
    make_ball_grid,
    make_sphere_grid,
)
from .inversion import ReconstructionResult
from .spectral import SpectralData

__all__ = [
    "write_boundary",
    "read_boundary",
    "write_spectral",
    "read_spectral",
    "write_reconstruction",
    "read_reconstruction",
    "write_sweep_csv",
    "read_sweep_csv",
    "write_line_chart",
]

_MAGIC = "wavesource-container v1"
_SEP = b"\n---\n"


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _write_container(path, kind: str, header: dict, arrays) -> None:
    lines = [_MAGIC, f"kind: {kind}"]
    for key, val in header.items():
        lines.append(f"{key}: {_fmt(val)}")
    blob = "\n".join(lines).encode() + _SEP
    with open(path, "wb") as fh:
        fh.write(blob)
        for arr in arrays:
            data = np.ascontiguousarray(arr)
            if np.iscomplexobj(data):
                data = data.astype(np.complex128, copy=False).view(np.float64)
            else:
                data = data.astype(np.float64, copy=False)
            fh.write(data.astype("<f8", copy=False).tobytes())


def _read_container(path, kind: str):
    with open(path, "rb") as fh:
        blob = fh.read()
    pos = blob.find(_SEP)
    if pos < 0:
        raise InputError(f"{path}: missing container header separator")
    header_lines = blob[:pos].decode().splitlines()
    if not header_lines or header_lines[0] != _MAGIC:
        raise InputError(f"{path}: not a {_MAGIC} file")
    fields = {}
    for line in header_lines[1:]:
        key, _, val = line.partition(": ")
        fields[key] = val
    if fields.get("kind") != kind:
        raise InputError(
            f"{path}: container kind {fields.get('kind')!r}, expected {kind!r}"
        )
    return fields, blob[pos + len(_SEP):]


def _take(payload: bytes, offset: int, shape, complex_: bool = False):
    count = int(np.prod(shape)) * (2 if complex_ else 1)
    nbytes = count * 8
    if offset + nbytes > len(payload):
        raise InputError("container payload is shorter than its header declares")
    flat = np.frombuffer(payload, dtype="<f8", count=count, offset=offset)
    arr = flat.view(np.complex128) if complex_ else flat
    return arr.reshape(shape).copy(), offset + nbytes


def write_boundary(ds: BoundaryDataset, path) -> None:
    header = {
        "radius": ds.sphere.radius,
        "sphere_order": ds.sphere.order,
        "horizon": ds.tgrid.horizon,
        "n_steps": ds.tgrid.n_steps,
        "channels": ",".join(CHANNELS),
        "provenance": json.dumps(ds.provenance, sort_keys=True),
    }
    _write_container(path, "boundary", header,
                     [ds.channels[c] for c in CHANNELS])


def read_boundary(path) -> BoundaryDataset:
    fields, payload = _read_container(path, "boundary")
    sphere = make_sphere_grid(float(fields["radius"]), int(fields["sphere_order"]))
    tgrid = TimeGrid(horizon=float(fields["horizon"]), n_steps=int(fields["n_steps"]))
    names = fields["channels"].split(",")
    shape = (sphere.n_nodes, tgrid.n_steps + 1)
    channels, offset = {}, 0
    for name in names:
        channels[name], offset = _take(payload, offset, shape)
    return BoundaryDataset(
        sphere=sphere, tgrid=tgrid, channels=channels,
        provenance=json.loads(fields.get("provenance", "{}")),
    )


def write_spectral(sd: SpectralData, path) -> None:
    header = {
        "radius": sd.sphere.radius,
        "sphere_order": sd.sphere.order,
        "w_max": sd.fgrid.w_max,
        "n_freq": sd.fgrid.n_freq,
        "provenance": json.dumps(sd.provenance, sort_keys=True),
    }
    _write_container(path, "spectral", header, [sd.u, sd.dnu])


def read_spectral(path) -> SpectralData:
    fields, payload = _read_container(path, "spectral")
    sphere = make_sphere_grid(float(fields["radius"]), int(fields["sphere_order"]))
    fgrid = FrequencyGrid(w_max=float(fields["w_max"]), n_freq=int(fields["n_freq"]))
    shape = (sphere.n_nodes, fgrid.n_freq)
    u, offset = _take(payload, 0, shape, complex_=True)
    dnu, _ = _take(payload, offset, shape, complex_=True)
    return SpectralData(
        sphere=sphere, fgrid=fgrid, u=u, dnu=dnu,
        provenance=json.loads(fields.get("provenance", "{}")),
    )


def write_reconstruction(res: ReconstructionResult, path) -> None:
    header = {
        "ball_radius": res.ball.radius,
        "ball_resolution": res.ball.resolution,
        "band_limit": res.band_limit,
        "imag_residual": res.imag_residual,
        "rel_l2_error": "none" if res.rel_l2_error is None else res.rel_l2_error,
        "diagnostics": json.dumps(res.diagnostics, sort_keys=True),
    }
    _write_container(path, "reconstruction", header, [res.f_voxels])


def read_reconstruction(path) -> ReconstructionResult:
    fields, payload = _read_container(path, "reconstruction")
    ball = make_ball_grid(float(fields["ball_radius"]), int(fields["ball_resolution"]))
    voxels, _ = _take(payload, 0, (ball.n_voxels,))
    rel = fields.get("rel_l2_error", "none")
    return ReconstructionResult(
        ball=ball,
        f_voxels=voxels,
        band_limit=float(fields["band_limit"]),
        imag_residual=float(fields["imag_residual"]),
        rel_l2_error=None if rel == "none" else float(rel),
        diagnostics=json.loads(fields.get("diagnostics", "{}")),
    )


def write_sweep_csv(records, path) -> None:
    """One row per sweep cell; failed cells carry nan numeric fields."""
    cols = records[0].CSV_COLUMNS if records else ()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for rec in records:
            cells = []
            for name, val in zip(cols, rec.as_row()):
                cells.append(str(val) if name == "seed" else format(val, ".17g"))
            fh.write(",".join(cells) + "\n")


def read_sweep_csv(path):
    """Rows back as dicts of floats (seed as int)."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    cols = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        row = {}
        for name, cell in zip(cols, parts):
            row[name] = int(cell) if name == "seed" else float(cell)
        rows.append(row)
    return rows


def _log_ticks(lo: float, hi: float):
    import math

    first = math.floor(math.log10(lo))
    last = math.ceil(math.log10(hi))
    return [10.0**e for e in range(first, last + 1)]


def write_line_chart(
    path,
    series,
    title: str,
    xlabel: str,
    ylabel: str,
    log_y: bool = True,
) -> None:
    """Minimal standalone SVG line chart.

    ``series`` is a list of (label, xs, ys) with positive ys when log_y.
    """
    import math

    width, height = 640, 420
    ml, mr, mt, mb = 64, 16, 36, 48
    pw, ph = width - ml - mr, height - mt - mb
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys if math.isfinite(y) and y > 0]
    if not xs_all or not ys_all:
        raise InputError("chart needs at least one finite data point")
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if log_y:
        y_lo, y_hi = 10 ** math.floor(math.log10(y_lo)), 10 ** math.ceil(math.log10(y_hi))
        if y_hi == y_lo:
            y_hi = y_lo * 10
    elif y_hi == y_lo:
        y_hi = y_lo + 1.0

    def px(x):
        return ml + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        if log_y:
            t = (math.log10(y) - math.log10(y_lo)) / (math.log10(y_hi) - math.log10(y_lo))
        else:
            t = (y - y_lo) / (y_hi - y_lo)
        return mt + (1.0 - t) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
    ]
    for xv in sorted(set(xs_all)):
        out.append(
            f'<line x1="{px(xv):.2f}" y1="{mt + ph}" x2="{px(xv):.2f}" '
            f'y2="{mt + ph + 4}" stroke="#333"/>'
        )
        out.append(
            f'<text x="{px(xv):.2f}" y="{mt + ph + 18}" text-anchor="middle">{xv:g}</text>'
        )
    y_ticks = _log_ticks(y_lo, y_hi) if log_y else np.linspace(y_lo, y_hi, 6)
    for yv in y_ticks:
        if not (y_lo <= yv <= y_hi):
            continue
        out.append(
            f'<line x1="{ml - 4}" y1="{py(yv):.2f}" x2="{ml}" y2="{py(yv):.2f}" stroke="#333"/>'
        )
        out.append(
            f'<line x1="{ml}" y1="{py(yv):.2f}" x2="{ml + pw}" y2="{py(yv):.2f}" '
            f'stroke="#ddd" stroke-width="0.5"/>'
        )
        out.append(
            f'<text x="{ml - 8}" y="{py(yv) + 4:.2f}" text-anchor="end">{yv:.3g}</text>'
        )
    out.append(
        f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{xlabel}</text>'
    )
    out.append(
        f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {mt + ph / 2:.1f})">{ylabel}</text>'
    )
    for i, (label, xs, ys) in enumerate(series):
        color = colors[i % len(colors)]
        pts = " ".join(
            f"{px(x):.2f},{py(y):.2f}"
            for x, y in zip(xs, ys)
            if math.isfinite(y) and (not log_y or y > 0)
        )
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.8"/>'
        )
        for x, y in zip(xs, ys):
            if math.isfinite(y) and (not log_y or y > 0):
                out.append(
                    f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.6" fill="{color}"/>'
                )
        ly = mt + 16 + 16 * i
        out.append(
            f'<line x1="{ml + pw - 140}" y1="{ly - 4}" x2="{ml + pw - 116}" '
            f'y2="{ly - 4}" stroke="{color}" stroke-width="1.8"/>'
        )
        out.append(f'<text x="{ml + pw - 110}" y="{ly}">{label}</text>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
