"""Trajectory CSV files and the (x, z) trajectory figure as hand-written SVG.

Both writers are byte-deterministic: floats are written with ``repr``
(shortest round-trip form) in the CSV and with fixed precision in the SVG.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .scenarios import ScenarioKind, TrajectoryBundle, gaussian_waist_reference
from .units import RegimeKind, UnitSystem, Wavefront, make_unit_system, rayleigh_length

CSV_HEADER = "t,ray_id,x,z,px,pz,R,Q,H,source"
_COLUMNS = ("x", "z", "px", "pz", "R", "Q", "H")
DEFAULT_LAMBDA0_OVER_W0 = 2e-4


def write_trajectories(bundle: TrajectoryBundle, path: str | Path) -> Path:
    """One row per (snapshot, ray), ordered by time then ray index."""
    if len(bundle) == 0 or bundle.n_rays == 0:
        raise ValueError("cannot write an empty trajectory bundle")
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        for snap in bundle.snapshots:
            t = repr(float(snap.t))
            cols = [getattr(snap, name).tolist() for name in _COLUMNS]
            for i, row in enumerate(zip(*cols)):
                writer.writerow([t, i, *map(repr, row), bundle.source])
    return path


def read_trajectories(path: str | Path, u: UnitSystem | None = None) -> dict[str, TrajectoryBundle]:
    """Load a trajectory CSV back into one bundle per ``source`` tag.

    Without ``u`` the unit system is rebuilt from the launch momentum of the
    first ``exact`` snapshot (p0 = 2 pi hbar / lambda0 in every regime),
    which is all the figure needs.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        header = fh.readline().rstrip("\r\n")
        if header != CSV_HEADER:
            raise ConfigError(f"{path}: unexpected header {header!r}")
        rows: dict[str, dict[float, list]] = {}
        for lineno, row in enumerate(csv.reader(fh), start=2):
            if not row:
                continue
            if len(row) != 10:
                raise ConfigError(f"{path}:{lineno}: expected 10 fields, got {len(row)}")
            t = float(row[0])
            rows.setdefault(row[9], {}).setdefault(t, []).append([int(row[1]), *map(float, row[2:9])])
    if not rows:
        raise ConfigError(f"{path}: no trajectory rows")
    snapshots = {}
    for source, by_time in rows.items():
        snapshots[source] = []
        for t, data in by_time.items():
            arr = np.array(sorted(data, key=lambda r: r[0]), dtype=float)
            if not np.array_equal(arr[:, 0], np.arange(arr.shape[0])):
                raise ConfigError(f"{path}: ray ids at t={t!r} are not 0..n-1")
            snapshots[source].append(Wavefront(t=t, **{name: arr[:, k + 1] for k, name in enumerate(_COLUMNS)}))
    if u is None:
        # comparator rows carry no launch momentum; they only need hbar and m
        u = _infer_units(snapshots["exact"][0]) if "exact" in snapshots else make_unit_system(DEFAULT_LAMBDA0_OVER_W0)
    return {source: TrajectoryBundle(snapshots=snaps, units=u, source=source) for source, snaps in snapshots.items()}


def _infer_units(launch: Wavefront) -> UnitSystem:
    p0 = float(np.median(launch.p))
    if not p0 > 0.0:
        raise ConfigError("cannot infer the wavelength from a launch with zero momentum")
    return make_unit_system(2.0 * math.pi / p0, RegimeKind.NONRELATIVISTIC)


def is_gaussian_bundle(bundle: TrajectoryBundle, rtol: float = 1e-9) -> bool:
    """Config says so, or (for bundles read back from CSV) the launch
    amplitudes follow exp(-x^2 / w0^2) at z = 0."""
    if bundle.config is not None:
        return bundle.config.scenario is ScenarioKind.GAUSSIAN
    if bundle.source != "exact" or len(bundle) == 0:
        return False
    launch = bundle.snapshots[0]
    w0 = bundle.units.w0
    expected = np.exp(-((launch.x / w0) ** 2))
    return bool(np.all(launch.z == 0.0) and np.allclose(launch.R, expected, rtol=rtol, atol=1e-300))


# ---------------------------------------------------------------------------
# figure


@dataclass(frozen=True)
class FigureLayout:
    width: float = 800.0
    height: float = 500.0
    margin_left: float = 70.0
    margin_right: float = 20.0
    margin_top: float = 20.0
    margin_bottom: float = 55.0

    @property
    def plot_width(self) -> float:
        return self.width - self.margin_left - self.margin_right

    @property
    def plot_height(self) -> float:
        return self.height - self.margin_top - self.margin_bottom


@dataclass
class FigureGeometry:
    """Everything drawn, in pixel coordinates (y grows downward)."""

    thin: list[np.ndarray]
    heavy: list[np.ndarray]
    waist: list[np.ndarray]
    x_ticks: list[tuple[float, str]]
    z_ticks: list[tuple[float, str]]
    layout: FigureLayout


def _heavy_rays(launch: Wavefront, w0: float) -> list[int]:
    out = []
    for target in (-w0, w0):
        i = int(np.argmin(np.abs(launch.x - target)))
        if abs(launch.x[i] - target) <= 1e-9 * w0:
            out.append(i)
    return out


def figure_geometry(bundle: TrajectoryBundle, u: UnitSystem, layout: FigureLayout | None = None,
                    *, overlay: bool = True) -> FigureGeometry:
    """Map trajectories to pixels: z (in z_R) across, x (in w0) up."""
    if len(bundle) == 0 or bundle.n_rays == 0:
        raise ValueError("cannot draw an empty trajectory bundle")
    layout = layout or FigureLayout()
    zr = rayleigh_length(u)
    X = bundle.column("x") / u.w0
    Z = bundle.column("z") / zr
    z_hi = max(float(Z.max()), 1e-12)
    x_hi = max(float(np.abs(X).max()), 1e-12)
    z_hi, x_hi = _nice_ceiling(z_hi), _nice_ceiling(x_hi)

    def to_pixels(z, x):
        px = layout.margin_left + layout.plot_width * np.asarray(z) / z_hi
        py = layout.margin_top + layout.plot_height * (0.5 - 0.5 * np.asarray(x) / x_hi)
        return np.column_stack([px, py])

    heavy_ids = _heavy_rays(bundle.snapshots[0], u.w0)
    thin = [to_pixels(Z[:, i], X[:, i]) for i in range(bundle.n_rays) if i not in heavy_ids]
    heavy = [to_pixels(Z[:, i], X[:, i]) for i in heavy_ids]
    waist = []
    if overlay:
        zz = np.linspace(0.0, float(Z.max()), 200)
        xw = gaussian_waist_reference(zz * zr, u) / u.w0
        waist = [to_pixels(zz, xw), to_pixels(zz, -xw)]
    z_ticks = [(float(to_pixels(v, 0.0)[0, 0]), _label(v)) for v in _ticks(z_hi)]
    x_ticks = [(float(to_pixels(0.0, v)[0, 1]), _label(v)) for v in _ticks(x_hi, symmetric=True)]
    return FigureGeometry(thin=thin, heavy=heavy, waist=waist, x_ticks=x_ticks, z_ticks=z_ticks, layout=layout)


def _nice_ceiling(v: float) -> float:
    step = 10.0 ** math.floor(math.log10(v))
    for m in (1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0):
        if m * step >= v * (1.0 - 1e-12):
            return m * step
    return 10.0 * step


def _ticks(hi: float, symmetric: bool = False) -> list[float]:
    values = [hi * k / 4 for k in range(5)]
    if symmetric:
        values = [-v for v in values[:0:-1]] + values
    return values


def _label(v: float) -> str:
    return f"{v:.3g}" if v != 0.0 else "0"


def _polyline(points: np.ndarray, style: str) -> str:
    coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
    return f'<polyline points="{coords}" {style}/>'


def render_figure(bundle: TrajectoryBundle, u: UnitSystem, path: str | Path,
                  layout: FigureLayout | None = None) -> Path:
    """SVG of all trajectories (thin), the rays launched at +-w0 (heavy) and
    the analytic waist lines (dashed). The overlay is omitted, with a
    warning, for non-Gaussian bundles."""
    overlay = is_gaussian_bundle(bundle)
    if not overlay:
        warnings.warn("not a gaussian bundle: drawing trajectories without the waist-line overlay",
                      UserWarning, stacklevel=2)
    geo = figure_geometry(bundle, u, layout, overlay=overlay)
    L = geo.layout
    x0, y0 = L.margin_left, L.margin_top
    x1, y1 = x0 + L.plot_width, y0 + L.plot_height
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{L.width:.0f}" height="{L.height:.0f}" '
        f'viewBox="0 0 {L.width:.0f} {L.height:.0f}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{L.plot_width:.2f}" height="{L.plot_height:.2f}" '
        'fill="none" stroke="black" stroke-width="1"/>',
        '<g id="trajectories">',
    ]
    parts += [_polyline(p, 'fill="none" stroke="#4477aa" stroke-width="0.4"') for p in geo.thin]
    parts.append("</g>")
    parts.append('<g id="launched-at-w0">')
    parts += [_polyline(p, 'fill="none" stroke="black" stroke-width="2.5"') for p in geo.heavy]
    parts.append("</g>")
    if geo.waist:
        parts.append('<g id="waist-lines">')
        parts += [_polyline(p, 'fill="none" stroke="#cc3311" stroke-width="1.5" stroke-dasharray="6,4"')
                  for p in geo.waist]
        parts.append("</g>")
    parts.append('<g id="axes" font-family="sans-serif" font-size="12">')
    for px, text in geo.z_ticks:
        parts.append(f'<line x1="{px:.2f}" y1="{y1:.2f}" x2="{px:.2f}" y2="{y1 + 5:.2f}" stroke="black"/>')
        parts.append(f'<text x="{px:.2f}" y="{y1 + 18:.2f}" text-anchor="middle">{text}</text>')
    for py, text in geo.x_ticks:
        parts.append(f'<line x1="{x0 - 5:.2f}" y1="{py:.2f}" x2="{x0:.2f}" y2="{py:.2f}" stroke="black"/>')
        parts.append(f'<text x="{x0 - 8:.2f}" y="{py + 4:.2f}" text-anchor="end">{text}</text>')
    parts.append(f'<text x="{0.5 * (x0 + x1):.2f}" y="{L.height - 12:.2f}" text-anchor="middle">z / z_R</text>')
    parts.append(f'<text x="18" y="{0.5 * (y0 + y1):.2f}" text-anchor="middle" '
                 f'transform="rotate(-90 18 {0.5 * (y0 + y1):.2f})">x / w0</text>')
    parts.append("</g>")
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n")
    return path
