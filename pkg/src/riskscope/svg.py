"""Dependency-free SVG scatter plots and histograms.

Output is plain text with fixed number formatting, so identical inputs give
byte-identical files.
"""

from pathlib import Path

import numpy as np

from .exceptions import ShapeError

WIDTH, HEIGHT = 640, 480
MARGIN = {"left": 70, "right": 110, "top": 40, "bottom": 60}

# three-stop diverging ramp: low risk blue, mid pale yellow, high risk red
RAMP = ((49, 54, 149), (255, 255, 191), (165, 0, 38))


def _escape(text):
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _fmt(v):
    return f"{v:.2f}"


def _hex(rgb):
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def ramp_color(value, vmin=4.0, vmax=16.0):
    """Hex colour for ``value`` on the risk ramp; values outside are clamped."""
    if vmax <= vmin:
        t = 0.5
    else:
        t = min(max((float(value) - vmin) / (vmax - vmin), 0.0), 1.0)
    if t <= 0.5:
        a, b, u = RAMP[0], RAMP[1], t / 0.5
    else:
        a, b, u = RAMP[1], RAMP[2], (t - 0.5) / 0.5
    return _hex(tuple(int(round(a[i] + (b[i] - a[i]) * u)) for i in range(3)))


def _nice_range(lo, hi):
    if hi <= lo:
        return lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


class _Frame:
    def __init__(self, xlim, ylim):
        self.x0 = MARGIN["left"]
        self.x1 = WIDTH - MARGIN["right"]
        self.y0 = HEIGHT - MARGIN["bottom"]
        self.y1 = MARGIN["top"]
        self.xlim = xlim
        self.ylim = ylim

    def sx(self, v):
        lo, hi = self.xlim
        return self.x0 + (v - lo) / (hi - lo) * (self.x1 - self.x0)

    def sy(self, v):
        lo, hi = self.ylim
        return self.y0 - (v - lo) / (hi - lo) * (self.y0 - self.y1)


def _axes(frame, title, xlabel, ylabel, n_ticks=5):
    out = [
        f'<rect x="{frame.x0}" y="{frame.y1}" width="{frame.x1 - frame.x0}" '
        f'height="{frame.y0 - frame.y1}" fill="none" stroke="#444" stroke-width="1"/>'
    ]
    for i in range(n_ticks + 1):
        xv = frame.xlim[0] + (frame.xlim[1] - frame.xlim[0]) * i / n_ticks
        yv = frame.ylim[0] + (frame.ylim[1] - frame.ylim[0]) * i / n_ticks
        px, py = frame.sx(xv), frame.sy(yv)
        out.append(
            f'<line x1="{_fmt(px)}" y1="{frame.y0}" x2="{_fmt(px)}" y2="{frame.y0 + 5}" stroke="#444"/>'
        )
        out.append(
            f'<text x="{_fmt(px)}" y="{frame.y0 + 18}" font-size="10" '
            f'text-anchor="middle">{xv:.3g}</text>'
        )
        out.append(
            f'<line x1="{frame.x0 - 5}" y1="{_fmt(py)}" x2="{frame.x0}" y2="{_fmt(py)}" stroke="#444"/>'
        )
        out.append(
            f'<text x="{frame.x0 - 8}" y="{_fmt(py + 3)}" font-size="10" '
            f'text-anchor="end">{yv:.3g}</text>'
        )
    cx = (frame.x0 + frame.x1) / 2
    cy = (frame.y0 + frame.y1) / 2
    out.append(
        f'<text class="title" x="{_fmt(cx)}" y="{MARGIN["top"] - 15}" font-size="14" '
        f'text-anchor="middle">{_escape(title)}</text>'
    )
    out.append(
        f'<text class="xlabel" x="{_fmt(cx)}" y="{HEIGHT - 20}" font-size="12" '
        f'text-anchor="middle">{_escape(xlabel)}</text>'
    )
    out.append(
        f'<text class="ylabel" x="20" y="{_fmt(cy)}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 20 {_fmt(cy)})">{_escape(ylabel)}</text>'
    )
    return out


def _colorbar(vmin, vmax, label, steps=24):
    x = WIDTH - MARGIN["right"] + 25
    top, bottom = MARGIN["top"] + 20, HEIGHT - MARGIN["bottom"] - 20
    h = (bottom - top) / steps
    out = [f'<g class="legend">']
    for i in range(steps):
        v = vmax - (vmax - vmin) * (i + 0.5) / steps
        out.append(
            f'<rect x="{x}" y="{_fmt(top + i * h)}" width="16" height="{_fmt(h + 0.5)}" '
            f'fill="{ramp_color(v, vmin, vmax)}" stroke="none"/>'
        )
    out.append(f'<text x="{x + 20}" y="{top + 4}" font-size="10">{vmax:.3g}</text>')
    out.append(f'<text x="{x + 20}" y="{bottom + 4}" font-size="10">{vmin:.3g}</text>')
    out.append(f'<text x="{x}" y="{top - 8}" font-size="11">{_escape(label)}</text>')
    out.append("</g>")
    return out


def _document(body):
    return "\n".join(
        [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            *body,
            "</svg>",
            "",
        ]
    )


def _write(path, text):
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path


def scatter_svg(
    points,
    colors,
    centroids=None,
    title="",
    xlabel="x",
    ylabel="y",
    color_label="risk factor",
    vmin=4.0,
    vmax=16.0,
):
    """SVG text for a 2-D scatter coloured by ``colors`` with optional centroid X marks."""
    pts = np.asarray(points, dtype=np.float64)
    colors = np.asarray(colors, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ShapeError(f"points must be (N, 2), got {pts.shape}")
    if colors.shape != (pts.shape[0],):
        raise ShapeError("colors must have one value per point")
    allpts = pts if centroids is None else np.vstack([pts, np.asarray(centroids, float)])
    frame = _Frame(
        _nice_range(allpts[:, 0].min(), allpts[:, 0].max()),
        _nice_range(allpts[:, 1].min(), allpts[:, 1].max()),
    )
    body = _axes(frame, title, xlabel, ylabel)
    body.append('<g class="points">')
    for (px, py), c in zip(pts, colors):
        body.append(
            f'<circle cx="{_fmt(frame.sx(px))}" cy="{_fmt(frame.sy(py))}" r="3" '
            f'fill="{ramp_color(c, vmin, vmax)}" fill-opacity="0.85" stroke="#333" stroke-width="0.3"/>'
        )
    body.append("</g>")
    if centroids is not None:
        body.append('<g class="centroids">')
        for cx, cy in np.asarray(centroids, dtype=np.float64):
            X, Y, s = frame.sx(cx), frame.sy(cy), 7
            body.append(
                f'<path class="centroid" d="M{_fmt(X - s)},{_fmt(Y - s)} L{_fmt(X + s)},{_fmt(Y + s)} '
                f'M{_fmt(X - s)},{_fmt(Y + s)} L{_fmt(X + s)},{_fmt(Y - s)}" '
                f'stroke="black" stroke-width="3"/>'
            )
        body.append("</g>")
    body.extend(_colorbar(vmin, vmax, color_label))
    return _document(body)


def emit_scatter_svg(points, colors, path, centroids=None, **kwargs):
    return _write(path, scatter_svg(points, colors, centroids, **kwargs))


def histogram_counts(values, bins):
    """Counts over ``bins`` equal-width bins spanning ``[min, max]`` (last bin closed)."""
    v = np.asarray(values, dtype=np.float64)
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if v.size == 0:
        raise ShapeError("histogram needs at least one value")
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        edges = np.linspace(lo - 0.5, hi + 0.5, bins + 1)
    else:
        edges = np.linspace(lo, hi, bins + 1)
    idx = np.searchsorted(edges, v, side="right") - 1
    idx = np.clip(idx, 0, bins - 1)
    return np.bincount(idx, minlength=bins), edges


def histogram_svg(values, bins=12, title="", xlabel="value", ylabel="count"):
    counts, edges = histogram_counts(values, bins)
    frame = _Frame((edges[0], edges[-1]), (0.0, max(1.0, float(counts.max()))))
    body = _axes(frame, title, xlabel, ylabel)
    body.append('<g class="bars">')
    for c, a, b in zip(counts, edges[:-1], edges[1:]):
        x0, x1 = frame.sx(a), frame.sx(b)
        y = frame.sy(float(c))
        body.append(
            f'<rect class="bar" x="{_fmt(x0)}" y="{_fmt(y)}" width="{_fmt(x1 - x0)}" '
            f'height="{_fmt(frame.y0 - y)}" fill="#4575b4" stroke="white" data-count="{int(c)}"/>'
        )
    body.append("</g>")
    return _document(body)


def emit_histogram_svg(values, bins, path, **kwargs):
    return _write(path, histogram_svg(values, bins, **kwargs))
