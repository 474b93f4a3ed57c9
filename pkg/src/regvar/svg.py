"""Static SVG result plots: strip plot, scatter, and heatmap with tree.

Single-file documents with embedded data points only; no scripting, no
external assets, and no nondeterministic content, so identical inputs give
identical bytes. Coordinates are formatted to fixed precision.
"""

from __future__ import annotations


from .analysis import Dendrogram, RegisterProfile, SimilarityMatrix, leaf_order

PALETTE = ("#1f77b4", "#2ca02c", "#ff7f0e", "#d62728", "#9467bd",
           "#8c564b", "#17becf", "#bcbd22")

_FONT = 'font-family="sans-serif"'


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _doc(width: int, height: int, body: list[str]) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


class _Axes:
    """Maps data coordinates onto a margin-padded pixel frame."""

    def __init__(self, width, height, x_range, y_range,
                 left=60, right=20, top=34, bottom=46):
        self.w, self.h = width, height
        self.left, self.right, self.top, self.bottom = left, right, top, bottom
        self.x_lo, self.x_hi = x_range
        self.y_lo, self.y_hi = y_range
        if self.x_hi <= self.x_lo:
            self.x_hi = self.x_lo + 1.0
        if self.y_hi <= self.y_lo:
            self.y_hi = self.y_lo + 1.0

    def x(self, v: float) -> float:
        span = self.w - self.left - self.right
        return self.left + (v - self.x_lo) / (self.x_hi - self.x_lo) * span

    def y(self, v: float) -> float:
        span = self.h - self.top - self.bottom
        return self.h - self.bottom - (v - self.y_lo) / (self.y_hi - self.y_lo) * span

    def frame(self, title: str, x_label: str, y_label: str,
              x_ticks=True, y_ticks=True) -> list[str]:
        parts = [
            f'<rect x="{self.left}" y="{self.top}" '
            f'width="{self.w - self.left - self.right}" '
            f'height="{self.h - self.top - self.bottom}" '
            'fill="none" stroke="#333333" stroke-width="1"/>',
            f'<text x="{self.w // 2}" y="20" {_FONT} font-size="14" '
            f'text-anchor="middle">{_escape(title)}</text>',
            f'<text x="{self.w // 2}" y="{self.h - 8}" {_FONT} font-size="12" '
            f'text-anchor="middle">{_escape(x_label)}</text>',
            f'<text x="14" y="{self.h // 2}" {_FONT} font-size="12" '
            f'text-anchor="middle" transform="rotate(-90 14 {self.h // 2})">'
            f'{_escape(y_label)}</text>',
        ]
        if y_ticks:
            for tick in _ticks(self.y_lo, self.y_hi):
                py = self.y(tick)
                parts.append(
                    f'<line x1="{self.left - 4}" y1="{_fmt(py)}" x2="{self.left}" '
                    f'y2="{_fmt(py)}" stroke="#333333"/>'
                )
                parts.append(
                    f'<text x="{self.left - 7}" y="{_fmt(py + 4)}" {_FONT} '
                    f'font-size="10" text-anchor="end">{tick:.2f}</text>'
                )
        if x_ticks:
            for tick in _ticks(self.x_lo, self.x_hi):
                px = self.x(tick)
                parts.append(
                    f'<line x1="{_fmt(px)}" y1="{self.h - self.bottom}" '
                    f'x2="{_fmt(px)}" y2="{self.h - self.bottom + 4}" stroke="#333333"/>'
                )
                parts.append(
                    f'<text x="{_fmt(px)}" y="{self.h - self.bottom + 16}" {_FONT} '
                    f'font-size="10" text-anchor="middle">{tick:.2f}</text>'
                )
        return parts


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def strip_plot(
    groups: list[tuple[str, list[float]]],
    title: str = "Self-similarity by corpus",
    y_label: str = "standardized similarity (z)",
    width: int = 640,
    height: int = 420,
) -> str:
    """Categorical scatter: one column per group, a tick at each group mean."""
    all_values = [v for _, values in groups for v in values] or [0.0]
    pad = 0.05 * (max(all_values) - min(all_values) or 1.0)
    axes = _Axes(width, height, (0.0, float(len(groups))),
                 (min(all_values) - pad, max(all_values) + pad))
    body = axes.frame(title, "", y_label, x_ticks=False)
    for g, (label, values) in enumerate(groups):
        color = PALETTE[g % len(PALETTE)]
        center = axes.x(g + 0.5)
        body.append(
            f'<text x="{_fmt(center)}" y="{height - axes.bottom + 16}" {_FONT} '
            f'font-size="11" text-anchor="middle">{_escape(label)}</text>'
        )
        for i, v in enumerate(values):
            # Deterministic jitter from the point index; no RNG involved.
            offset = ((i * 29) % 23 - 11) / 23.0 * 26.0
            body.append(
                f'<circle cx="{_fmt(center + offset)}" cy="{_fmt(axes.y(v))}" '
                f'r="2.4" fill="{color}" fill-opacity="0.55"/>'
            )
        if values:
            mean = sum(values) / len(values)
            py = axes.y(mean)
            body.append(
                f'<line x1="{_fmt(center - 20)}" y1="{_fmt(py)}" '
                f'x2="{_fmt(center + 20)}" y2="{_fmt(py)}" '
                f'stroke="{color}" stroke-width="2.5"/>'
            )
    return _doc(width, height, body)


def profile_scatter(
    reg_profile: RegisterProfile,
    title: str = "Register profile",
    width: int = 640,
    height: int = 480,
) -> str:
    """Scatter of samples in the (z-to-WK, z-to-TW) plane, one color per source."""
    points = reg_profile.points
    xs = [p.z_to_wk for p in points] or [0.0]
    ys = [p.z_to_tw for p in points] or [0.0]
    pad_x = 0.05 * (max(xs) - min(xs) or 1.0)
    pad_y = 0.05 * (max(ys) - min(ys) or 1.0)
    axes = _Axes(width, height, (min(xs) - pad_x, max(xs) + pad_x),
                 (min(ys) - pad_y, max(ys) + pad_y))
    body = axes.frame(title, "standardized similarity to WK",
                      "standardized similarity to TW")
    sources = reg_profile.sources()
    for s, source in enumerate(sources):
        color = PALETTE[s % len(PALETTE)]
        for p in points:
            if p.source_corpus_id != source:
                continue
            body.append(
                f'<circle cx="{_fmt(axes.x(p.z_to_wk))}" cy="{_fmt(axes.y(p.z_to_tw))}" '
                f'r="3" fill="{color}" fill-opacity="0.6"/>'
            )
        body.append(
            f'<rect x="{axes.w - 150}" y="{40 + 18 * s}" width="10" height="10" '
            f'fill="{color}"/>'
        )
        body.append(
            f'<text x="{axes.w - 135}" y="{49 + 18 * s}" {_FONT} font-size="11">'
            f'{_escape(source)}</text>'
        )
    return _doc(width, height, body)


def _heat_color(value: float, lo: float, hi: float) -> str:
    """White-to-blue ramp over [lo, hi]."""
    if hi <= lo:
        frac = 1.0
    else:
        frac = (value - lo) / (hi - lo)
    frac = min(1.0, max(0.0, frac))
    r = round(255 - 205 * frac)
    g = round(255 - 136 * frac)
    b = 255
    return f"rgb({r},{g},{b})"


def cluster_heatmap(
    dendrogram: Dendrogram,
    title: str = "Corpus similarity and clusters",
    cell: int = 44,
    width: int | None = None,
) -> str:
    """Similarity heatmap ordered by the merge tree, tree drawn above."""
    matrix = dendrogram.matrix
    order = leaf_order(dendrogram)
    ids = [matrix.corpus_ids[i] for i in order]
    n = len(ids)
    label_w = 10 + 8 * max((len(i) for i in ids), default=4)
    tree_h = 110 if dendrogram.merges else 10
    left, top = label_w, 40 + tree_h
    w = width or left + n * cell + 30
    h = top + n * cell + 50

    flat = [float(matrix.values[i, j]) for i in range(n) for j in range(n)]
    lo, hi = (min(flat), max(flat)) if flat else (0.0, 1.0)

    body = [
        f'<text x="{w // 2}" y="22" {_FONT} font-size="14" text-anchor="middle">'
        f'{_escape(title)}</text>'
    ]
    for r, i in enumerate(order):
        for c, j in enumerate(order):
            v = float(matrix.values[i, j])
            body.append(
                f'<rect x="{left + c * cell}" y="{top + r * cell}" width="{cell}" '
                f'height="{cell}" fill="{_heat_color(v, lo, hi)}" '
                'stroke="#cccccc" stroke-width="0.5"/>'
            )
            body.append(
                f'<text x="{left + c * cell + cell // 2}" '
                f'y="{top + r * cell + cell // 2 + 4}" {_FONT} font-size="9" '
                f'text-anchor="middle">{v:.2f}</text>'
            )
    for r, cid in enumerate(ids):
        body.append(
            f'<text x="{left - 6}" y="{top + r * cell + cell // 2 + 4}" {_FONT} '
            f'font-size="11" text-anchor="end">{_escape(cid)}</text>'
        )
        body.append(
            f'<text x="{left + r * cell + cell // 2}" y="{h - 28}" {_FONT} '
            f'font-size="11" text-anchor="middle">{_escape(cid)}</text>'
        )

    if dendrogram.merges:
        body.extend(_tree_segments(dendrogram, order, left, cell, top, tree_h))
    return _doc(w, h, body)


def _tree_segments(dendrogram, order, left, cell, top, tree_h) -> list[str]:
    """Merge tree above the heatmap, heights scaled into the tree band."""
    n = len(dendrogram.leaves)
    col = {leaf: order.index(leaf) for leaf in range(n)}
    pos = {leaf: left + col[leaf] * cell + cell / 2 for leaf in range(n)}
    max_h = max(m[2] for m in dendrogram.merges) or 1.0
    base_y = top - 8

    def py(height: float) -> float:
        return base_y - (height / max_h) * (tree_h - 14)

    node_y = {leaf: base_y for leaf in range(n)}
    parts = []
    for t, (a, b, height, _) in enumerate(dendrogram.merges):
        y = py(height)
        xa, xb = pos[a], pos[b]
        parts.append(
            f'<line x1="{_fmt(xa)}" y1="{_fmt(node_y[a])}" x2="{_fmt(xa)}" '
            f'y2="{_fmt(y)}" stroke="#555555" stroke-width="1.5"/>'
        )
        parts.append(
            f'<line x1="{_fmt(xb)}" y1="{_fmt(node_y[b])}" x2="{_fmt(xb)}" '
            f'y2="{_fmt(y)}" stroke="#555555" stroke-width="1.5"/>'
        )
        parts.append(
            f'<line x1="{_fmt(xa)}" y1="{_fmt(y)}" x2="{_fmt(xb)}" y2="{_fmt(y)}" '
            'stroke="#555555" stroke-width="1.5"/>'
        )
        merged = n + t
        pos[merged] = (xa + xb) / 2
        node_y[merged] = y
    return parts
