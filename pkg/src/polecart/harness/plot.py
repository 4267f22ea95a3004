"""Static SVG plot of per-episode returns and their moving average."""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 800, 480
LEFT, RIGHT, TOP, BOTTOM = 70, 130, 40, 60
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def _nice_ceiling(x: float) -> float:
    if x <= 0:
        return 1.0
    mag = 10 ** math.floor(math.log10(x))
    for m in (1, 2, 2.5, 5, 10):
        if m * mag >= x:
            return m * mag
    return 10 * mag


def _f(x: float) -> str:
    return f"{x:.2f}"


def render_svg(summaries, title: str = "Cumulative reward per episode") -> str:
    if not summaries:
        raise ValueError("need at least one run summary to plot")
    n_ep = max(len(s.records) for s in summaries)
    y_max = _nice_ceiling(max((max(s.returns, default=0.0) for s in summaries), default=0.0))
    x_span = max(n_ep - 1, 1)
    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM

    def px(ep: float) -> float:
        return LEFT + plot_w * ep / x_span

    def py(val: float) -> float:
        return TOP + plot_h * (1.0 - val / y_max)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{escape(title)}</text>',
    ]
    axis = 'stroke="black" stroke-width="1"'
    out.append(f'<line x1="{LEFT}" y1="{TOP + plot_h}" x2="{LEFT + plot_w}" y2="{TOP + plot_h}" {axis}/>')
    out.append(f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + plot_h}" {axis}/>')
    for k in range(6):
        yv = y_max * k / 5
        y = _f(py(yv))
        out.append(f'<line x1="{LEFT - 5}" y1="{y}" x2="{LEFT}" y2="{y}" {axis}/>')
        out.append(f'<text x="{LEFT - 8}" y="{y}" text-anchor="end" dominant-baseline="middle" font-family="sans-serif" font-size="11">{yv:g}</text>')
        xv = round(x_span * k / 5)
        x = _f(px(xv))
        out.append(f'<line x1="{x}" y1="{TOP + plot_h}" x2="{x}" y2="{TOP + plot_h + 5}" {axis}/>')
        out.append(f'<text x="{x}" y="{TOP + plot_h + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{xv}</text>')
    out.append(f'<text x="{LEFT + plot_w / 2}" y="{HEIGHT - 15}" text-anchor="middle" font-family="sans-serif" font-size="13">episode</text>')
    out.append(
        f'<text x="18" y="{TOP + plot_h / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {TOP + plot_h / 2})">return</text>'
    )

    for k, s in enumerate(summaries):
        color = PALETTE[k % len(PALETTE)]
        out.append(f'<g class="series" data-seed="{s.seed}">')
        for rec in s.records:
            out.append(f'<circle cx="{_f(px(rec.episode))}" cy="{_f(py(rec.ret))}" r="1.5" fill="{color}" fill-opacity="0.45"/>')
        pts = " ".join(f"{_f(px(r.episode))},{_f(py(m))}" for r, m in zip(s.records, s.moving_average))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        out.append("</g>")

    lx = WIDTH - RIGHT + 15
    for k, s in enumerate(summaries):
        color = PALETTE[k % len(PALETTE)]
        ly = TOP + 10 + 18 * k
        out.append(
            f'<g class="legend"><rect x="{lx}" y="{ly - 5}" width="14" height="10" fill="{color}"/>'
            f'<text x="{lx + 20}" y="{ly}" dominant-baseline="middle" font-family="sans-serif" font-size="12">seed {s.seed}</text></g>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(summaries, path: str | Path, title: str = "Cumulative reward per episode") -> None:
    path = Path(path)
    svg = render_svg(summaries, title)
    try:
        path.write_text(svg)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
