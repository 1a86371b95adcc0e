"""Minimal SVG scatter plot of an eigenvalue spectrum."""
from __future__ import annotations

import math

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 20, 50


def spectrum_svg(ascending, reference_lines=(), log_y: bool = True, title: str = "") -> str:
    """Render eigenvalues (ascending) as dots, with optional horizontal lines.

    ``reference_lines`` holds ``(value, colour, dashed)`` triples. On a log
    axis, non-positive eigenvalues are pinned to the bottom edge.
    """
    values = [float(v) for v in ascending]
    refs = [(float(v), c, d) for v, c, d in reference_lines]
    positive = [v for v in values + [r[0] for r in refs] if v > 0]
    if log_y:
        lo = math.floor(math.log10(min(positive))) if positive else -1
        hi = math.ceil(math.log10(max(positive))) if positive else 0
        hi = max(hi, lo + 1)

        def ty(v):
            if v <= 0:
                return 0.0
            return (math.log10(v) - lo) / (hi - lo)
    else:
        lo, hi = 0.0, max(positive) if positive else 1.0

        def ty(v):
            return (v - lo) / (hi - lo)

    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM
    n = max(len(values) - 1, 1)

    def px(i):
        return LEFT + plot_w * i / n

    def py(v):
        return TOP + plot_h * (1.0 - min(max(ty(v), 0.0), 1.0))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="14" text-anchor="middle" font-size="12">{title}</text>')
    if log_y:
        for k in range(int(lo), int(hi) + 1):
            y = py(10.0**k)
            out.append(f'<line x1="{LEFT - 4}" y1="{y:.1f}" x2="{LEFT}" y2="{y:.1f}" stroke="black"/>')
            out.append(f'<text x="{LEFT - 8}" y="{y + 4:.1f}" text-anchor="end" font-size="11">1e{k}</text>')
    for v, colour, dashed in refs:
        y = py(v)
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        out.append(f'<line x1="{LEFT}" y1="{y:.1f}" x2="{LEFT + plot_w}" y2="{y:.1f}" '
                   f'stroke="{colour}"{dash}/>')
    for i, v in enumerate(values):
        out.append(f'<circle cx="{px(i):.1f}" cy="{py(v):.1f}" r="1.5" fill="navy"/>')
    out.append(f'<text x="{LEFT + plot_w / 2}" y="{HEIGHT - 15}" text-anchor="middle" '
               f'font-size="12">eigenvalue index (increasing order)</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
