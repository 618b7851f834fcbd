"""Minimal SVG line plot for a single risk curve."""
from __future__ import annotations

from xml.sax.saxutils import escape

WIDTH, HEIGHT, PAD = 640, 400, 48


def render_risk_curve(curve, level=None, atoms=(), title=None) -> str:
    """SVG text: the curve as a polyline, ``level`` dotted, ``atoms`` as ticks."""
    xs = list(curve.theta_grid)
    ys = list(curve.values)
    x0, x1 = xs[0], xs[-1]
    if x1 == x0:
        x1 = x0 + 1.0
    top = max(ys + ([level] if level is not None else []))
    y0, y1 = min(0.0, min(ys)), (top if top > 0 else 1.0) * 1.05

    def px(x):
        return PAD + (x - x0) / (x1 - x0) * (WIDTH - 2 * PAD)

    def py(y):
        return HEIGHT - PAD - (y - y0) / (y1 - y0) * (HEIGHT - 2 * PAD)

    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{PAD}" y1="{HEIGHT - PAD}" x2="{WIDTH - PAD}" y2="{HEIGHT - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{HEIGHT - PAD}" stroke="black"/>',
        f'<text x="{PAD}" y="{HEIGHT - 12}" font-size="12">{x0:.4g}</text>',
        f'<text x="{WIDTH - PAD}" y="{HEIGHT - 12}" font-size="12" text-anchor="end">{x1:.4g}</text>',
        f'<text x="{PAD - 4}" y="{PAD}" font-size="12" text-anchor="end">{y1:.4g}</text>',
        f'<polyline fill="none" stroke="steelblue" stroke-width="2" points="{pts}"/>',
    ]
    if level is not None:
        out.append(
            f'<line x1="{PAD}" y1="{py(level):.2f}" x2="{WIDTH - PAD}" y2="{py(level):.2f}" '
            'stroke="gray" stroke-dasharray="2,4"/>'
        )
    for a in atoms:
        if x0 <= a <= x1:
            out.append(
                f'<line x1="{px(a):.2f}" y1="{HEIGHT - PAD}" x2="{px(a):.2f}" '
                f'y2="{HEIGHT - PAD + 8}" stroke="firebrick" stroke-width="2"/>'
            )
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="20" font-size="14" text-anchor="middle">{escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
