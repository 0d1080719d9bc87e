"""Deterministic SVG line charts for per-epoch validation curves.

The same input always renders the same bytes: coordinates are printed with a
fixed precision and series are drawn in the order given.
"""
from typing import Dict, List, Sequence
from xml.sax.saxutils import escape

WIDTH = 640
HEIGHT = 400
PAD_LEFT = 56
PAD_RIGHT = 120
PAD_TOP = 40
PAD_BOTTOM = 48
GRIDLINES = (0.0, 0.25, 0.5, 0.75, 1.0)
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _x(index: int, count: int) -> float:
    span = WIDTH - PAD_LEFT - PAD_RIGHT
    if count <= 1:
        return PAD_LEFT + span / 2
    return PAD_LEFT + index * span / (count - 1)


def _y(value: float) -> float:
    value = min(max(value, 0.0), 1.0)
    return PAD_TOP + (1.0 - value) * (HEIGHT - PAD_TOP - PAD_BOTTOM)


def render_line_chart(title: str, series: Dict[str, Sequence[float]], x_label: str = "epoch") -> str:
    """
    One polyline per series over x = 1..n, y fixed to [0, 1].

    Args:
        title: Chart title, e.g. "accuracy".
        series: Legend name → one value per epoch, in drawing order.

    Returns:
        str: The SVG document.
    """
    count = max((len(v) for v in series.values()), default=0)
    out: List[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH / 2:.2f}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{escape(title)}</text>',
    ]
    for level in GRIDLINES:
        y = _y(level)
        out.append(
            f'<line x1="{PAD_LEFT}" y1="{y:.2f}" x2="{WIDTH - PAD_RIGHT}" y2="{y:.2f}" stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{PAD_LEFT - 8}" y="{y + 4:.2f}" text-anchor="end" font-family="sans-serif" font-size="11">{level:.2f}</text>'
        )
    for i in range(count):
        out.append(
            f'<text x="{_x(i, count):.2f}" y="{HEIGHT - PAD_BOTTOM + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{i + 1}</text>'
        )
    out.append(
        f'<text x="{(PAD_LEFT + WIDTH - PAD_RIGHT) / 2:.2f}" y="{HEIGHT - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{escape(x_label)}</text>'
    )

    for n, (name, values) in enumerate(series.items()):
        color = PALETTE[n % len(PALETTE)]
        points = " ".join(f"{_x(i, count):.2f},{_y(v):.2f}" for i, v in enumerate(values))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{points}"/>')
        legend_y = PAD_TOP + 16 * n
        out.append(
            f'<text x="{WIDTH - PAD_RIGHT + 12}" y="{legend_y + 4}" fill="{color}" font-family="sans-serif" '
            f'font-size="12">{escape(name)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
