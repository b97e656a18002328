"""SVG graphs of circle maps and CSV orbit tables. Output is byte-deterministic."""

from .arith import as_rat, floor_rat, format_rat
from .errors import IoError, PreconditionViolation
from .plmap import evaluate
from .rotation import _render, _round

SIZE = 400
MARGIN = 40


def _graph_segments(F):
    """Polylines of ``x -> F(x) mod l`` on ``[0, l]``, split where the value wraps."""
    l = F.l
    xs = list(F.xs) + [l]
    pts = [(x, evaluate(F, x)) for x in xs]
    segments, current = [], []
    for (xa, ya), (xb, yb) in zip(pts, pts[1:]):
        ka = floor_rat(ya / l)
        if not current:
            current.append((xa, ya - ka * l))
        # multiples of l strictly above ya and at most yb
        k = ka + 1
        while k * l <= yb:
            xc = xa + (k * l - ya) * (xb - xa) / (yb - ya)
            current.append((xc, l))
            segments.append(current)
            current = [(xc, as_rat(0))]
            k += 1
        kb = k - 1
        if xb != current[-1][0]:
            current.append((xb, yb - kb * l))
    if len(current) > 1:
        segments.append(current)
    return segments


def graph_svg(F):
    l = F.l
    span = SIZE - 2 * MARGIN

    def px(x):
        return f"{MARGIN + float(x / l) * span:.3f}"

    def py(y):
        return f"{SIZE - MARGIN - float(y / l) * span:.3f}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{span}" height="{span}" fill="none" stroke="black"/>',
    ]
    for seg in _graph_segments(F):
        coords = " ".join(f"{px(x)},{py(y)}" for x, y in seg)
        out.append(f'<polyline points="{coords}" fill="none" stroke="blue" stroke-width="2"/>')
    xlabels, ylabels = {as_rat(0), l}, {as_rat(0), l}
    for x in F.xs:
        y = evaluate(F, x)
        y -= floor_rat(y / l) * l
        out.append(f'<circle cx="{px(x)}" cy="{py(y)}" r="3" fill="red"/>')
        xlabels.add(x)
        ylabels.add(y)
    for x in sorted(xlabels):
        out.append(f'<text x="{px(x)}" y="{SIZE - MARGIN + 16}" font-size="12" '
                   f'text-anchor="middle">{format_rat(x)}</text>')
    for y in sorted(ylabels):
        out.append(f'<text x="{MARGIN - 6}" y="{py(y)}" font-size="12" '
                   f'text-anchor="end">{format_rat(y)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def orbit_csv(F, x0, n):
    if n < 1:
        raise PreconditionViolation("n must be >= 1")
    rows = ["k,value,ratio"]
    x = as_rat(x0)
    for k in range(1, n + 1):
        x = evaluate(F, x)
        rows.append(f"{k},{format_rat(x)},{_render(_round(x / k, 12), 12)}")
    return "\n".join(rows) + "\n"


def _write(text, out):
    if hasattr(out, "write"):
        out.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"{out}: {exc.strerror}") from exc


def emit_graph_svg(F, out):
    _write(graph_svg(F), out)


def emit_orbit_csv(F, x0, n, out):
    _write(orbit_csv(F, x0, n), out)


__all__ = ["emit_graph_svg", "emit_orbit_csv", "graph_svg", "orbit_csv"]
