import io
import re

import pytest
from gmpy2 import mpq

from rotcalc.emit import emit_graph_svg, emit_orbit_csv, graph_svg, orbit_csv
from rotcalc.errors import IoError, PreconditionViolation
from rotcalc.plmap import PLLift


def _polylines(svg):
    return re.findall(r'<polyline points="([^"]+)"', svg)


def test_orbit_examples(f39):
    assert orbit_csv(f39, 0, 2) == "k,value,ratio\n1,2/3,0.666666666667\n2,11/9,0.611111111111\n"
    assert orbit_csv(PLLift.identity(), 0, 3).splitlines()[1:] == [
        "1,0,0.000000000000", "2,0,0.000000000000", "3,0,0.000000000000"]
    z = orbit_csv(PLLift.translation(1), 0, 3).splitlines()
    assert z[3] == "3,3,1.000000000000"
    with pytest.raises(PreconditionViolation):
        orbit_csv(f39, 0, 0)


def test_graph_example39(f39):
    svg = graph_svg(f39)
    assert svg.startswith('<?xml') and 'version="1.1"' in svg
    # (0, 2/3) -> (1/2, 1), wrap, (1/2, 0) -> (1, 2/3) in a 320px square offset by 40
    assert _polylines(svg) == ["40.000,146.667 200.000,40.000", "200.000,360.000 360.000,146.667"]
    assert ">1/2</text>" in svg and ">2/3</text>" in svg
    assert svg.count("<circle") == 2
    assert graph_svg(f39) == svg


def test_graph_identity_and_rotation():
    assert _polylines(graph_svg(PLLift.identity())) == ["40.000,360.000 360.000,40.000"]
    lines = _polylines(graph_svg(PLLift.translation(mpq(1, 3))))
    # wrap at x = 2/3
    assert lines == ["40.000,253.333 253.333,40.000", "253.333,360.000 360.000,253.333"]


def test_graph_wrap_positions():
    # F(0) = 0 and F(1) = 1: no wrap inside the square
    F = PLLift.from_knots([(0, 0), (mpq(1, 8), mpq(1, 2)), (1, 1)], 1)
    assert len(_polylines(graph_svg(F))) == 1
    # F(0) = 1/2 with slope 3 on [0, 1/4]: wraps at x = 1/6
    G = PLLift.from_knots([(0, mpq(1, 2)), (mpq(1, 4), mpq(5, 4)), (1, mpq(3, 2))], 1)
    assert [p.split()[-1] for p in _polylines(graph_svg(G))][0] == "93.333,40.000"


def test_emit_to_stream_and_file(f39, tmp_path):
    buf = io.StringIO()
    emit_orbit_csv(f39, 0, 2, buf)
    assert buf.getvalue().startswith("k,value,ratio\n")
    path = tmp_path / "g.svg"
    emit_graph_svg(f39, path)
    assert path.read_text() == graph_svg(f39)
    with pytest.raises(IoError):
        emit_graph_svg(f39, tmp_path / "missing" / "g.svg")
