import json
import subprocess
import sys

import pytest

from rotcalc.cli import run, subcommand_parsers
from rotcalc.lang import example39_path, map_to_obj, parse_map
from rotcalc.plmap import compose

G23 = "T(l=1; gens=2,3)"


@pytest.fixture
def ex(tmp_path):
    path = tmp_path / "example39.json"
    path.write_text(example39_path().read_text())
    return str(path)


def cli(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_spec_examples(capsys, ex):
    assert cli(capsys, "rot", "--mode", "decimal", "--digits", "9", "-e", ex) == \
        (0, "0.584962501 (certified 9 digits)\n", "")
    assert cli(capsys, "scl", "--digits", "6", "-e", ex, "--group", G23) == (0, "0.292481\n", "")
    assert cli(capsys, "rot", "--mode", "rational", "--qmax", "10", "-w", "R(2/5)") == (0, "2/5 (exact)\n", "")


def test_bundled_fixture_fallback(capsys):
    code, out, _ = cli(capsys, "rot", "--digits", "4", "-e", "example39.json")
    assert code == 0 and out == "0.5850 (certified 4 digits)\n"


def test_rot_modes(capsys, ex):
    code, out, _ = cli(capsys, "rot", "--mode", "cf", "--depth", "7", "-e", ex)
    assert out.splitlines() == ["[0; 1, 1, 2, 2, 3, 1]", "convergents: 0, 1, 1/2, 3/5, 7/12, 24/41, 31/53"]
    _, out, _ = cli(capsys, "rot", "--mode", "enclosure", "--n", "2", "-e", ex, "--exact")
    assert out == "[9/16, 11/18] (n=2)\n"
    _, out, _ = cli(capsys, "rot", "--mode", "enclosure", "--n", "2", "-e", ex)
    assert out == "[0.562500000000000, 0.611111111111112] (n=2)\n"
    _, out, _ = cli(capsys, "rot", "--mode", "rational", "--qmax", "5", "-e", ex)
    assert out.startswith("none")
    _, out, _ = cli(capsys, "rot", "--mode", "cf", "-w", "R(2/5)")
    assert out.splitlines()[0] == "[0; 2, 2] (exact)"


def test_scl_exact(capsys):
    assert cli(capsys, "scl", "-w", "z", "--group", G23) == (0, "1/2 (exact)\n", "")


def test_words_with_env(capsys, tmp_path, f39):
    env = tmp_path / "env.json"
    env.write_text(json.dumps({"group": G23, "maps": {"a": map_to_obj(f39)}}))
    code, out, _ = cli(capsys, "eval", "-w", "a^2", "--env", str(env))
    assert code == 0 and parse_map(out) == compose(f39, f39)
    code, out, _ = cli(capsys, "scl", "-w", "a * z", "--env", str(env), "--digits", "3")
    assert out == "0.792\n"


def test_compose_with_map_as_f(capsys, ex, f39, tmp_path):
    target = tmp_path / "out.json"
    assert cli(capsys, "compose", "-e", ex, "-w", "f^-1 * f", "-o", str(target))[0] == 0
    assert parse_map(target.read_text()).is_identity()


def test_domain_errors(capsys, ex):
    code, out, err = cli(capsys, "rot", "-w", "R(1/3")
    assert code == 2 and err == "ERROR:SyntaxError:expected ')', found end of input at offset 6\n"
    code, _, err = cli(capsys, "rot", "-w", "g")
    assert code == 2 and err.startswith("ERROR:UnboundName:")
    code, _, err = cli(capsys, "scl", "-e", ex, "--group", "T(l=1; gens=3,5)")
    assert code == 2 and err.startswith("ERROR:UnsupportedGroup:")
    code, _, err = cli(capsys, "bieri-strebel", "--group", "T(l=1; gens=3,5)", "--from", "0,1", "--to", "0,2")
    assert code == 2 and err.startswith("ERROR:CongruenceViolation:")
    code, _, err = cli(capsys, "rot", "-e", "/nonexistent/map.json")
    assert code == 2 and err.startswith("ERROR:IoError:")
    code, _, err = cli(capsys, "scl", "-e", ex, "--group", "T(gens=2)")
    assert code == 2 and err.startswith("ERROR:GroupFormatError:")


def test_usage_errors(capsys, ex):
    assert cli(capsys, "rot", "-e", ex, "--bogus")[0] == 1
    assert cli(capsys, "rot", "-e", ex, "--mode", "nope")[0] == 1
    assert cli(capsys, "rot", "-e", ex, "--dig", "3")[0] == 1     # no abbreviations
    assert cli(capsys, "rot")[0] == 1                              # no map
    assert cli(capsys, "scl", "-e", ex)[0] == 1                    # no group
    assert cli(capsys, "bieri-strebel", "--group", G23, "--from", "0", "--to", "0,1")[0] == 1
    assert cli(capsys, "orbit", "-e", ex, "--n", "0")[0] == 1
    assert cli(capsys)[0] == 1
    assert cli(capsys, "frobnicate")[0] == 1


def test_validate(capsys, ex, tmp_path):
    code, out, _ = cli(capsys, "validate", "-e", ex, "--group", G23)
    assert code == 0 and out.splitlines()[-1] == "result\tpass"
    code, out, err = cli(capsys, "validate", "-e", ex, "--group", "T(l=1; gens=2)")
    assert code == 2 and "slopes_in_P\tFAIL" in out and err.startswith("ERROR:NotAMember:")
    knots = tmp_path / "k.txt"
    knots.write_text("0 0\n1/2 1/4\n1 1\n")
    code, out, _ = cli(capsys, "validate", "--knots", str(knots), "--group", "F(l=1; gens=2,3)")
    assert code == 0 and "endpoint_derivatives\t1/2\t3/2" in out


def test_bieri_strebel_cmd(capsys):
    code, out, _ = cli(capsys, "bieri-strebel", "--group", G23, "--from", "0,1", "--to", "0,5/3")
    rows = [line.split() for line in out.splitlines()]
    assert code == 0 and rows[0] == ["0", "0"] and rows[-1] == ["1", "5/3"]


def test_decompose_witness_defect(capsys, ex):
    code, out, _ = cli(capsys, "decompose", "-e", ex, "--group", G23)
    lines = dict(line.split("\t", 1) for line in out.splitlines())
    assert code == 0 and set(lines) == {"g1", "g2", "fixed_arc_g1", "fixed_arc_g2"}
    assert compose(parse_map(lines["g1"]), parse_map(lines["g2"])) == parse_map(open(ex).read())
    code, out, _ = cli(capsys, "witness", "--group", G23)
    assert code == 0 and out.splitlines()[-1] == "rot([f, g])\t1 (exact)"
    code, out, _ = cli(capsys, "defect-scan", "--group", G23, "--trials", "4", "--seed", "1", "--n", "32")
    assert code == 0 and len(out.splitlines()) == 5 and out.splitlines()[-1].endswith("pass")


def test_approximate_cmd(capsys, tmp_path):
    samples = tmp_path / "s.txt"
    samples.write_text("".join(f"{i}/16 {i}/16\n" for i in range(16)))
    code, out, _ = cli(capsys, "approximate", "--group", G23, "--samples", str(samples), "--eps", "1/10")
    assert code == 0 and parse_map(out).is_identity()
    coarse = tmp_path / "c.txt"
    coarse.write_text("0 0\n1/3 1/3\n2/3 2/3\n")
    code, _, err = cli(capsys, "approximate", "--group", G23, "--samples", str(coarse), "--eps", "1/100",
                       "--uniform")
    assert code == 2 and err.startswith("ERROR:SamplesTooCoarse:")


def test_balance_and_conjugacy(capsys, ex, tmp_path):
    m = tmp_path / "m.txt"
    m.write_text("0 1/2 0.5\n1/2 1 0.5\n")
    code, out, _ = cli(capsys, "balance", "-e", ex, "--measures", str(m))
    assert code == 0 and out.startswith("-0.0588")
    m.write_text("0 3/4 0.5\n3/4 1 0.5\n")
    assert cli(capsys, "balance", "-e", ex, "--measures", str(m))[2].startswith("ERROR:PartitionMismatch:")
    rho = "0.58496250072115618145373894394781650875981440769248106045575265454109822779435"
    code, out, _ = cli(capsys, "conjugacy-check", "-e", ex, "--rho", rho, "--grid", "64")
    assert code == 0 and float(out) < 1e-30
    code, out, _ = cli(capsys, "conjugacy-check", "-e", ex, "--rho", "0.58", "--grid", "64")
    assert float(out) > 1e-3


def test_plot_and_orbit(capsys, ex, tmp_path):
    code, out, _ = cli(capsys, "orbit", "-e", ex, "--n", "2")
    assert out == "k,value,ratio\n1,2/3,0.666666666667\n2,11/9,0.611111111111\n"
    svg = tmp_path / "f.svg"
    assert cli(capsys, "plot", "-e", ex, "-o", str(svg))[0] == 0
    assert svg.read_text().startswith("<?xml")


def test_help_for_every_subcommand(capsys):
    for name in subcommand_parsers():
        code, out, _ = cli(capsys, name, "--help")
        assert code == 0 and out.startswith("usage: rotcalc ")


def test_module_entry_point_is_deterministic():
    argv = [sys.executable, "-m", "rotcalc", "orbit", "-e", "example39.json", "--n", "5"]
    first = subprocess.run(argv, capture_output=True, check=True).stdout
    second = subprocess.run(argv, capture_output=True, check=True).stdout
    assert first == second and first.startswith(b"k,value,ratio\n")
    bad = subprocess.run([sys.executable, "-m", "rotcalc", "rot", "-w", "f"], capture_output=True)
    assert bad.returncode == 2 and bad.stderr.startswith(b"ERROR:UnboundName:")
