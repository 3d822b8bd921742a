import json
import subprocess
import sys
from fractions import Fraction

import pytest

from qcalc.cli import main, parse_grid, parse_int_values
from qcalc.errors import ConfigParseError

CHU = ["verify", "--identity", "chu", "--n", "0..8",
       "--grid", "a=1/3,-3/2;c=1/5,7/3;q=1/2,2/5", "--mode", "exact"]
GAUSS = ["verify", "--identity", "gauss", "--prec", "128", "--terms", "80", "--tol", "1e-25",
         "--grid", "a=1/2;b=1/3;c=1/10;q=1/2"]


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_chu_exact(capsys):
    code, out, _ = run(CHU, capsys)
    report = json.loads(out)
    assert code == 0
    assert report["max_residual"] == "0" and report["status"] == "Verified"
    assert report["mode"] == "exact" and report["precision_bits"] is None
    assert len(report["cases"]) == 9 * 2 * 2 * 2
    assert set(report) == {"identity", "mode", "precision_bits", "cases", "max_residual",
                           "skipped_poles", "status"}
    assert set(report["cases"][0]) == {"params", "lhs", "rhs", "residual", "tail_budget"}
    assert all(isinstance(v, str) for v in report["cases"][5]["params"].values())


def test_eval_terminating(capsys):
    code, out, _ = run(["eval", "phi", "--upper", "q^-2,1/3", "--lower", "1/5", "--q", "1/2",
                        "--z", "1/2", "--mode", "exact"], capsys)
    result = json.loads(out)
    assert code == 0 and result["value"] == "7/162" and result["terms_used"] == 3


def test_eval_float_deformed(capsys):
    code, out, _ = run(["eval", "dphi", "--upper", "1/2", "--lower", "1/5", "--q", "1/2",
                        "--z", "1/4", "--u", "1/2", "--format", "md"], capsys)
    assert code == 0 and "value" in out


def test_gauss_float_and_perturbed(capsys):
    code, out, _ = run(GAUSS, capsys)
    assert code == 0 and json.loads(out)["precision_bits"] == 128
    code, _, _ = run(GAUSS + ["--perturb"], capsys)
    assert code == 2


def test_violated_and_markdown(capsys):
    code, out, _ = run(["verify", "--identity", "chu_deriv_a1", "--mode", "exact", "--format", "md",
                        "--k", "1", "--n", "1..2"], capsys)
    assert code == 2 and out.startswith("# chu_deriv_a1") and "| status | Violated |" in out


def test_probe(capsys):
    code, out, _ = run(["probe", "--identity", "chu_T", "--grid", "n=1,2;a=1/3;c=1/5;y=1/4;u=1/2;q=1/2"],
                       capsys)
    data = json.loads(out)["variants"]
    assert code == 0
    assert data["with_a_power"]["status"] == "Verified"
    assert data["without_a_power"]["status"] == "Violated"


@pytest.mark.parametrize("argv", [
    ["verify", "--identity", "nope"],
    ["verify", "--identity", "chu", "--prec", "32"],
    ["verify", "--identity", "chu", "--grid", "zz=1"],
    ["verify", "--identity", "chu", "--grid", "a="],
    ["verify", "--identity", "chu", "--grid", "a=1/0"],
    ["verify", "--identity", "chu", "--n", "5..2"],
    ["verify", "--identity", "chu", "--bogus"],
    ["eval", "phi", "--q", "3/2", "--z", "1/4"],
    [],
])
def test_config_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(argv))
    assert exc.value.code == 1


def test_empty_grid_is_a_config_error(capsys):
    code, _, _ = run(["verify", "--identity", "chu", "--mode", "exact",
                        "--grid", "n=2,3;a=1/3;c=2;q=1/2"], capsys)
    assert code == 1


def test_grid_parsing():
    assert parse_int_values("0..3,7") == [0, 1, 2, 3, 7]
    grid = parse_grid("a=1/3,-3/2; n=1..2")
    assert grid == {"a": [Fraction(1, 3), Fraction(-3, 2)], "n": [1, 2]}
    with pytest.raises(ConfigParseError):
        parse_grid("a")


def test_byte_identical_reports(tmp_path):
    outputs = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        assert main(GAUSS + ["--output", str(path), "--threads", str(1 + 3 * i)]) == 0
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qcalc", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "chu_deriv" in proc.stdout
