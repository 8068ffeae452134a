import io
import pathlib
import subprocess
import sys
from fractions import Fraction

import pytest

from ipscomp.cli import CliConfig, UsageError, main

DEMOS = pathlib.Path(__file__).resolve().parent.parent / "demos" / "circuits"


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


def demo(name):
    return DEMOS / name


def test_pit_zero_and_nonzero():
    code, text = run("pit", demo("xminusx.alg"), "--exact")
    assert code == 0 and text.startswith("verdict=ZERO method=exact")
    code, text = run("pit", demo("frobenius_f3.alg"), "--exact")
    assert code == 1 and "verdict=NONZERO" in text and "witness=" in text


def test_randomized_pit_record():
    code, text = run("pit", demo("square_q.alg"), "--term-cap", "1")
    assert code == 0 and "method=randomized" in text and "error_bound<=2^-30" in text


def test_select_field():
    code, text = run("select-field", demo("frobenius_f3.alg"))
    assert code == 0 and text.startswith("source=[F 3] target=[F 3^")


def test_encode_and_compile(tmp_path):
    code, text = run("encode", demo("binomial_f3.alg"))
    assert code == 0 and text.startswith("vars")
    out = tmp_path / "c.cnf"
    code, text = run("compile", demo("binomial_f3.alg"), "-o", out)
    assert code == 0 and "cnf vars=" in text
    assert out.read_text().splitlines()[0].startswith("c 1 ")


def test_refute_variety(tmp_path):
    code, text = run("refute-variety", demo("square_q.alg"), "-v", "-o", tmp_path / "r.txt")
    assert code == 0 and "verification=OK" in text and "ideal_check" in text
    code, text = run("refute-variety", demo("product_f2.alg"))
    assert code == 1 and "verdict=NONZERO" in text


@pytest.mark.parametrize("mode", ["cnf", "variety"])
def test_certify_verify_roundtrip(tmp_path, mode):
    bundle = tmp_path / "x.bundle"
    code, text = run("certify", demo("xminusx.alg"), "--mode", mode, "--seed", "7", "-o", bundle)
    assert code == 0 and text.startswith("verification=OK")
    first = bundle.read_text()
    run("certify", demo("xminusx.alg"), "--mode", mode, "--seed", "7", "-o", bundle)
    assert bundle.read_text() == first
    code, text = run("verify", bundle)
    assert code == 0 and text.startswith("verification=OK")


def test_certify_nonzero_exits_one():
    code, text = run("certify", demo("product_f2.alg"))
    assert code == 1 and "verdict=NONZERO" in text


def test_verify_tampered(tmp_path):
    bundle = tmp_path / "x.bundle"
    run("certify", demo("binomial_f3.alg"), "-o", bundle)
    text = bundle.read_text().replace("[refutation]\nfield F", "[refutation]\n# edited\nfield F")
    bundle.write_text(text)
    code, out = run("verify", bundle)
    assert code == 1 and out.strip() == "verification=FAILED stage=manifest"
    bundle.write_text("nonsense\n")
    code, out = run("verify", bundle)
    assert code == 1 and out.strip() == "verification=FAILED stage=parse"


def test_usage_errors(tmp_path, capsys):
    assert run("pit", tmp_path / "missing.alg")[0] == 2
    assert run("frobnicate", "x")[0] == 2
    assert run("pit", demo("xminusx.alg"), "--error-bound", "2")[0] == 2
    assert run("pit", demo("xminusx.alg"), "--error-bound", "abc")[0] == 2
    assert run("pit", demo("xminusx.alg"), "--term-cap", "0")[0] == 2
    bad = tmp_path / "bad.alg"
    bad.write_text("field F 3\ninput x\nmul %1 x\noutput %1\n")
    assert run("pit", bad)[0] == 2
    assert "line 3" in capsys.readouterr().err


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("IPSCOMP_SEED", "5")
    a = run("pit", demo("square_q.alg"), "--term-cap", "1")[1]
    monkeypatch.setenv("IPSCOMP_SEED", "oops")
    assert run("pit", demo("square_q.alg"))[0] == 2
    monkeypatch.delenv("IPSCOMP_SEED")
    assert run("pit", demo("square_q.alg"), "--term-cap", "1", "--seed", "5")[1] == a


def test_config_validation():
    with pytest.raises(UsageError):
        CliConfig(-1, Fraction(1, 2), 1, 1, None, "cnf", False, False)
    with pytest.raises(UsageError):
        CliConfig(0, Fraction(1), 1, 1, None, "cnf", False, False)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "ipscomp", "pit", str(demo("xminusx.alg")), "--exact"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("verdict=ZERO")
