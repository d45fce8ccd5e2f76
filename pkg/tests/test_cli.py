import io
import json
import subprocess
import sys

import pytest

from dcsym.cli import run


def call(*argv):
    buf = io.StringIO()
    code = run(list(argv), buf)
    return code, buf.getvalue()


def test_verify_case_passes():
    code, text = call("verify", "case", "3.13")
    assert code == 0 and "PASS case 3.13" in text


def test_printed_errata_exit_one():
    code, text = call("verify", "case", "2.7e", "--printed")
    assert code == 1 and "FAIL" in text


def test_usage_errors_exit_two(capsys):
    assert call("verify", "case", "9.9")[0] == 2
    assert call("frobnicate")[0] == 2
    assert call("verify", "case", "1.2a", "--pick", "p")[0] == 2
    assert call("--samples", "0", "verify", "case", "1.1")[0] == 2
    assert call("--catalog", "/nonexistent.yaml", "list", "cases")[0] == 2
    assert "dcsym:" in capsys.readouterr().err


def test_pick_outside_constraints_is_usage_error():
    assert call("verify", "case", "1.2a", "--pick", "p=5")[0] == 2


def test_structured_output_is_deterministic():
    a = call("--format", "structured", "verify", "solutions", "fd-1", "fd-2")
    b = call("--format", "structured", "verify", "solutions", "fd-1", "fd-2")
    assert a == b
    data = json.loads(a[1])
    assert data["summary"]["fail"] == 0 and data["reports"][0]["status"] == "pass"


def test_failures_listed_first():
    code, text = call("--format", "structured", "verify", "solutions", "--printed")
    assert code == 1
    statuses = [r["status"] for r in json.loads(text)["reports"][0]["details"]]
    assert statuses == sorted(statuses, key=lambda s: s != "fail")


def test_seed_changes_samples_not_verdict():
    a = call("--format", "structured", "--seed", "1", "verify", "case", "2.1")
    b = call("--format", "structured", "--seed", "2", "verify", "case", "2.1")
    assert a[0] == b[0] == 0


@pytest.mark.parametrize("kind", ["cases", "equations", "solutions", "transforms", "algebras",
                                  "contractions", "reductions", "operators"])
def test_list(kind):
    code, text = call("list", kind)
    assert code == 0 and text.strip()


def test_subcommands():
    assert call("transform", "apply", "u-to-v-power")[0] == 0
    assert call("transform", "map-solution", "cole-hopf", "--solution", "1")[0] == 0
    # not a solution of the source, so its image is not one either
    assert call("transform", "map-solution", "cole-hopf", "--solution", "1 + x^2")[0] == 1
    assert call("reduce", "--row", "4.1", "--row", "sl2-D")[0] == 0
    assert call("reduce", "--antireduction")[0] == 0
    assert call("contract", "--spec", "3.1->2.1")[0] == 0
    assert call("nonclassical", "--example", "1")[0] == 0
    assert call("nonclassical", "--derive", "--case", "tau0")[0] == 0
    assert call("nonclassical", "--literature")[0] == 0


def test_external_catalog(tmp_path):
    path = tmp_path / "more.yaml"
    path.write_text("solutions:\n- {id: cli-fd, equation: fast-diffusion, expr: \"2*t*x^(-2)\"}\n")
    code, text = call("--catalog", str(path), "verify", "solutions", "cli-fd")
    assert code == 0
    path.write_text("solutions:\n- {id: cli-bad, equation: fast-diffusion, expr: \"t*x^(-2)\"}\n")
    code, text = call("--catalog", str(path), "verify", "solutions", "cli-bad")
    assert code == 1 and "witness" in text


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dcsym", "list", "algebras"], capture_output=True, text=True)
    assert proc.returncode == 0 and "sl2" in proc.stdout
