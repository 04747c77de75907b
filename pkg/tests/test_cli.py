from __future__ import annotations

import io
import json
import shutil
import subprocess
import sys

import pytest

from leakcheck.cli import RunConfig, main, run
from leakcheck.corpus import corpus_dir
from leakcheck.pipeline import PHASES

CORPUS = corpus_dir()


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    from leakcheck.cli import build_parser

    args = build_parser().parse_args(list(argv))
    cfg = RunConfig(
        inputs=args.inputs, format=args.format, emit_smt_dir=args.emit_smt, dump_encodings=args.dump_encodings,
        dump_cfg=args.dump_cfg, dump_constraints=args.dump_constraints, solver_budget=args.budget,
        filters_enabled=not args.no_filters, timings=args.timings,
    )
    code = run(cfg, out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def clean_dir(tmp_path):
    for rel in ("motivating/wrapped_box_fixed.mir.json", "motivating/proxy_drop_fixed.mir.json",
                "scenarios/ow_loop_clean.mir.json"):
        shutil.copy(CORPUS / rel, tmp_path / rel.split("/")[1])
    return tmp_path


def test_clean_directory_exits_zero(clean_dir):
    code, out, _ = invoke(str(clean_dir))
    assert (code, out) == (0, "")


def test_motivating_directory_reports_two_leaks():
    code, out, _ = invoke(str(CORPUS / "motivating"))
    assert code == 1
    lines = out.splitlines()
    assert len(lines) == 2 and all(line.startswith("LEAK ") for line in lines)
    assert {line.split()[1] for line in lines} == {"orphan_object", "proxy_type"}


def test_missing_path_exits_two():
    code, out, err = invoke("/nonexistent/path.mir.json")
    assert code == 2
    assert "no such file" in err


def test_suppressed_only_exits_zero():
    code, out, _ = invoke(str(CORPUS / "filters/ffi_export.mir.json"))
    assert code == 0
    assert out.startswith("note: LEAK")
    code, out, _ = invoke("--no-filters", str(CORPUS / "filters/ffi_export.mir.json"))
    assert code == 1 and out.startswith("LEAK")


def test_json_is_byte_identical_across_runs():
    a = invoke("--format", "json", str(CORPUS))
    b = invoke("--format", "json", str(CORPUS))
    assert a[1] == b[1]
    assert isinstance(json.loads(a[1]), list)


def test_emit_smt(tmp_path):
    code, _, _ = invoke("--emit-smt", str(tmp_path / "smt"), str(CORPUS / "boxed_proxy/boxed_proxy.mir.json"))
    assert code == 1
    assert (tmp_path / "smt" / "main.smt2").read_text() == (CORPUS / "golden/boxed_proxy.smt2").read_text()


def test_budget_env_override(monkeypatch, capsys):
    monkeypatch.setenv("LEAKCHECK_BUDGET", "1")
    # the wrapped box program has a copy disjunction, so its search needs more than one node
    assert main([str(CORPUS / "motivating/wrapped_box.mir.json"), "--budget", "1000000"]) == 3
    assert "exceeded" in capsys.readouterr().err


def test_bad_budget_env(monkeypatch):
    monkeypatch.setenv("LEAKCHECK_BUDGET", "lots")
    assert main([str(CORPUS / "boxed_proxy")]) == 2


def test_budget_must_be_positive():
    assert invoke("--budget", "0", str(CORPUS / "boxed_proxy"))[0] == 2


def test_timings_report_three_phases():
    _, _, err = invoke("--timings", str(CORPUS / "boxed_proxy"))
    lines = [line for line in err.splitlines() if line.startswith("timing ")]
    assert [line.split(":")[0][len("timing "):] for line in lines] == list(PHASES)
    assert all(line.endswith(" ms") for line in lines)


def test_dump_flags():
    code, out, _ = invoke("--dump-encodings", "--dump-cfg", "--dump-constraints", "main",
                          str(CORPUS / "motivating/wrapped_box.mir.json"))
    assert code == 1
    assert "String" in out or "Box" in out
    assert "fn main" in out and "order: bb0" in out
    assert "constraints for main:" in out and "CALL-SOURCE" in out


def _with_broken_function(tmp_path):
    doc = json.loads((CORPUS / "motivating/wrapped_box.mir.json").read_text())
    broken = json.loads(json.dumps(doc["functions"][0]))
    broken["name"] = "broken"
    broken["blocks"][0]["term"]["callee"] = "nowhere::alloc"
    doc["functions"].append(broken)
    doc["entries"].append("broken")
    path = tmp_path / "mixed.mir.json"
    path.write_text(json.dumps(doc))
    return path


def test_malformed_function_is_isolated(tmp_path):
    code, out, err = invoke(str(_with_broken_function(tmp_path)))
    assert code == 2
    assert "broken" in err
    assert out == invoke(str(CORPUS / "motivating/wrapped_box.mir.json"))[1]


def test_bad_file_does_not_abort_others(tmp_path):
    (tmp_path / "a_bad.mir.json").write_text("{not json")
    shutil.copy(CORPUS / "motivating/proxy_drop.mir.json", tmp_path / "b.mir.json")
    code, out, err = invoke(str(tmp_path))
    assert code == 2
    assert "a_bad.mir.json" in err
    assert "proxy_type" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "leakcheck", str(CORPUS / "motivating/proxy_drop.mir.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert proc.stdout.startswith("LEAK proxy_type main proxy_drop.rs:")
