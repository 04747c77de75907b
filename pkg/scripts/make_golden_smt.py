"""Write golden .smt2 files for the boxed proxy programs and record an external solver's verdict.

    python3 scripts/make_golden_smt.py   # needs the `z3` executable or z3-solver
"""

from __future__ import annotations

import shutil
import subprocess
import sys
from pathlib import Path

from leakcheck.corpus import corpus_dir
from leakcheck.pipeline import analyze_program
from leakcheck.ir import load_program
from leakcheck.solver import emit_smtlib2


def z3_verdict(path: Path) -> str:
    exe = shutil.which("z3")
    if exe:
        cmd = [exe, str(path)]
    else:
        cmd = [sys.executable, "-c", "import sys, z3; s = z3.Solver(); s.from_file(sys.argv[1]); print(s.check())", str(path)]
    return subprocess.run(cmd, capture_output=True, text=True, check=True).stdout.strip()


def main() -> None:
    out = corpus_dir() / "golden"
    out.mkdir(exist_ok=True)
    lines = []
    for stem in ("boxed_proxy", "boxed_proxy_fixed"):
        analysis = analyze_program(load_program(corpus_dir() / "boxed_proxy" / f"{stem}.mir.json"))
        smt = out / f"{stem}.smt2"
        smt.write_text(emit_smtlib2(analysis.systems["main"]), encoding="utf-8")
        lines.append(f"{smt.name} {z3_verdict(smt)}")
    (out / "z3_status.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))


if __name__ == "__main__":
    main()
