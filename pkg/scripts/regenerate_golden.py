"""Rewrite tests/golden/*.csv from the coarse cases in tests/golden_cases.py.

Run only after an intentional change to numerical output, then review the diff.
"""
import os
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))
os.environ["BIPHOTON_THREADS"] = "1"

from golden_cases import GOLDEN_CASES  # noqa: E402

from biphoton.cli import main  # noqa: E402


def regenerate() -> int:
    out_dir = ROOT / "tests" / "golden"
    out_dir.mkdir(exist_ok=True)
    worst = 0
    for name, args in GOLDEN_CASES.items():
        status = main([name, *args, "--no-timestamp", "-o", str(out_dir / f"{name}.csv")])
        print(f"{name}: exit {status}")
        worst = max(worst, status)
    return worst


if __name__ == "__main__":
    sys.exit(regenerate())
