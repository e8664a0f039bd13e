"""Run every experiment at its default resolution and collect CSV and SVG output.

    python3 scripts/reproduce_figures.py --out results/ [--only rho,lens-map] [--quick]

``--quick`` swaps in the coarse golden-test grids, for a fast end-to-end check.
Set BIPHOTON_THREADS to cap the worker pool.
"""
import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from biphoton.cli import main as cli_main  # noqa: E402
from biphoton.experiments import EXPERIMENTS  # noqa: E402

HEATMAPS = {"pattern", "spectral-density", "phase-map", "angular-map", "sweep-gamma-r12", "lens-map"}


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--only", help="comma-separated experiment names")
    parser.add_argument("--quick", action="store_true", help="use the coarse golden-test grids")
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = args.only.split(",") if args.only else list(EXPERIMENTS)
    extra = {}
    if args.quick:
        from golden_cases import GOLDEN_CASES

        extra = GOLDEN_CASES
    worst = 0
    for name in names:
        cmd = [name, *extra.get(name, []), "-o", str(out / f"{name}.csv")]
        if name in HEATMAPS:
            cmd += ["--svg", str(out / f"{name}.svg")]
        status = cli_main(cmd)
        print(f"{name}: exit {status}", file=sys.stderr)
        worst = max(worst, status)
    return worst


if __name__ == "__main__":
    sys.exit(main())
