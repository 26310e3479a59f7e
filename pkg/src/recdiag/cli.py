"""Command-line entry point: ``recdiag {run,compare,simulate,boundary,replay,datasets}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from .cusum import boundary_equation, solve_boundary_constant
from .errors import EXIT_CONFIG, EXIT_NUMERICAL, ConfigError, RecdiagError
from .io import BUNDLED
from .simgen import ScenarioSpec, Target

FORMATS = ("csv", "json", "svg", "png")

log = logging.getLogger("recdiag")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _formats(text: str) -> tuple[str, ...]:
    items = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in items if s not in FORMATS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s) {bad}; choose from {','.join(FORMATS)}")
    return items


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--schedule", help="circular | random:N | exhaustive (default: chosen from n)")
    p.add_argument("--seed", type=int, default=0, help="seed for random schedules")
    p.add_argument("--trim-alpha", type=float, default=0.0,
                   help="hide the first floor(alpha*n) steps in plots")
    p.add_argument("--cusum-alpha", type=float, default=0.01, help="CUSUM boundary level")
    p.add_argument("--method", choices=["resolve", "update"], default="resolve")
    p.add_argument("--grid", type=int, default=0, help="extra CUSUM export points on (0,1)")
    p.add_argument("--out", default="recdiag-out", help="output directory")
    p.add_argument("--format", dest="formats", type=_formats, default=("csv", "svg", "png"),
                   help=f"comma list from {','.join(FORMATS)}")


def _add_input_options(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="CSV file with a header row")
    src.add_argument("--dataset", choices=sorted(BUNDLED), help="bundled dataset")
    p.add_argument("--response", help="response column (required with --input)")
    p.add_argument("--id-column", help="column holding observation ids")
    icpt = p.add_mutually_exclusive_group()
    icpt.add_argument("--intercept", dest="intercept", action="store_true", default=True,
                      help="add a column of ones (default)")
    icpt.add_argument("--no-intercept", dest="intercept", action="store_false")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="recdiag", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="trace ensemble, CUSUM and diagnostics for one dataset")
    _add_input_options(run)
    _add_run_options(run)

    cmp_ = sub.add_parser("compare", help="overlay full data against row-deleted copies")
    _add_input_options(cmp_)
    _add_run_options(cmp_)
    cmp_.add_argument("--drop", action="append", required=True, metavar="ID1,ID2",
                      help="comma list of row ids to remove; repeat for several comparisons")

    sim = sub.add_parser("simulate", help="run simulated outlier scenarios")
    sim.add_argument("--scenario", required=True,
                     help="scenario JSON file or bundled scenario name")
    sim.add_argument("--targets", default=None,
                     help="comma list of none,x,y,both or 'all' (default: the scenario's target)")
    _add_run_options(sim)

    bnd = sub.add_parser("boundary", help="print the CUSUM boundary constant a for alpha")
    bnd.add_argument("--alpha", type=float, required=True)

    rep = sub.add_parser("replay", help="re-run a command from its manifest.json")
    rep.add_argument("manifest")
    rep.add_argument("--out", help="output directory (default: the recorded one)")

    sub.add_parser("datasets", help="list bundled datasets and scenarios")
    return parser


def bundled_scenarios() -> dict[str, Path]:
    root = resources.files("recdiag") / "data" / "scenarios"
    return {Path(str(f)).stem: Path(str(f)) for f in root.iterdir() if str(f).endswith(".json")}


def load_scenario(ref: str) -> ScenarioSpec:
    path = Path(ref)
    if not path.exists():
        scenarios = bundled_scenarios()
        if ref not in scenarios:
            raise ConfigError(f"no scenario file {ref!r} and no bundled scenario of that name "
                              f"(bundled: {', '.join(sorted(scenarios))})")
        path = scenarios[ref]
    return ScenarioSpec.loads(path.read_text(encoding="utf-8"))


def _config(args, **extra):
    from .pipeline import RunConfig  # defers matplotlib import

    return RunConfig(schedule=args.schedule, seed=args.seed, trim_alpha=args.trim_alpha,
                     cusum_alpha=args.cusum_alpha, method=args.method, grid=args.grid,
                     formats=tuple(args.formats), out=args.out, **extra)


def _input_fields(args) -> dict:
    return dict(input=args.input, dataset=args.dataset, response=args.response,
                id_column=args.id_column, intercept=args.intercept)


def _print_summary(name: str, result) -> None:
    fit = result.fit
    betas = ", ".join(f"{lab}={b:.6g}" for lab, b in zip(result.data.labels, fit.beta_hat))
    print(f"{name}: n={result.data.n} p={result.data.p} traces={len(result.ensemble.valid_traces)}"
          f"/{len(result.ensemble.traces)} sigma2={fit.sigma2_hat:.6g} r2={fit.r2:.6g} "
          f"crossing_rate={result.crossing_rate:.4g} [{betas}]")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        if args.command not in ("boundary", "datasets"):
            from .pipeline import replay, run_compare, run_pipeline, run_simulate
        if args.command == "boundary":
            a = solve_boundary_constant(args.alpha)
            print(f"a = {a:.6f}")
            log.info("residual of boundary equation: %.3e", boundary_equation(a, args.alpha))
        elif args.command == "datasets":
            for name, entry in sorted(BUNDLED.items()):
                print(f"dataset  {name:18s} response={entry.response:8s} {entry.description}")
            for name, path in sorted(bundled_scenarios().items()):
                print(f"scenario {name:18s} {json.loads(path.read_text())}")
        elif args.command == "run":
            _print_summary("run", run_pipeline(_config(args, **_input_fields(args))))
        elif args.command == "compare":
            drop_sets = [[s.strip() for s in d.split(",") if s.strip()] for d in args.drop]
            results = run_compare(_config(args, **_input_fields(args)), drop_sets)
            for name, res in results.items():
                _print_summary(name, res)
        elif args.command == "simulate":
            spec = load_scenario(args.scenario)
            targets = None
            if args.targets:
                targets = ([t.value for t in Target] if args.targets == "all"
                           else [s.strip() for s in args.targets.split(",")])
                bad = [t for t in targets if t not in {x.value for x in Target}]
                if bad:
                    raise ConfigError(f"unknown target(s) {bad}")
            results = run_simulate(_config(args, scenario=spec.to_dict()), targets)
            for name, res in results.items():
                _print_summary(name, res)
        elif args.command == "replay":
            res = replay(args.manifest, args.out)
            if isinstance(res, dict):
                for name, r in res.items():
                    _print_summary(name, r)
            else:
                _print_summary("run", res)
    except RecdiagError as exc:
        print(f"recdiag: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ArithmeticError, ValueError, FloatingPointError) as exc:
        print(f"recdiag: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
