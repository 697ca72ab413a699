"""Command-line harness: seeded verification campaigns and one-off computations.

Exit status is 0 when no theorem-class inequality failed, 2 when one did and 1
on operational errors (bad flags, unreadable files).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bounds
from .entanglement import (
    OptimizerConfig,
    eof_minimize,
    eof_two_qubit,
    monotone_tilde,
    pure_entanglement,
)
from .errors import EntcontError, InvalidConfig, ParseError
from .metrics import bures_distance, entropy, fidelity, trace_distance
from .states import (
    BipartiteDims,
    BipartiteState,
    DensityMatrix,
    RngSeed,
    bell,
    perturb,
    perturb_pure,
    product,
    read_state,
    sample_density,
    sample_haar_pure,
    werner,
    write_state,
)

log = logging.getLogger("entcont")

COMMANDS = ("verify-fannes", "verify-pure", "verify-eof", "tightness", "compute", "demo-monotone")
MEASURES = ("entropy", "trace-distance", "fidelity", "bures", "pure-E", "eof-2q", "eof-min", "tilde")
VERIFY_DEFAULT_DIMS = {
    "verify-fannes": "2x1,4x1,8x1,16x1",
    "verify-pure": "2x2,2x4,4x4,4x8,8x8",
    "verify-eof": "2x2",
}


@dataclass
class CampaignConfig:
    command: str
    trials: int = 100
    dims: list = field(default_factory=lambda: [(2, 2)])
    perturb_amplitudes: list = field(default_factory=lambda: [0.05])
    seed: int = 0
    out_path: str | None = None
    format: str = "csv"
    provider: str = "oracle"
    chain: bool = False
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    workers: int = 1

    def validate(self) -> None:
        if self.command not in ("verify-fannes", "verify-pure", "verify-eof"):
            raise InvalidConfig(f"{self.command!r} is not a campaign command")
        if self.trials < 1:
            raise InvalidConfig("trials must be >= 1")
        if not self.dims or any(a < 1 or b < 1 for a, b in self.dims):
            raise InvalidConfig(f"bad dims {self.dims}")
        if not self.perturb_amplitudes or any(not 0 <= a <= 1 for a in self.perturb_amplitudes):
            raise InvalidConfig(f"amplitudes must lie in [0, 1], got {self.perturb_amplitudes}")
        if self.format not in ("csv", "json"):
            raise InvalidConfig(f"unknown format {self.format!r}")
        if self.command == "verify-eof":
            if self.provider == "oracle" and any((a, b) != (2, 2) for a, b in self.dims):
                raise InvalidConfig("the oracle provider only covers 2x2 dims")
            if any(a * b > self.optimizer.dim_cap for a, b in self.dims):
                raise InvalidConfig(f"dA*dB above the optimizer cap {self.optimizer.dim_cap}")


@dataclass
class CampaignSummary:
    total: int
    violations: int
    worst_slack: float
    regime_counts: dict
    wall_time: float
    open_question_failures: dict = field(default_factory=dict)
    failing_trials: list = field(default_factory=list)


# -- trials --------------------------------------------------------------------

def run_trial(command: str, dA: int, dB: int, amplitude: float, seed: int, stream: int,
              provider: str = "oracle", chain: bool = False,
              optimizer: OptimizerConfig | None = None) -> bounds.BoundReport:
    """One seeded trial; a pure function of its arguments."""
    rng = RngSeed(seed, stream).generator()
    tag = {"seed": seed, "stream": stream, "amplitude": amplitude}
    if command == "verify-fannes":
        d = dA * dB
        ancillas = (1, 2, d, 2 * d)
        rho = sample_density(d, int(rng.choice(ancillas)), rng)
        sigma = perturb(rho, amplitude, rng, ancilla_dim=int(rng.choice(ancillas)))
        return bounds.check_fannes(rho, sigma, **tag)
    if command == "verify-pure":
        psi = sample_haar_pure(dA * dB, rng)
        phi = sample_haar_pure(dA * dB, rng) if amplitude == 1.0 else perturb_pure(psi, amplitude, rng)
        return bounds.check_pure_continuity(psi, phi, BipartiteDims(dA, dB), **tag)
    if command == "verify-eof":
        dims = BipartiteDims(dA, dB)
        n = dims.total
        rho = BipartiteState(dims, sample_density(n, int(rng.integers(1, n + 1)), rng))
        sigma = BipartiteState(dims, perturb(rho.rho, amplitude, rng))
        return bounds.check_eof_continuity(rho, sigma, provider, chain, optimizer, **tag)
    raise InvalidConfig(f"unknown campaign command {command!r}")


def _trial_args(config: CampaignConfig):
    stream = 0
    for dA, dB in config.dims:
        for amp in config.perturb_amplitudes:
            for _ in range(config.trials):
                yield (config.command, dA, dB, amp, config.seed, stream,
                       config.provider, config.chain, config.optimizer)
                stream += 1


def _run_star(args):
    return run_trial(*args)


def run_campaign(config: CampaignConfig) -> tuple[CampaignSummary, list]:
    """Run every trial, write the report and return the summary plus the reports.

    Rows come out in trial-index order whatever ``workers`` is, so the report
    bytes depend only on the configuration.
    """
    config.validate()
    start = time.perf_counter()
    args = list(_trial_args(config))
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            reports = list(pool.map(_run_star, args, chunksize=max(1, len(args) // (8 * config.workers))))
    else:
        reports = [_run_star(a) for a in args]

    violations = 0
    open_failures: Counter = Counter()
    failing = []
    regimes = Counter()
    for rep in reports:
        regimes["restricted" if rep.regime_ok else "unrestricted"] += 1
        bad = rep.theorem_violations()
        if bad:
            violations += 1
            failing.append((rep.metadata.get("seed"), rep.metadata.get("stream"), [b.name for b in bad]))
        for r in [rep, *rep.children]:
            if not r.theorem and not r.satisfied:
                open_failures[r.name] += 1
    worst = min(r.slack for r in reports)
    summary = CampaignSummary(
        total=len(reports),
        violations=violations,
        worst_slack=worst,
        regime_counts=dict(regimes),
        wall_time=time.perf_counter() - start,
        open_question_failures=dict(sorted(open_failures.items())),
        failing_trials=failing,
    )
    if config.out_path:
        write_reports(reports, config.out_path, config.format)
        if config.chain and config.format == "csv":
            write_reports([c for r in reports for c in r.children], config.out_path + ".chain.csv", "csv")
    return summary, reports


def _row(rep: bounds.BoundReport) -> dict:
    row = rep.as_row()
    for key in ("lhs", "rhs", "slack", "distance"):
        if row[key] != "":
            row[key] = float(row[key])
    for key in ("dA", "dB", "seed", "stream"):
        if row[key] != "":
            row[key] = int(row[key])
    return row


def write_reports(reports, path: str, fmt: str = "csv") -> None:
    if fmt == "json":
        doc = []
        for rep in reports:
            row = _row(rep)
            if rep.children:
                row["children"] = [_row(c) for c in rep.children]
            doc.append(row)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=bounds.CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for rep in reports:
            writer.writerow(_row(rep))


# -- single computations ---------------------------------------------------------

def parse_named_state(text: str) -> BipartiteState:
    """``bell``, ``product``, ``maximally-mixed:d`` (or ``:dAxdB``), ``werner:p``, ``tightness:d:eps``."""
    parts = text.split(":")
    name = parts[0]
    try:
        if name == "bell" and len(parts) == 1:
            return bell()
        if name == "product" and len(parts) == 1:
            return product()
        if name == "maximally-mixed" and len(parts) == 2:
            dA, dB = _parse_pair(parts[1]) if "x" in parts[1] else (int(parts[1]), 1)
            return BipartiteState(BipartiteDims(dA, dB), DensityMatrix.maximally_mixed(dA * dB))
        if name == "werner" and len(parts) == 2:
            return werner(float(parts[1]))
        if name == "tightness" and len(parts) == 3:
            d = int(parts[1])
            return BipartiteState(BipartiteDims(d, 1), bounds.tightness_state(d, float(parts[2])))
    except ValueError as exc:
        raise ParseError(f"bad named state {text!r}: {exc}") from exc
    raise ParseError(f"unknown named state {text!r}")


def _pure_vector(state: BipartiteState) -> np.ndarray:
    w, v = np.linalg.eigh(state.mat)
    if w[-1] < 1 - 1e-8:
        raise InvalidConfig("measure needs a pure state")
    return v[:, -1]


def compute_single(state: BipartiteState, measure: str, other: BipartiteState | None = None,
                   optimizer: OptimizerConfig | None = None) -> float:
    if measure in ("trace-distance", "fidelity", "bures"):
        if other is None:
            raise InvalidConfig(f"{measure} needs a second state (--other or --other-in)")
        fn = {"trace-distance": trace_distance, "fidelity": fidelity, "bures": bures_distance}[measure]
        return fn(state.mat, other.mat)
    if measure == "entropy":
        return entropy(state.mat)
    if measure == "pure-E":
        return pure_entanglement(_pure_vector(state), state.dims)
    if measure == "tilde":
        return monotone_tilde(_pure_vector(state), state.dims)
    if measure == "eof-2q":
        return eof_two_qubit(state)
    if measure == "eof-min":
        return eof_minimize(state, optimizer).value
    raise InvalidConfig(f"unknown measure {measure!r}")


def format_value(x: float) -> str:
    # + 0.0 folds a negative zero into 0.0
    return f"{x + 0.0:#.10g}"


# -- argument parsing --------------------------------------------------------------

def _parse_pair(text: str) -> tuple[int, int]:
    a, _, b = text.lower().partition("x")
    return int(a), int(b)


def parse_dims(text: str) -> list[tuple[int, int]]:
    try:
        return [_parse_pair(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InvalidConfig(f"bad --dims {text!r}; expected dAxdB[,dAxdB...]") from exc


def parse_floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InvalidConfig(f"bad number list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="entcont", description=__doc__.splitlines()[0])
    p.add_argument("--command", required=True, choices=COMMANDS)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--dims", help="comma-separated dAxdB pairs")
    p.add_argument("--amplitudes", default="0.01,0.05,0.1,1.0",
                   help="perturbation amplitudes; 1.0 draws an independent state")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="report path")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--provider", choices=("oracle", "optimizer"), default="oracle")
    p.add_argument("--chain", action="store_true", help="attach proof-chain sub-reports (verify-eof)")
    p.add_argument("--restarts", type=int, default=OptimizerConfig.restarts)
    p.add_argument("--max-sweeps", type=int, default=OptimizerConfig.max_sweeps)
    p.add_argument("--tol", type=float, default=OptimizerConfig.tol_objective)
    p.add_argument("--state", help="named state (compute)")
    p.add_argument("--state-in", help="state file (compute)")
    p.add_argument("--state-out", help="write the compute state to this file")
    p.add_argument("--other", help="second named state for distances")
    p.add_argument("--other-in", help="second state file for distances")
    p.add_argument("--measure", choices=MEASURES)
    p.add_argument("--d-list", default="4,16,64,256", help="dimensions for the tightness table")
    p.add_argument("--epsilon", type=float, help="fixed-epsilon policy (tightness)")
    p.add_argument("--t", type=float, help="fixed trace-distance policy (tightness)")
    p.add_argument("--schmidt", default="0.5,0.5;0.9,0.1;1,0",
                   help="semicolon-separated squared Schmidt vectors (demo-monotone)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _optimizer(args) -> OptimizerConfig:
    return OptimizerConfig(restarts=args.restarts, max_sweeps=args.max_sweeps,
                           tol_objective=args.tol, seed=args.seed)


def _load(named, path) -> BipartiteState | None:
    if named and path:
        raise InvalidConfig("give a named state or a file, not both")
    if named:
        return parse_named_state(named)
    if path:
        return read_state(path)
    return None


def _cmd_campaign(args) -> int:
    config = CampaignConfig(
        command=args.command,
        trials=args.trials,
        dims=parse_dims(args.dims or VERIFY_DEFAULT_DIMS[args.command]),
        perturb_amplitudes=parse_floats(args.amplitudes),
        seed=args.seed,
        out_path=args.out,
        format=args.format,
        provider=args.provider,
        chain=args.chain,
        optimizer=_optimizer(args),
        workers=args.workers,
    )
    summary, _ = run_campaign(config)
    for seed, stream, names in summary.failing_trials:
        log.warning("theorem-class failure: seed=%s stream=%s links=%s", seed, stream, ",".join(names))
    print(f"command={config.command}")
    print(f"total={summary.total}")
    print(f"violations={summary.violations}")
    print(f"worst_slack={summary.worst_slack!r}")
    for k, v in sorted(summary.regime_counts.items()):
        print(f"regime_{k}={v}")
    for k, v in summary.open_question_failures.items():
        print(f"open_question_failures[{k}]={v}")
    print(f"wall_time={summary.wall_time:.3f}")
    return 2 if summary.violations else 0


def _cmd_tightness(args) -> int:
    d_list = [int(x) for x in args.d_list.split(",") if x.strip()]
    if not d_list:
        raise InvalidConfig("empty --d-list")
    if args.epsilon is None and args.t is None:
        args.t = 1.0
    rows, slope = bounds.tightness_table(d_list, epsilon=args.epsilon, t=args.t)
    records = [dict(asdict(r), fitted_slope=slope) for r in rows]
    if args.out:
        if args.format == "json":
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                json.dump({"rows": [asdict(r) for r in rows], "fitted_slope": slope}, fh, indent=1)
                fh.write("\n")
        else:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=list(records[0]), lineterminator="\n")
                w.writeheader()
                w.writerows(records)
    for r in rows:
        print(f"d={r.d} epsilon={r.epsilon!r} gap={r.gap!r} t={r.t!r} lower={r.lower!r}")
    print(f"fitted_slope={slope!r}")
    return 0


def _cmd_compute(args) -> int:
    state = _load(args.state, args.state_in)
    if state is None:
        raise InvalidConfig("compute needs --state or --state-in")
    if args.state_out:
        write_state(args.state_out, state)
    if args.measure:
        other = _load(args.other, args.other_in)
        print(format_value(compute_single(state, args.measure, other, _optimizer(args))))
    return 0


def _cmd_demo(args) -> int:
    rows = []
    for chunk in args.schmidt.split(";"):
        rec = bounds.proportionality_demo(parse_floats(chunk))
        rows.append({"schmidt": chunk.strip(), "s": rec.s, "tilde": rec.tilde,
                     "ratio": rec.ratio if rec.ratio_defined else None})
        ratio = format_value(rec.ratio) if rec.ratio_defined else "undefined"
        print(f"schmidt={chunk.strip()} s={format_value(rec.s)} tilde={format_value(rec.tilde)} ratio={ratio}")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            if args.format == "json":
                json.dump(rows, fh, indent=1)
                fh.write("\n")
            else:
                w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
                w.writeheader()
                w.writerows({k: ("" if v is None else v) for k, v in r.items()} for r in rows)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"tightness": _cmd_tightness, "compute": _cmd_compute, "demo-monotone": _cmd_demo}
    try:
        return handlers.get(args.command, _cmd_campaign)(args)
    except (EntcontError, OSError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
