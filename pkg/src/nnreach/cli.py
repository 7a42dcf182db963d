"""Command-line front end.

Subcommands ``reach-mlp``, ``reach-narma``, ``verify`` and ``sample``. Every
result file except ``report.json`` (which holds wall-clock timings) is a
deterministic function of the inputs and the seed.

Exit codes: 0 success / SAFE / no violations, 2 UNCERTAIN or containment
violations, 1 for I/O, parse and usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .intervals import CellBox
from .io import FileFormatError, StepMode, load_narma, load_network, load_scenario
from .narma import ReachTube, reach_narma
from .network import forward
from .reach import DEFAULT_MAX_CELLS, CellBudgetError, reach_mlp
from .safety import HalfSpace, SafetySpec, verify_tube
from .simulate import (
    check_containment,
    check_output_containment,
    sample_box,
    sample_trajectories,
    write_trajectories_csv,
)
from .svg import plot_boxes_2d, plot_tube

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FLAGGED = 2


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    arguments: dict
    cell_count: int
    tube_count: int
    timings: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def write(self, out_dir: Path) -> Path:
        path = out_dir / "report.json"
        self.outputs.append(str(path))
        path.write_text(json.dumps(asdict(self), indent=1) + "\n", encoding="utf-8")
        return path


def _num(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_tubes_csv(path: Path, lower: np.ndarray, upper: np.ndarray) -> None:
    _write_csv(
        path,
        ["cell_index", "dim", "lo", "hi"],
        ([c, d, _num(lower[c, d]), _num(upper[c, d])] for c in range(lower.shape[0]) for d in range(lower.shape[1])),
    )


def write_hull_csv(path: Path, box: CellBox) -> None:
    _write_csv(path, ["dim", "lo", "hi"], ([d, _num(iv.lo), _num(iv.hi)] for d, iv in enumerate(box.dims)))


def write_tube_csv(path: Path, tube: ReachTube) -> None:
    rows = []
    for k, h in enumerate(tube.hulls):
        rows.extend([k, d, _num(iv.lo), _num(iv.hi)] for d, iv in enumerate(h.dims))
    _write_csv(path, ["k", "dim", "lo", "hi"], rows)


def write_boxes_csv(path: Path, tube: ReachTube) -> None:
    def rows():
        for k, step in enumerate(tube.steps):
            for b in range(len(step)):
                for d in range(step.lower.shape[1]):
                    yield [k, b, d, _num(step.lower[b, d]), _num(step.upper[b, d])]

    _write_csv(path, ["k", "box", "dim", "lo", "hi"], rows())


def read_tube_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Per-step hull bounds from a ``tube.csv`` as ``(K, n)`` arrays."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    ks = max(int(r["k"]) for r in rows) + 1
    n = max(int(r["dim"]) for r in rows) + 1
    lo, hi = np.empty((ks, n)), np.empty((ks, n))
    for r in rows:
        lo[int(r["k"]), int(r["dim"])] = float(r["lo"])
        hi[int(r["k"]), int(r["dim"])] = float(r["hi"])
    return lo, hi


def _hull_arrays(tube: ReachTube) -> tuple[np.ndarray, np.ndarray]:
    return (
        np.array([s.lower.min(axis=0) for s in tube.steps]),
        np.array([s.upper.max(axis=0) for s in tube.steps]),
    )


def _out_dir(path: str | Path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- commands ----------------------------------------------------------------


def cmd_reach_mlp(
    net_path: str | Path,
    box: CellBox,
    counts: Sequence[int],
    out_dir: str | Path,
    *,
    threads: int = 1,
    widen_eps: float = 0.0,
    max_cells: int | None = DEFAULT_MAX_CELLS,
    samples: int = 0,
    seed: int = 0,
) -> RunReport:
    """Bound an MLP's outputs over ``box``; write tubes.csv, hull.csv, reach2d.svg."""
    out = _out_dir(out_dir)
    t0 = time.perf_counter()
    net = load_network(net_path)
    t1 = time.perf_counter()
    res = reach_mlp(net, box, counts, max_cells=max_cells, widen_eps=widen_eps, threads=threads)
    t2 = time.perf_counter()
    report = RunReport(
        "reach-mlp",
        {"model": str(net_path), "box": box.pairs(), "counts": list(counts), "widen_eps": widen_eps},
        cell_count=math.prod(counts),
        tube_count=len(res),
        timings={"load_s": t1 - t0, "reach_s": t2 - t1},
    )
    write_tubes_csv(out / "tubes.csv", res.lower, res.upper)
    write_hull_csv(out / "hull.csv", res.hull)
    report.outputs += [str(out / "tubes.csv"), str(out / "hull.csv")]
    points = None
    if samples:
        points = forward(net, sample_box(box, samples, seed))
        rep = check_output_containment(res, points)
        report.extra["samples"] = rep.to_dict()
    if net.output_dim >= 2:
        plot_boxes_2d(
            out / "reach2d.svg",
            res.lower,
            res.upper,
            points=points,
            title=f"{len(res)} reachtubes, partition {'x'.join(map(str, counts))}",
        )
        report.outputs.append(str(out / "reach2d.svg"))
    report.timings["write_s"] = time.perf_counter() - t2
    report.write(out)
    return report


def _scenario_overrides(scenario, counts, mode, max_boxes, horizon):
    if counts is not None:
        scenario = scenario.with_counts(counts)
    if mode == "union":
        if max_boxes is None:
            raise UsageError("--mode union needs --max-boxes")
        scenario = scenario.with_mode(StepMode.union(max_boxes))
    elif mode == "hull":
        scenario = scenario.with_mode(StepMode.hull())
    elif max_boxes is not None:
        if scenario.step_mode.kind != "union":
            raise UsageError("--max-boxes only applies with --mode union")
        scenario = scenario.with_mode(StepMode.union(max_boxes))
    if horizon is not None:
        scenario = scenario.with_horizon(horizon)
    return scenario


def cmd_reach_narma(
    model_path: str | Path,
    scenario_path: str | Path,
    out_dir: str | Path,
    *,
    counts: Sequence[int] | None = None,
    compare_counts: Sequence[Sequence[int]] = (),
    mode: str | None = None,
    max_boxes: int | None = None,
    horizon: int | None = None,
    overlay_samples: int = 0,
    seed: int = 0,
    write_boxes: bool = False,
    threads: int = 1,
    widen_eps: float = 0.0,
    max_cells: int | None = DEFAULT_MAX_CELLS,
) -> RunReport:
    """Reach tube of a NARMA model; write tube.csv (hulls), tube.svg, optional boxes.csv.

    Each entry of ``compare_counts`` runs the same scenario with another
    partition, writes ``tube_<M1>x<M2>.csv`` and adds its band to the plot.
    """
    out = _out_dir(out_dir)
    t0 = time.perf_counter()
    model = load_narma(model_path)
    scenario = _scenario_overrides(load_scenario(scenario_path, model), counts, mode, max_boxes, horizon)
    for c in compare_counts:
        if len(c) != model.width:
            raise UsageError(f"--compare-counts needs {model.width} values, got {len(c)}")
    t1 = time.perf_counter()
    kw = dict(max_cells=max_cells, widen_eps=widen_eps, threads=threads)
    tube = reach_narma(model, scenario, **kw)
    t2 = time.perf_counter()
    report = RunReport(
        "reach-narma",
        {
            "model": str(model_path),
            "scenario": str(scenario_path),
            "counts": list(scenario.partition_counts),
            "step_mode": asdict(scenario.step_mode),
            "horizon": scenario.horizon,
            "widen_eps": widen_eps,
        },
        cell_count=math.prod(scenario.partition_counts),
        tube_count=len(tube),
        timings={"load_s": t1 - t0, "reach_s": t2 - t1},
    )
    write_tube_csv(out / "tube.csv", tube)
    report.outputs.append(str(out / "tube.csv"))
    if write_boxes:
        write_boxes_csv(out / "boxes.csv", tube)
        report.outputs.append(str(out / "boxes.csv"))

    label = lambda cs: "x".join(str(c) for c in cs)  # noqa: E731
    runs = [(label(scenario.partition_counts), tube)]
    for c in compare_counts:
        ts = time.perf_counter()
        other = reach_narma(model, scenario.with_counts(c), **kw)
        report.timings[f"reach_{label(c)}_s"] = time.perf_counter() - ts
        path = out / f"tube_{label(c)}.csv"
        write_tube_csv(path, other)
        report.outputs.append(str(path))
        runs.append((label(c), other))
    # coarse bands first so finer ones are drawn on top
    runs.sort(key=lambda r: math.prod(int(x) for x in r[0].split("x")))

    trajs = []
    if overlay_samples:
        trajs = sample_trajectories(model, scenario, overlay_samples, seed)
        report.extra["samples"] = {lbl: check_containment(t, trajs).to_dict() for lbl, t in runs}
    bands = [(f"M = {lbl}", *_hull_arrays(t)) for lbl, t in runs]
    plot_tube(
        out / "tube.svg",
        bands,
        trajectories=[t.states for t in trajs],
        title=f"reachable set estimate, k = 0..{len(tube) - 1}",
    )
    report.outputs.append(str(out / "tube.svg"))
    report.timings["write_s"] = time.perf_counter() - t2
    report.write(out)
    return report


def parse_constraint(text: str) -> HalfSpace:
    """``"a1,a2,...:b"`` -> half-space ``a . x <= b``."""
    try:
        lhs, rhs = text.split(":")
        return HalfSpace([float(v) for v in lhs.split(",")], float(rhs))
    except ValueError as exc:
        raise UsageError(f"bad constraint {text!r}; expected 'a1,...,an:b'") from exc


def cmd_verify(
    model_path: str | Path,
    scenario_path: str | Path,
    *,
    constraints: Sequence[HalfSpace] = (),
    counts: Sequence[int] | None = None,
    mode: str | None = None,
    max_boxes: int | None = None,
    horizon: int | None = None,
    threads: int = 1,
    widen_eps: float = 0.0,
    max_cells: int | None = DEFAULT_MAX_CELLS,
    stream=None,
) -> int:
    """Print the verdict line; return 0 for SAFE and 2 for UNCERTAIN."""
    stream = sys.stdout if stream is None else stream
    model = load_narma(model_path)
    scenario = _scenario_overrides(load_scenario(scenario_path, model), counts, mode, max_boxes, horizon)
    spec = SafetySpec(tuple(constraints)) if constraints else scenario.safety
    if spec is None:
        raise UsageError("scenario has no 'safety' entry; pass --constraint")
    spec.check_dim(model.state_dim)
    tube = reach_narma(model, scenario, max_cells=max_cells, widen_eps=widen_eps, threads=threads)
    verdict = verify_tube(tube, spec)
    print(str(verdict), file=stream)
    return EXIT_OK if verdict.safe else EXIT_FLAGGED


def cmd_sample(
    model_path: str | Path,
    scenario_path: str | Path,
    count: int,
    seed: int,
    *,
    out_dir: str | Path | None = None,
    counts: Sequence[int] | None = None,
    mode: str | None = None,
    max_boxes: int | None = None,
    horizon: int | None = None,
    threads: int = 1,
    widen_eps: float = 0.0,
    max_cells: int | None = DEFAULT_MAX_CELLS,
    stream=None,
) -> int:
    """Simulate trajectories and check them against a fresh reach tube."""
    stream = sys.stdout if stream is None else stream
    if count < 1:
        raise UsageError(f"--count must be positive, got {count}")
    model = load_narma(model_path)
    scenario = _scenario_overrides(load_scenario(scenario_path, model), counts, mode, max_boxes, horizon)
    tube = reach_narma(model, scenario, max_cells=max_cells, widen_eps=widen_eps, threads=threads)
    trajs = sample_trajectories(model, scenario, count, seed)
    rep = check_containment(tube, trajs)
    summary = {"seed": seed, "counts": list(scenario.partition_counts), **rep.to_dict()}
    print(json.dumps(summary, sort_keys=True), file=stream)
    if out_dir is not None:
        out = _out_dir(out_dir)
        write_trajectories_csv(trajs, out / "trajectories.csv")
        (out / "containment.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return EXIT_OK if rep.ok else EXIT_FLAGGED


# -- argument parsing ----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _counts(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError(f"partition counts must be positive, got {text!r}")
    return vals


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _max_cells(text: str) -> int | None:
    if text.lower() == "none":
        return None
    return _positive(text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nnreach", description="Reachable-set estimation and safety verification for MLP and NARMA models.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, scenario=True):
        sp.add_argument("--model", required=True, help="network / NARMA model JSON file")
        if scenario:
            sp.add_argument("--scenario", required=True, help="scenario JSON file")
            sp.add_argument("--mode", choices=("hull", "union"), help="override the scenario's step mode")
            sp.add_argument("--max-boxes", type=_positive, help="box cap for union mode")
            sp.add_argument("--horizon", type=_positive, help="override the scenario's horizon")
        sp.add_argument("--counts", type=_counts, help="partition counts, e.g. 10,10")
        sp.add_argument("--threads", type=_positive, default=1)
        sp.add_argument("--widen-eps", type=float, default=0.0, help="pad every layer bound outward by this amount")
        sp.add_argument("--max-cells", type=_max_cells, default=DEFAULT_MAX_CELLS, help="cell budget ('none' lifts it)")

    r = sub.add_parser("reach-mlp", help="output reach set of an MLP over a box")
    common(r, scenario=False)
    r.add_argument("--box", nargs=2, type=float, action="append", metavar=("LO", "HI"), required=True,
                   help="input interval, once per input dimension")
    r.add_argument("--out", required=True)
    r.add_argument("--samples", type=int, default=0, help="overlay this many random outputs")
    r.add_argument("--seed", type=int, default=0)

    n = sub.add_parser("reach-narma", help="reach tube of a NARMA model")
    common(n)
    n.add_argument("--out", required=True)
    n.add_argument("--compare-counts", type=_counts, action="append", default=[],
                   help="extra partition to run and plot alongside")
    n.add_argument("--overlay-samples", type=int, default=0, metavar="N")
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--boxes", action="store_true", help="also write boxes.csv with every per-step box")

    v = sub.add_parser("verify", help="check a safety spec against the reach tube")
    common(v)
    v.add_argument("--constraint", action="append", default=[], metavar="A1,..,An:B",
                   help="half-space a.x <= b; replaces the scenario's safety entry")

    s = sub.add_parser("sample", help="simulate trajectories and check containment")
    common(s)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="directory for trajectories.csv and containment.json")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    common = dict(threads=args.threads, widen_eps=args.widen_eps, max_cells=args.max_cells)
    try:
        if args.command == "reach-mlp":
            box = CellBox.from_pairs(args.box)
            if args.counts is None:
                raise UsageError("reach-mlp needs --counts")
            counts = args.counts
            rep = cmd_reach_mlp(args.model, box, counts, args.out, samples=args.samples, seed=args.seed, **common)
            print(f"{rep.tube_count} tubes ({rep.cell_count} cells) -> {args.out}")
            bad = rep.extra.get("samples", {}).get("violations", 0)
            return EXIT_FLAGGED if bad else EXIT_OK
        scen = dict(counts=args.counts, mode=args.mode, max_boxes=args.max_boxes, horizon=args.horizon)
        if args.command == "reach-narma":
            rep = cmd_reach_narma(
                args.model, args.scenario, args.out, compare_counts=args.compare_counts,
                overlay_samples=args.overlay_samples, seed=args.seed, write_boxes=args.boxes, **scen, **common,
            )
            print(f"{rep.tube_count} steps, {rep.cell_count} cells per step -> {args.out}")
            bad = sum(r["violations"] for r in rep.extra.get("samples", {}).values())
            return EXIT_FLAGGED if bad else EXIT_OK
        if args.command == "verify":
            cons = [parse_constraint(c) for c in args.constraint]
            return cmd_verify(args.model, args.scenario, constraints=cons, **scen, **common)
        if args.command == "sample":
            return cmd_sample(args.model, args.scenario, args.count, args.seed, out_dir=args.out, **scen, **common)
    except (FileFormatError, UsageError, CellBudgetError, ValueError, OSError) as exc:
        print(f"nnreach: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
