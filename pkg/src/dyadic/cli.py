"""Batch command line: ``dyadic <command> [options]``.

Every run emits one JSON document (or, for ``enumerate --format jsonl``, a
header line followed by one record per line)::

    {"header": {...config, seed, version, generator...},
     "result": {...}, "status": "ok" | "failed",
     "metadata": {"timestamp": ..., "threads": ..., "backend": ...}}

Everything outside ``metadata`` is a pure function of the command line
(thread count excluded).  Exit codes: 0 success, 1 guard violation or failed
check, 2 usage error.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import io
import json
import os
import sys
import time
from fractions import Fraction
from importlib import resources

import jsonschema
import numpy as np

from . import __version__, _backend
from .chains import (
    BLOCK,
    CHAINS,
    EDGE,
    GENERATOR,
    MAX_GRID_K,
    ChainConfig,
    build_matrix,
    derive_seeds,
    run_trajectory,
)
from .combinatorics import K_CAP, count_report
from .errors import ConvergenceError, SizeGuardError
from .tiling import VERTICAL, TilingError, canonical_decode, strips

OUTPUT_DIR_ENV = "DYADIC_OUTPUT_DIR"
COMMANDS = ("count", "enumerate", "gap", "mix", "couple", "sample", "verify")
ENUM_SETS = ("all", "vertical", "horizontal", "both", "boundary", "upsilon", "edges")
MIX_REPORTS = ("time", "curve", "sandwich", "scaling", "statistic")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed (default 0)")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads (default 1)")
    common.add_argument("--out", default=argparse.SUPPRESS,
                        help=f"output file, '-' for stdout (default: ${OUTPUT_DIR_ENV}/<command>.json if set)")

    p = _Parser(prog="dyadic", description="Dyadic tilings: counts, chains, spectra, couplings, mixing.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None)
    p.add_argument("--verify-all", action="store_true", help="run every acceptance check (same as 'verify')")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    c = sub.add_parser("count", parents=[common], help="exact counts and ratios")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--cap", type=int, default=K_CAP, help="largest k the recurrence will evaluate")

    e = sub.add_parser("enumerate", parents=[common], help="dump tilings or the flip graph")
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--set", choices=ENUM_SETS, default="all")
    e.add_argument("--format", choices=("jsonl", "text"), default="jsonl")

    g = sub.add_parser("gap", parents=[common], help="spectral gap and related checks")
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--chain", choices=CHAINS, default=EDGE)
    g.add_argument("--tol", type=float, default=1e-12)
    g.add_argument("--max-iter", type=int, default=10**6)
    g.add_argument("--check", choices=("none", "recursion", "lower-bound", "all"), default="none")
    g.add_argument("--export-matrix", metavar="PATH", help="write exact 'i j p/q' triplets")

    m = sub.add_parser("mix", parents=[common], help="TV curves, mixing times, scaling")
    m.add_argument("--k", type=int, required=True)
    m.add_argument("--chain", choices=CHAINS, default=EDGE)
    m.add_argument("--what", choices=MIX_REPORTS, default="time")
    m.add_argument("--epsilon", type=float, default=0.25)
    m.add_argument("--start", help="canonical tiling string (default: vertical strips)")
    m.add_argument("--t-max", type=int, default=100)
    m.add_argument("--times", type=_int_list, default=[0, 10, 100])
    m.add_argument("--samples", type=int, default=10**6)
    m.add_argument("--random-starts", type=int, default=100)
    m.add_argument("--csv", metavar="PATH", help="also write the curve as CSV")

    cp = sub.add_parser("couple", parents=[common], help="coupling contraction survey")
    cp.add_argument("--k", type=int, required=True)
    cp.add_argument("--b", type=int, default=64)
    cp.add_argument("--exhaustive", action="store_true", help="all pairs (default for k <= 3)")
    cp.add_argument("--samples", type=int, default=20000)
    cp.add_argument("--case1a", type=int, default=1000, help="extra sampled pairs of the case-1a type")

    s = sub.add_parser("sample", parents=[common], help="simulate trajectories")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--chain", choices=CHAINS, default=EDGE)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--start", help="canonical tiling string (default: vertical strips)")
    s.add_argument("--chains", type=int, default=1, help="independent chains, seeds split from --seed")
    s.add_argument("--trace", choices=("vertical", "horizontal", "state"), default="vertical")
    s.add_argument("--trace-out", metavar="PATH", help="CSV of the first chain's trace")

    v = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    v.add_argument("--only", type=_int_list, default=None, help="comma-separated criterion numbers")
    return p


# -- validation and dispatch ------------------------------------------------------

def _need(cond: bool, message: str) -> None:
    if not cond:
        raise UsageError(message)


def _validate(a) -> None:
    _need(a.threads >= 1, "--threads must be >= 1")
    _need(0 <= a.seed < 2**64, "--seed must be a 64-bit unsigned integer")
    k = getattr(a, "k", None)
    if k is not None:
        _need(k >= 0, "--k must be non-negative")
    chain = getattr(a, "chain", EDGE)
    low = {EDGE: 1, BLOCK: 2}[chain]
    if a.command in ("gap", "sample") or (a.command == "mix" and a.what in ("time", "curve", "sandwich")):
        _need(k >= low, f"the {chain} chain needs k >= {low}")
    if a.command == "mix" and a.what in ("statistic", "scaling"):
        _need(k >= 2, f"'{a.what}' needs k >= 2")
    if a.command == "couple":
        _need(k >= 2, "coupling needs k >= 2")
        _need(a.b >= 1, "--b must be >= 1")
    if a.command == "enumerate":
        _need(k >= {"edges": 1, "boundary": 2, "upsilon": 2}.get(a.set, 0), f"set '{a.set}' needs larger k")
    if a.command == "mix":
        _need(0 < a.epsilon < 1, "--epsilon must lie in (0, 1)")
        _need(a.samples >= 1 and a.t_max >= 0, "sizes must be positive")
    if a.command == "sample":
        _need(a.steps >= 0 and a.chains >= 1, "--steps >= 0 and --chains >= 1 required")


def _start(a):
    if getattr(a, "start", None):
        try:
            t = canonical_decode(a.start)
        except TilingError as exc:
            raise UsageError(f"bad --start: {exc}")
        _need(t.k == a.k, f"--start has k={t.k}, expected {a.k}")
        return t
    return strips(a.k, VERTICAL)


def _cmd_count(a) -> tuple[dict, bool]:
    if a.k > a.cap:
        raise SizeGuardError(f"k={a.k} exceeds the recurrence cap {a.cap}")
    return count_report(a.k, a.cap), True


def _cmd_enumerate(a) -> tuple[dict, bool]:
    from . import enumeration as en

    idx = en.enumerate_tilings(a.k)
    if a.set == "edges":
        records = [{"i": i, "j": j, "m": m} for i, j, m in en.flip_graph(a.k).edges()]
    else:
        if a.set == "all":
            members = range(len(idx))
        elif a.set == "boundary":
            members = en.boundary_indices(a.k)
        elif a.set == "upsilon":
            members = sorted(idx.lookup(t) for t in en.upsilon_set(a.k))
        else:
            mask = {"vertical": idx.vertical, "horizontal": idx.horizontal,
                    "both": idx.vertical & idx.horizontal}[a.set]
            members = np.flatnonzero(mask).tolist()
        records = [{"index": int(i), "tiling": idx.encodings[i]} for i in members]
    return {"k": a.k, "set": a.set, "format": a.format, "count": len(records), "records": records}, True


def _cmd_gap(a) -> tuple[dict, bool]:
    from . import spectral

    P = build_matrix(a.chain, a.k)
    rep = spectral.spectral_gap(P, tol=a.tol, max_iter=a.max_iter, threads=a.threads, seed=a.seed).to_dict()
    rep.pop("threads")
    rep.pop("backend")
    out, ok = {"spectral": rep}, True
    if a.check in ("recursion", "all") and a.k >= 3:
        r = spectral.verify_gap_recursion(a.k, seed=a.seed, threads=a.threads)
        out["recursion"] = {key: val for key, val in r.to_dict().items() if key != "reports"}
        ok &= r.holds and r.comparison_holds
    if a.check in ("lower-bound", "all") and a.chain == EDGE and a.k >= 2:
        r = spectral.lower_bound_check(a.k, threads=a.threads)
        out["lower_bound"] = r.to_dict()
        ok &= r.holds and r.formula_agrees
    if a.export_matrix:
        with open(a.export_matrix, "w") as fh:
            P.write_triplets(fh)
        out["matrix_entries"] = P.nnz + P.dim
    return out, bool(ok)


def _cmd_mix(a) -> tuple[dict, bool]:
    from . import mixing

    if a.what == "time":
        return mixing.mixing_time(a.k, a.chain, a.epsilon, a.seed, a.random_starts).to_dict(), True
    if a.what == "curve":
        curve = mixing.exact_tv_curve(a.k, a.chain, _start(a), a.t_max)
        if a.csv:
            with open(a.csv, "w") as fh:
                curve.write_csv(fh)
        return curve.to_dict(), True
    if a.what == "sandwich":
        s = mixing.sandwich(a.k, a.chain, a.epsilon)
        return s, bool(s["holds"])
    if a.what == "scaling":
        return mixing.scaling_report(a.k, a.threads).to_dict(), True
    est = mixing.statistic_tv_curve(a.k, a.times, a.samples, a.seed, a.chain, _start(a))
    if a.csv:
        with open(a.csv, "w") as fh:
            fh.write("t,tv,ci\n")
            for e in est:
                fh.write(f"{e.t},{e.tv!r},{e.ci_half_width!r}\n")
    return {"k": a.k, "chain": a.chain, "start": _start(a).encode(),
            "points": [e.to_dict() for e in est]}, True


def _cmd_couple(a) -> tuple[dict, bool]:
    from .coupling import DistanceParams, contraction_survey

    exhaustive = True if a.exhaustive else None
    rep = contraction_survey(a.k, DistanceParams(a.b), a.samples, a.seed, exhaustive, a.case1a)
    return rep, bool(rep["ok"])


def _cmd_sample(a) -> tuple[dict, bool]:
    if a.chain == EDGE and a.k > MAX_GRID_K:
        raise SizeGuardError(f"simulation supports k <= {MAX_GRID_K}")
    if a.chain == BLOCK and a.k > 5:
        raise SizeGuardError("block dynamics simulation supports k <= 5")
    start = _start(a)
    seeds = [a.seed] if a.chains == 1 else derive_seeds(a.seed, a.chains)
    runs = []
    for n, seed in enumerate(seeds):
        stat = a.trace if a.trace != "state" or a.k <= 4 else None
        tr = run_trajectory(ChainConfig(a.k, a.chain, seed), start, a.steps, stat)
        row = {"seed": seed, "final": tr.final.encode(),
               "final_vertical": tr.final.has_vertical_bisector(),
               "final_horizontal": tr.final.has_horizontal_bisector()}
        if tr.trace is not None and a.trace != "state":
            row[f"{a.trace}_fraction"] = float(np.mean(tr.trace))
        runs.append(row)
        if n == 0 and a.trace_out and tr.trace is not None:
            with open(a.trace_out, "w") as fh:
                tr.write_csv(fh)
    return {"k": a.k, "chain": a.chain, "steps": a.steps, "start": start.encode(), "runs": runs}, True


def _cmd_verify(a) -> tuple[dict, bool]:
    from .acceptance import run_all

    crit = run_all(a.only, echo=lambda line: print(line, file=sys.stderr))
    return {"criteria": [c.to_dict() for c in crit]}, all(c.passed is not False for c in crit)


HANDLERS = {"count": _cmd_count, "enumerate": _cmd_enumerate, "gap": _cmd_gap, "mix": _cmd_mix,
            "couple": _cmd_couple, "sample": _cmd_sample, "verify": _cmd_verify}


# -- JSON -------------------------------------------------------------------------

def _default(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, Fraction):
        return f"{o.numerator}/{o.denominator}"
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o).__name__}")


def normalise(doc) -> dict:
    """Round-trip through JSON so keys are strings and values plain types."""
    return json.loads(json.dumps(doc, default=_default, sort_keys=True))


def dumps(doc) -> str:
    return json.dumps(doc, default=_default, sort_keys=True, indent=2) + "\n"


def load_schema(name: str) -> dict:
    return json.loads(resources.files("dyadic").joinpath("schemas", f"{name}.json").read_text())


def validate_document(doc: dict) -> None:
    """Check the envelope and the command-specific result against the shipped schemas."""
    jsonschema.validate(doc, load_schema("envelope"))
    jsonschema.validate(doc["result"], load_schema(doc["header"]["command"]))


def execute(argv: list[str]) -> tuple[int, dict]:
    """Run a command in-process; returns ``(exit_code, document)``."""
    code, doc, _ = _run(argv)
    return code, doc


def _run(argv: list[str]) -> tuple[int, dict, str | None]:
    t0 = time.perf_counter()
    try:
        if "--verify-all" in argv and not set(argv) & set(HANDLERS):
            # the meta-flag stands in for the verify subcommand, options included
            argv = ["verify" if x == "--verify-all" else x for x in argv]
        a = build_parser().parse_args(argv)
        if a.command is None:
            raise UsageError("dyadic: a command is required (or --verify-all)")
        _validate(a)
    except UsageError as exc:
        return 2, {"error": str(exc)}, None
    config = {key: val for key, val in sorted(vars(a).items())
              if key not in ("seed", "threads", "out", "verify_all", "command", "csv", "trace_out", "export_matrix")}
    header = {"tool": "dyadic", "version": __version__, "command": a.command, "config": config,
              "seed": a.seed, "generator": GENERATOR}
    meta = {"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(), "threads": a.threads,
            "backend": _backend.BACKEND}
    try:
        result, ok = HANDLERS[a.command](a)
        code, status = (0, "ok") if ok else (1, "failed")
    except UsageError as exc:
        return 2, {"error": str(exc)}, None
    except (SizeGuardError, ConvergenceError, AssertionError, ValueError) as exc:
        result, code, status = {"error": f"{type(exc).__name__}: {exc}"}, 1, "error"
    meta["elapsed_seconds"] = round(time.perf_counter() - t0, 3)
    doc = normalise({"header": header, "result": result, "status": status, "metadata": meta})
    return code, doc, a.out


def _target(out: str | None, command: str, suffix: str) -> str | None:
    if out == "-":
        return None
    if out:
        return out
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base:
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, f"{command}{suffix}")
    return None


def write_document(doc: dict, out: str | None = None, stream=None) -> None:
    command = doc["header"]["command"]
    fmt = doc["result"].get("format") if command == "enumerate" else None
    buf = io.StringIO()
    if fmt and doc["status"] == "ok":
        records = doc["result"].pop("records")
        if fmt == "jsonl":
            buf.write(json.dumps({k: doc[k] for k in ("header", "result", "status", "metadata")}, sort_keys=True) + "\n")
            for r in records:
                buf.write(json.dumps(r, sort_keys=True) + "\n")
        else:
            for r in records:
                buf.write(r["tiling"] + "\n" if "tiling" in r else f"{r['i']} {r['j']} {r['m']}\n")
            print(dumps(doc), end="", file=sys.stderr)
        suffix = ".jsonl" if fmt == "jsonl" else ".txt"
    else:
        buf.write(dumps(doc))
        suffix = ".json"
    path = _target(out, command, suffix)
    if path is None:
        (stream or sys.stdout).write(buf.getvalue())
    else:
        with open(path, "w") as fh:
            fh.write(buf.getvalue())


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    code, doc, out = _run(argv)
    if "header" not in doc:
        print(doc.get("error", "usage error"), file=sys.stderr)
        build_parser().print_usage(sys.stderr)
        return code
    write_document(doc, out)
    if code:
        print(f"dyadic: {doc['result'].get('error', 'checks failed')}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
