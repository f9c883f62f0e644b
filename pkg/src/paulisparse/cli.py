"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 learner abort
(anchor failure), 3 property failure in ``verify``.

Options can also come from a JSON file given with ``--config``; flags on the
command line override it, and it overrides built-in defaults.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from xml.sax.saxutils import escape

import numpy as np

from . import __version__, zoo
from .learner import AnchorError, aligned_distance, learn_l1_bounded, learn_nearly_sparse
from .lcu import LcuSpec, amplified_block, effective_block, gate_count_estimate, success_probability
from .metrics import d_optphase, diamond_upper, distance_report, restricted_diamond_mm
from .pauli import PauliString, decompose, dumps_jsonl, read_jsonl, synthesize, write_jsonl
from .rng import stream
from .shadows import BellObservable, SnapshotBatch, collect, estimate_all, evaluate, median_of_means, mom_batches
from .sim import UnitaryOracle, bell_sample, digits_to_labels, write_shot_log

EXIT_OK, EXIT_USAGE, EXIT_ABORT, EXIT_PROPERTY = 0, 1, 2, 3
VERSION = f"paulisparse v{__version__}"
BENCH_COLUMNS = [
    "n", "s", "eps", "m1", "m2", "total_queries",
    "aligned_l1_error", "restricted_diamond", "diamond_upper", "wall_time",
]


# checked after any --config file is merged, so the file may supply them
REQUIRED = {
    "synthesize": ("input",),
    "bell-sample": ("seed",),
    "shadow": ("observables", "seed"),
    "learn": ("seed",),
    "lcu": ("input",),
    "metrics": ("a", "b"),
    "bench": ("seed",),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# operator resolution
# ---------------------------------------------------------------------------

def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def resolve_operator(text: str, n: int | None = None, params: dict | None = None) -> np.ndarray:
    """``id``, ``pauli:XZ``, ``file:coeffs.jsonl``, ``npy:op.npy`` or a zoo family name."""
    params = dict(params or {})
    if n is not None:
        params.setdefault("n", n)
    if text in ("id", "identity"):
        return zoo.build("identity", n=params.get("n", 1))
    if text.startswith("pauli:"):
        return PauliString.from_label(text[6:]).to_matrix()
    if text.startswith("file:"):
        return synthesize(read_jsonl(text[5:]))
    if text.startswith("npy:"):
        return np.load(text[4:])
    try:
        return zoo.build(text, **params)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"cannot build operator {text!r}: {exc}") from exc


def _family_operator(args) -> np.ndarray:
    if getattr(args, "input", None):
        return resolve_operator(args.input if ":" in args.input else "file:" + args.input)
    if not args.family:
        raise UsageError("give --family or --in")
    return resolve_operator(args.family, args.n, _parse_params(args.param))


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _config_record(args) -> dict:
    # fields that never change the numbers are left out so outputs compare byte-for-byte
    skip = {"func", "config", "workers", "out", "coeffs_out", "junit"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(obj, path=None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")


def _matrix_json(m: np.ndarray) -> dict:
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def run_decompose(args) -> int:
    coeffs = decompose(_family_operator(args))
    if args.out:
        write_jsonl(coeffs, args.out)
    else:
        sys.stdout.write(dumps_jsonl(coeffs))
    return EXIT_OK


def run_synthesize(args) -> int:
    op = synthesize(read_jsonl(args.input))
    if args.out:
        np.save(args.out, op)
    else:
        _emit({"version": VERSION, "matrix": _matrix_json(op)})
    return EXIT_OK


def run_zoo(args) -> int:
    if args.action == "list":
        sys.stdout.write("\n".join(zoo.FAMILIES) + "\n")
        return EXIT_OK
    if not args.name:
        raise UsageError("zoo build needs a family name")
    params = _parse_params(args.param)
    if args.n is not None:
        params.setdefault("n", args.n)
    coeffs = decompose(resolve_operator(args.name, None, params))
    if args.out:
        write_jsonl(coeffs, args.out)
    else:
        sys.stdout.write(dumps_jsonl(coeffs))
    return EXIT_OK


def run_bell_sample(args) -> int:
    u = _family_operator(args)
    oracle = UnitaryOracle(u)
    name = "bell-sample"
    digits = bell_sample(oracle.choi_copies(args.shots), stream(args.seed, name), args.shots)
    if args.out:
        write_shot_log(args.out, digits, args.seed, name)
    else:
        labels, counts = np.unique(digits_to_labels(digits), return_counts=True)
        _emit({
            "version": VERSION, "seed": args.seed, "stream": name, "shots": args.shots,
            "queries": oracle.queries, "counts": dict(zip(labels.tolist(), counts.tolist())),
        })
    return EXIT_OK


def _parse_observables(text: str) -> list[BellObservable]:
    out = []
    for item in text.split(","):
        parts = item.strip().split(":")
        if parts[0] == "M" and len(parts) == 2:
            out.append(BellObservable("M", parts[1]))
        elif parts[0] in ("R", "I") and len(parts) == 3:
            out.append(BellObservable(parts[0], parts[1], parts[2]))
        else:
            raise UsageError(f"bad observable {item!r}; use M:s, R:s:t or I:s:t")
    return out


def run_shadow(args) -> int:
    obs = _parse_observables(args.observables)
    name = "shadow"
    if args.load_shadows:
        batch = SnapshotBatch.load(args.load_shadows)
        K = mom_batches(args.delta, len(obs))
        values = median_of_means(evaluate(batch, obs), K)
        values = np.atleast_1d(values)
        m, backend, queries = len(batch), "archive", 0
    else:
        u = _family_operator(args)
        oracle = UnitaryOracle(u)
        state = oracle.choi_copies(args.m)
        rng = stream(args.seed, name)
        if args.save_shadows:
            batch = collect(state, args.m, rng, stream=name)
            batch.save(args.save_shadows)
            K = mom_batches(args.delta, len(obs))
            values = np.atleast_1d(median_of_means(evaluate(batch, obs), K))
            backend = "shots"
        else:
            est = estimate_all(state, obs, args.m, args.delta, rng, backend=args.backend)
            values, K, backend = est.values, est.batches, est.backend
        m, queries = args.m, oracle.queries
    _emit({
        "version": VERSION, "config": _config_record(args), "m": m, "batches": K, "backend": backend,
        "queries": queries,
        "estimates": [{**o.to_dict(), "value": float(v)} for o, v in zip(obs, values)],
    }, args.out)
    return EXIT_OK


def _learn_once(u, mode, s, eps, delta, l1, rng, backend):
    oracle = UnitaryOracle(u)
    if mode == "sparse":
        rep = learn_nearly_sparse(oracle, s, eps, delta, rng, backend=backend)
    else:
        rep = learn_l1_bounded(oracle, l1, eps, delta, rng, backend=backend)
    return rep, oracle


def run_learn(args) -> int:
    u = _family_operator(args)
    l1 = args.l1
    if args.mode == "l1" and l1 is None:
        raise UsageError("--mode l1 needs --l1")
    try:
        rep, oracle = _learn_once(u, args.mode, args.s, args.eps, args.delta, l1, stream(args.seed, "learn"), args.backend)
    except AnchorError as exc:
        sys.stderr.write(f"learner aborted: {exc}\n")
        return EXIT_ABORT
    v = synthesize(rep.alpha_hat)
    truth = decompose(u)
    out = json.loads(rep.to_json())
    out.update({
        "version": VERSION,
        "run_config": _config_record(args),
        "queries_counted": oracle.queries,
        "aligned_l1_error": aligned_distance(rep.alpha_hat, truth, 1),
        "aligned_l2_error": aligned_distance(rep.alpha_hat, truth, 2),
        "restricted_diamond": restricted_diamond_mm(u, v),
        "diamond_upper": diamond_upper(u, v),
    })
    _emit(out, args.out)
    if args.coeffs_out:
        write_jsonl(rep.alpha_hat, args.coeffs_out)
    return EXIT_OK


def run_lcu(args) -> int:
    coeffs = read_jsonl(args.input)
    spec = LcuSpec(coeffs, gamma=args.gamma)
    blk = effective_block(spec)
    report = {
        "version": VERSION,
        "config": _config_record(args),
        "a": spec.a,
        "ancillas": spec.m,
        "support": spec.support,
        "success_probability": success_probability(spec),
        "block_error": float(np.max(np.abs(spec.a * blk - synthesize(coeffs)))),
        "gate_counts": gate_count_estimate(spec),
        "effective_block": _matrix_json(blk),
    }
    if args.target:
        u = resolve_operator(args.target, coeffs.n)
        amp = amplified_block(spec, args.rounds)
        report["amplified_distance"] = d_optphase(u, amp)[0]
        report["amplified_block"] = _matrix_json(amp)
    _emit(report, args.out)
    return EXIT_OK


def run_metrics(args) -> int:
    params = _parse_params(args.param)
    u = resolve_operator(args.a, args.n, params)
    v = resolve_operator(args.b, args.n, params)
    if u.shape != v.shape:
        raise UsageError(f"operators have shapes {u.shape} and {v.shape}")
    _emit({"version": VERSION, "config": _config_record(args), **distance_report(u, v).to_dict()}, args.out)
    return EXIT_OK


def _parse_sweep(items) -> dict:
    out = {}
    for item in items or []:
        k, _, vals = item.partition("=")
        if not vals:
            raise UsageError(f"--sweep expects key=v1,v2,..., got {item!r}")
        out[k] = [json.loads(x) for x in vals.split(",")]
    return out


def _bench_row(job):
    family, n, s, eps, delta, seed, index, params = job
    u = resolve_operator(family, n, params)
    t0 = time.perf_counter()
    rep, _ = _learn_once(u, "sparse", s, eps, delta, None, stream(seed, "bench", index), "auto")
    wall = time.perf_counter() - t0
    v = synthesize(rep.alpha_hat)
    return {
        "n": int(math.log2(u.shape[0])), "s": s, "eps": eps, "m1": rep.m1, "m2": rep.m2,
        "total_queries": rep.total_queries,
        "aligned_l1_error": aligned_distance(rep.alpha_hat, decompose(u), 1),
        "restricted_diamond": restricted_diamond_mm(u, v),
        "diamond_upper": diamond_upper(u, v),
        "wall_time": wall,
    }


def run_bench(args) -> int:
    sweep = _parse_sweep(args.sweep)
    eps_list = sweep.get("eps", [args.eps])
    s_list = sweep.get("s", [args.s])
    n_list = sweep.get("n", [args.n])
    params = _parse_params(args.param)
    jobs = []
    for n in n_list:
        for s in s_list:
            for eps in eps_list:
                jobs.append((args.family, n, int(s), float(eps), args.delta, args.seed, len(jobs), params))
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            rows = list(pool.map(_bench_row, jobs))
    else:
        rows = [_bench_row(j) for j in jobs]
    buf = io.StringIO()
    buf.write(f"# {VERSION} config={json.dumps(_config_record(args), sort_keys=True)}\n")
    w = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        if args.fixed_time:
            r["wall_time"] = 0.0
        w.writerow({k: (f"{v:.10g}" if isinstance(v, float) else v) for k, v in r.items()})
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def _run_criterion(job):
    from . import acceptance

    number, seed = job
    fn = acceptance.CRITERIA[number - 1]
    return fn(seed)


def _junit(results) -> str:
    fails = sum(not r.passed for r in results)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<testsuite name="paulisparse-verify" tests="{len(results)}" failures="{fails}">',
    ]
    for r in results:
        name = escape(f"criterion_{r.number}_{r.title.replace(' ', '_')}", {'"': "&quot;"})
        lines.append(f'  <testcase classname="verify" name="{name}" time="{r.seconds:.3f}">')
        if not r.passed:
            msg = escape(json.dumps(r.detail, default=str), {'"': "&quot;"})
            lines.append(f'    <failure message="{msg}"/>')
        lines.append("  </testcase>")
    lines.append("</testsuite>")
    return "\n".join(lines) + "\n"


def run_verify(args) -> int:
    from . import acceptance

    only = sorted(int(x) for x in args.only.split(",")) if args.only else list(range(1, 13))
    if any(not 1 <= x <= 12 for x in only):
        raise UsageError("--only takes criterion numbers 1..12")
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            results = list(pool.map(_run_criterion, [(x, args.seed) for x in only]))
    else:
        results = acceptance.run_all(args.seed, only=set(only))
    for r in results:
        sys.stderr.write(r.line() + "\n")
    summary = {
        "version": VERSION,
        "seed": args.seed,
        "passed": all(r.passed for r in results),
        "criteria": [
            {"number": r.number, "title": r.title, "passed": r.passed, "detail": r.detail} for r in results
        ],
    }
    _emit(summary, args.out)
    if args.junit:
        with open(args.junit, "w") as fh:
            fh.write(_junit(results))
    return EXIT_OK if summary["passed"] else EXIT_PROPERTY


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_operator_args(p):
    p.add_argument("--family", help="zoo family, 'id', or 'pauli:LABEL'")
    p.add_argument("--n", type=int, help="qubit count for the family")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="family parameter (repeatable)")
    p.add_argument("--in", dest="input", help="coefficient file (JSONL) instead of a family")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="paulisparse", description="Learn and verify Pauli-sparse unitaries.")
    p.add_argument("--version", action="version", version=VERSION)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def cmd(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="JSON file of option defaults")
        sp.set_defaults(func=func)
        return sp

    sp = cmd("decompose", run_decompose, "Pauli coefficients of an operator")
    _add_operator_args(sp)
    sp.add_argument("--out")

    sp = cmd("synthesize", run_synthesize, "dense operator from a coefficient file")
    sp.add_argument("--in", dest="input")
    sp.add_argument("--out", help=".npy output path")

    sp = cmd("zoo", run_zoo, "example families")
    sp.add_argument("action", choices=["build", "list"])
    sp.add_argument("name", nargs="?")
    sp.add_argument("--n", type=int)
    sp.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    sp.add_argument("--out")

    sp = cmd("bell-sample", run_bell_sample, "Bell-basis samples of a Choi state")
    _add_operator_args(sp)
    sp.add_argument("--shots", type=int, default=1000)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")

    sp = cmd("shadow", run_shadow, "classical-shadow estimates of Bell observables")
    _add_operator_args(sp)
    sp.add_argument("--observables", help="comma list of M:s, R:s:t, I:s:t")
    sp.add_argument("--m", type=int, default=10000)
    sp.add_argument("--delta", type=float, default=0.05)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--backend", choices=["auto", "shots", "gaussian"], default="auto")
    sp.add_argument("--save-shadows")
    sp.add_argument("--load-shadows")
    sp.add_argument("--out")

    sp = cmd("learn", run_learn, "learn a unitary from Choi-state queries")
    _add_operator_args(sp)
    sp.add_argument("--mode", choices=["sparse", "l1"], default="sparse")
    sp.add_argument("--s", type=int, default=4)
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--delta", type=float, default=0.1)
    sp.add_argument("--l1", type=float)
    sp.add_argument("--backend", choices=["auto", "shots", "gaussian"], default="auto")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.add_argument("--coeffs-out")

    sp = cmd("lcu", run_lcu, "block-encode a coefficient file")
    sp.add_argument("--in", dest="input")
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--target", help="operator to compare the amplified block against")
    sp.add_argument("--rounds", type=int)
    sp.add_argument("--out")

    sp = cmd("metrics", run_metrics, "distances between two operators")
    sp.add_argument("--a")
    sp.add_argument("--b")
    sp.add_argument("--n", type=int)
    sp.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    sp.add_argument("--out")

    sp = cmd("bench", run_bench, "sweep the learner and write CSV")
    sp.add_argument("--family", default="rotprod")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--s", type=int, default=4)
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--delta", type=float, default=0.1)
    sp.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    sp.add_argument("--sweep", action="append", default=[], metavar="KEY=V1,V2")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--fixed-time", action="store_true", help="write wall_time as 0 for byte-identical output")
    sp.add_argument("--out")

    sp = cmd("verify", run_verify, "run the acceptance criteria")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--only", help="comma list of criterion numbers")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out")
    sp.add_argument("--junit")
    return p


def _load_config(path: str, sp: argparse.ArgumentParser) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"{path}:1: config must be a JSON object")
    known = {a.dest for a in sp._actions}
    out = {}
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest not in known or dest in ("help", "config"):
            line = next((i + 1 for i, ln in enumerate(text.splitlines()) if f'"{key}"' in ln), 1)
            raise UsageError(f"{path}:{line}: unknown option {key!r}")
        out[dest] = value
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_help()
            return EXIT_USAGE
        if args.config:
            sp = parser._subparsers._group_actions[0].choices[args.command]
            sp.set_defaults(**_load_config(args.config, sp))
            args = parser.parse_args(argv)
        missing = [d for d in REQUIRED.get(args.command, ()) if getattr(args, d, None) is None]
        if missing:
            flags = ", ".join("--" + ("in" if d == "input" else d.replace("_", "-")) for d in missing)
            raise UsageError(f"{args.command}: missing required option(s) {flags}")
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
