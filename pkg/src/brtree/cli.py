"""Command-line front end: ``brtree sample | moments | verify | experiment``.

Exit codes: 0 when every requested check passes, 1 when a check fails, 2 for bad
arguments or parameters outside a formula's domain, 3 for I/O errors and 4 when a
sampled tree fails its internal consistency check.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time

import numpy as np

from . import __version__, config
from .errors import BRTreeError, InvariantViolation, ResourceLimitError, UsageError
from .formulas import harmonic, moment_report
from .montecarlo import (SWEEPS, clt_check, convergence_sweep, estimate_moments,
                         strong_law_trajectory)
from .records import make_record, write_records
from .shuffle import (ProbabilityVector, ShufflePermutation, permutation_from_digits,
                      sample_digit_word, sample_forward_shuffle)
from .statistics import KINDS, Statistic
from .tree import permutation_from_tree, tree_from_permutation
from . import verification

log = logging.getLogger("brtree")

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_IO, EXIT_INVARIANT = 0, 1, 2, 3, 4


# ---- argument helpers ---------------------------------------------------------------

def _add_model(p: argparse.ArgumentParser):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--p", help="pile weights, comma separated (must sum to 1 within 1e-12)")
    g.add_argument("--a", type=int, help="uniform shuffle with A piles")
    g.add_argument("--urt", action="store_true", help="uniform recursive tree")
    p.add_argument("--normalize", action="store_true", help="rescale --p to sum to 1")


def _add_output(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", "-o", help="write here instead of stdout")


def _model(args, required=True):
    """(ProbabilityVector or None, description dict); None means the URT."""
    if getattr(args, "urt", False):
        return None, {"model": "urt"}
    if args.a is not None:
        pv = ProbabilityVector.uniform(args.a)
        return pv, {"model": "uniform", "a": args.a}
    if args.p is not None:
        pv = ProbabilityVector.parse(args.p, normalize=args.normalize)
        return pv, {"model": "p", "p": pv.tolist()}
    if required:
        raise UsageError("choose a model with --p, --a or --urt")
    return None, {}


def _resolved(args, **extra) -> dict:
    d = {k: v for k, v in vars(args).items() if k not in ("func", "output", "verbose")}
    d.update(extra)
    d["defaults"] = config.as_dict()
    return d


def _int_list(text: str) -> list:
    return [int(float(x)) for x in text.split(",") if x.strip()]


def _log_grid(lo: int, hi: int, points: int) -> list:
    return sorted({int(round(x)) for x in np.geomspace(lo, hi, points)})


# ---- sample ------------------------------------------------------------------------

def cmd_sample(args) -> tuple:
    pv, model = _model(args)
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    if args.method == "forward" and pv is None:
        raise UsageError("--method forward needs --p or --a")
    rng = np.random.default_rng(args.seed)
    cfg = _resolved(args, model=model)
    records, ok = [], True
    for i in range(args.count):
        word = None
        if pv is None:
            perm = ShufflePermutation(rng.permutation(np.arange(2, args.n + 1)))
        elif args.method == "forward":
            perm = sample_forward_shuffle(args.n, pv, rng)
        else:
            word = sample_digit_word(args.n, pv, rng)
            perm = permutation_from_digits(word)
        out = {"index": i, "n": args.n}
        if word is not None and args.digits:
            out["digits"] = word.digits.tolist()
        if args.emit in ("perm", "both"):
            out["permutation"] = perm.format()
        if args.emit in ("tree", "both"):
            tree = tree_from_permutation(perm)
            out["parents"] = tree.parents.tolist()
            if args.emit == "both":
                # the inverse map must give the permutation back
                out["consistent"] = permutation_from_tree(tree) == perm
                ok &= out["consistent"]
        records.append(make_record("sample", cfg, args.seed, ["tree-from-permutation"], out))
    if not ok:
        raise InvariantViolation("a sampled tree does not map back to its permutation")
    return records, True


# ---- moments -----------------------------------------------------------------------

def _stats_for(args) -> list:
    if args.stat == "all":
        return [Statistic(kind, args.k if kind in ("atleast", "exactly") else 0) for kind in KINDS]
    return [Statistic.parse(args.stat, args.k)]


def cmd_moments(args) -> tuple:
    pv, model = _model(args)
    cfg = _resolved(args, model=model)
    records = []
    for st in _stats_for(args):
        if args.a is not None:
            rep = moment_report(st, args.n, a=args.a)
        elif pv is None:
            rep = moment_report(st, args.n, urt=True)
        else:
            rep = moment_report(st, args.n, p=pv)
        records.append(make_record("moments", cfg, None, rep.provenance, rep.to_dict()))
    return records, True


# ---- verify ------------------------------------------------------------------------

TV_DEFAULT_P = ((0.5, 0.3, 0.2), (0.1, 0.2, 0.3, 0.4), (0.15, 0.15, 0.15, 0.15, 0.2, 0.2))


def _verify_cells(args, cfg) -> tuple:
    pv, _ = _model(args, required=False)
    models = None if pv is None else [pv]
    if args.stat == "urt":
        cells = verification.verify_urt(min(args.nmax, 8), args.kmax, cap=args.cap)
    else:
        cells = verification.verify_grid(args.nmax, args.kmax, models=models, cap=args.cap)
    records = [make_record("verify", cfg, None, [c.check], c.to_dict()) for c in cells]
    failed = [c for c in cells if not c.passed]
    log.info("%d cells, %d failed, %d skipped", len(cells), len(failed),
             sum(c.skipped is not None for c in cells))
    return records, not failed


def _verify_tv(args, cfg) -> tuple:
    pv, _ = _model(args, required=False)
    if args.n is not None and pv is not None:
        jobs = [(args.n, pv)]
    elif args.n is not None or pv is not None:
        raise UsageError("tvbound takes both --n and a model, or neither for the default set")
    else:
        jobs = [(n, ProbabilityVector.uniform(a)) for n in range(3, 8) for a in range(n, 13)]
        jobs += [(n, ProbabilityVector(q)) for q in TV_DEFAULT_P for n in range(3, 8)]
    records, ok = [], True
    for n, q in jobs:
        try:
            checks = verification.verify_tv(n, q, cap=args.cap)
        except ResourceLimitError as exc:
            log.warning("skipped n=%d %s: %s", n, q, exc)
            continue
        for c in checks:
            ok &= c.passed
            tag = "tv-bound-uniform" if c.bound_kind == "uniform" else "tv-bound-general"
            records.append(make_record("verify", cfg, None, [tag], c.to_dict()))
    return records, ok


def _verify_covariance(args, cfg) -> tuple:
    pv, _ = _model(args, required=False)
    n = 8 if args.n is None else args.n
    k = 2 if args.k is None else args.k
    pv = ProbabilityVector.uniform(2) if pv is None else pv
    rep, ok = verification.verify_covariance(n, k, pv, cap=args.cap)
    payload = rep.to_dict()
    payload["passed"] = ok
    return [make_record("verify", cfg, None, ["indicator-pair-moment"], payload)], ok


def cmd_verify(args) -> tuple:
    cfg = _resolved(args)
    if args.stat == "tvbound":
        return _verify_tv(args, cfg)
    if args.stat == "covariance":
        return _verify_covariance(args, cfg)
    return _verify_cells(args, cfg)


# ---- experiment --------------------------------------------------------------------

def _exp_moments(args, cfg) -> tuple:
    pv, _ = _model(args)
    st = Statistic.parse(args.stat, args.k)
    rep = estimate_moments(args.n, pv, st, args.samples, args.seed, args.workers,
                           urt=pv is None)
    tags = [f"{st.kind}-mean"]
    ok = True
    z = rep.mean_z()
    if args.max_z is not None and z is not None:
        ok = abs(z) <= args.max_z
    d = rep.to_dict()
    d["max_z"] = args.max_z
    return [make_record("experiment moments", cfg, args.seed, tags, d)], ok


def _exp_clt(args, cfg) -> tuple:
    pv, _ = _model(args)
    rep = clt_check(args.n, pv, args.k, args.samples, args.seed, urt=pv is None,
                    workers=args.workers, threshold=args.threshold, diagnostic=args.diagnostic)
    tags = ["atleast-mean", "atleast-variance", "wasserstein-bound"]
    return [make_record("experiment clt", cfg, args.seed, tags, rep.to_dict())], rep.passed is not False


def _exp_stronglaw(args, cfg) -> tuple:
    pv, _ = _model(args)
    if pv is None:
        raise UsageError("the strong-law trajectory needs --p or --a")
    grid = _log_grid(max(10, args.k + 2), args.nmax, args.points)
    rep = strong_law_trajectory(args.k, pv, grid, seed=args.seed, tolerance=args.tol)
    return [make_record("experiment stronglaw", cfg, args.seed, ["exactly-limit"], rep.to_dict())], rep.passed


def _exp_sweep(args, cfg) -> tuple:
    q = args.quantity
    if args.grid:
        grid = _int_list(args.grid)
    elif q in ("branches-vs-a", "branch-variance-vs-a", "depth-vs-a", "tv-uniform"):
        lo = max(args.n or 1, 10) if q == "tv-uniform" else 10
        grid = [int(x) for x in np.unique(np.geomspace(lo, args.amax,
                                                      int(math.log10(args.amax / lo)) + 1).round())]
    else:
        grid = [int(x) for x in 10 ** np.arange(1, int(math.log10(args.nmax)) + 1)]
    pv, _ = _model(args, required=False)
    rep = convergence_sweep(q, grid, n=args.n, a=args.a,
                            p=None if args.a is not None else pv, k=args.k)
    d = rep.to_dict()
    d["description"] = SWEEPS[q]
    if q in ("branches-vs-a", "depth-vs-a") and args.n:
        d["harmonic"] = harmonic(args.n - 1)
    return [make_record("experiment sweep", cfg, None, [q], d)], True


def cmd_experiment(args) -> tuple:
    cfg = _resolved(args)
    return {"moments": _exp_moments, "clt": _exp_clt, "stronglaw": _exp_stronglaw,
            "sweep": _exp_sweep}[args.kind](args, cfg)


# ---- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="brtree",
                                 description="Recursive trees from riffle-shuffle permutations.")
    ap.add_argument("--version", action="version", version=f"brtree {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", parents=[common], help="draw permutations and their trees")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--emit", choices=("perm", "tree", "both"), default="both")
    s.add_argument("--method", choices=("inverse", "forward"), default="inverse",
                   help="digit sort (inverse) or cut-and-interleave (forward)")
    s.add_argument("--digits", action="store_true", help="include the digit word")
    _add_model(s)
    _add_output(s)
    s.set_defaults(func=cmd_sample)

    m = sub.add_parser("moments", parents=[common], help="closed-form means and variances")
    m.add_argument("--stat", default="all", help=f"one of {', '.join(KINDS)} or all")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--k", type=int, default=1)
    _add_model(m)
    _add_output(m)
    m.set_defaults(func=cmd_moments)

    v = sub.add_parser("verify", parents=[common], help="closed forms against exhaustive enumeration")
    v.add_argument("--stat", choices=("grid", "urt", "tvbound", "covariance"), default="grid")
    v.add_argument("--n", type=int)
    v.add_argument("--k", type=int)
    v.add_argument("--nmax", type=int, default=config.VERIFY_NMAX)
    v.add_argument("--kmax", type=int, default=config.VERIFY_KMAX)
    v.add_argument("--cap", type=int, help="enumeration cap (default from BRTREE_ENUM_CAP)")
    _add_model(v)
    _add_output(v)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("experiment", parents=[common], help="Monte Carlo runs and limit sweeps")
    e.add_argument("kind", choices=("moments", "clt", "stronglaw", "sweep"))
    e.add_argument("--stat", default="branches")
    e.add_argument("--n", type=int)
    e.add_argument("--k", type=int, default=1)
    e.add_argument("--samples", type=int, default=10_000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--workers", type=int, default=None)
    e.add_argument("--max-z", type=float, default=None,
                   help="fail when the mean is more than this many standard errors off")
    e.add_argument("--threshold", type=float, default=config.KS_THRESHOLD)
    e.add_argument("--diagnostic", action="store_true", help="report KS without a verdict")
    e.add_argument("--nmax", type=int, default=10**6)
    e.add_argument("--amax", type=int, default=10**6)
    e.add_argument("--points", type=int, default=13)
    e.add_argument("--tol", type=float, default=0.005)
    e.add_argument("--quantity", choices=sorted(SWEEPS), default="branches-vs-a")
    e.add_argument("--grid", help="explicit comma-separated sweep grid")
    _add_model(e)
    _add_output(e)
    e.set_defaults(func=cmd_experiment)
    return ap


def _needs_n(args):
    if args.command == "experiment" and args.kind in ("moments", "clt") and args.n is None:
        raise UsageError(f"experiment {args.kind} needs --n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="brtree: %(levelname)s: %(message)s", stream=sys.stderr)
    if getattr(args, "workers", None) is None and hasattr(args, "workers"):
        args.workers = config.default_workers()
    t0 = time.perf_counter()
    try:
        _needs_n(args)
        records, ok = args.func(args)
    except InvariantViolation as exc:
        print(f"brtree: internal check failed: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (BRTreeError, ValueError) as exc:
        print(f"brtree: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.output:
            with open(args.output, "w", newline="") as fh:
                write_records(records, fh, args.format)
        else:
            write_records(records, sys.stdout, args.format)
    except OSError as exc:
        print(f"brtree: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    log.info("%s done in %.2fs", args.command, time.perf_counter() - t0)
    if not ok:
        print("brtree: one or more checks failed", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
