"""Command-line front end.

    twinsmooth solve-pell --d 7 --cap 1000
    twinsmooth enumerate --b 5 --out t5.jsonl
    twinsmooth search-delta --b 113 --delta-max 1000000 --bits-max 128 \\
        --out s0.jsonl --checkpoint s0.ckpt --shard 0/4 --resume
    twinsmooth verify s0.jsonl

Every flag can also come from a key=value file given with --config; flags on
the command line win.  Exit status: 0 on success (also with zero findings),
1 on I/O failure or when `verify` rejects a record, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import sys
from functools import partial

from . import arith, jobs, lehmer, pell, search
from .arith import SmoothnessBound, factor_with_bound, is_probable_prime, primes_up_to
from .search import SearchConfig

log = logging.getLogger("twinsmooth")

DELTA_BLOCK = 64
VERIFY_DEFAULT_BOUND = 1 << 20


class UsageError(Exception):
    pass


def parse_int(text: str) -> int:
    """Integers, optionally written as a^b or a**b (e.g. 2^258)."""
    t = str(text).strip().replace("_", "")
    for op in ("**", "^"):
        if op in t:
            base, _, exp = t.partition(op)
            return int(base) ** int(exp)
    return int(t)


def parse_cap(text: str) -> int | None:
    if str(text).strip().lower() in ("inf", "none", "infinity"):
        return None
    return parse_int(text)


def _int_arg(text: str) -> int:
    try:
        return parse_int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def _cap_arg(text: str) -> int | None:
    try:
        return parse_cap(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer or 'inf': {text!r}") from None


def _shard_arg(text: str) -> tuple[int, int]:
    try:
        return jobs.parse_shard(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected <i>/<n> with 0 <= i < n, got {text!r}") from None


# -- parser -----------------------------------------------------------------

def _bound(p, required=True):
    p.add_argument("--b", type=_int_arg, required=required, help="smoothness bound B")


def _bits(p):
    p.add_argument("--bits-min", type=_int_arg, default=2, help="lower bit size of the target window")
    p.add_argument("--bits-max", type=_int_arg, default=256, help="upper bit size of the target window")


def _lifting(p):
    p.add_argument("--n-max", type=_int_arg, default=12, help="largest solution index to lift to")
    p.add_argument("--powers-of-two-only", action="store_true",
                   help="lift only to indices 2^k (the only ones whose pair can sum to a prime)")


def _output(p, shardable=True):
    p.add_argument("--out", help="append JSONL results here (default: stdout)")
    p.add_argument("--checkpoint", help="checkpoint file, rewritten after every work item")
    p.add_argument("--resume", action="store_true", help="continue from --checkpoint")
    if shardable:
        p.add_argument("--shard", type=_shard_arg, default=(0, 1), metavar="I/N",
                       help="process shard I of N (0-based)")
    p.add_argument("--workers", type=_int_arg, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twinsmooth",
                                     description="Twin smooth integers from Pell equations.")
    sub = parser.add_subparsers(dest="command", required=True)

    def cmd(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="key=value file with default flags")
        p.add_argument("-v", "--verbose", action="count", default=0)
        return p

    p = cmd("sieve-twins", "list twin B-smooth pairs in [lo, hi] by sieving")
    _bound(p)
    p.add_argument("--lo", type=_int_arg, default=1)
    p.add_argument("--hi", type=_int_arg, required=True)
    p.add_argument("--segment", type=_int_arg, default=arith.SEGMENT_SIZE)
    _output(p)

    p = cmd("solve-pell", "fundamental solution of x^2 - D y^2 = 1")
    p.add_argument("--d", type=_int_arg, required=True)
    p.add_argument("--cap", type=_cap_arg, default=None, help="upper bound on x (default: none)")

    p = cmd("enumerate", "all twin B-smooth pairs (small B only)")
    _bound(p)
    p.add_argument("--cap", type=_cap_arg, default=None, help="upper bound on x (default: none)")
    _output(p)

    p = cmd("search-high-order", "sieve small twins w and keep smooth m_n(w), n >= s")
    _bound(p)
    _bits(p)
    p.add_argument("--s", type=_int_arg, default=2, help="smallest solution index")
    p.add_argument("--segment", type=_int_arg, default=arith.SEGMENT_SIZE)
    _output(p)

    p = cmd("search-delta", "solve the equations with the smallest coefficients")
    _bound(p)
    _bits(p)
    p.add_argument("--delta-max", type=_int_arg, required=True)
    p.add_argument("--cap", type=_cap_arg, default=None, help="upper bound on x (default: 2^(bits-max+1)+1)")
    _lifting(p)
    _output(p)

    p = cmd("search-small-primes", "solve equations whose coefficient has exactly k prime factors")
    _bound(p)
    _bits(p)
    p.add_argument("--k", type=_int_arg, required=True)
    p.add_argument("--delta-lo", type=_int_arg, required=True)
    p.add_argument("--delta-hi", type=_int_arg, required=True)
    p.add_argument("--cap", type=_cap_arg, default=None, help="upper bound on x (default: 2^(bits-max+1)+1)")
    _lifting(p)
    _output(p)

    p = cmd("lift", "check later solutions of the equations behind given pairs")
    _bound(p)
    _bits(p)
    p.add_argument("--m", type=_int_arg, action="append", default=[], help="a twin pair (m, m+1); repeatable")
    p.add_argument("--from", dest="from_file", help="lift every pair listed in this results file")
    _lifting(p)
    _output(p)

    p = cmd("chm", "Conrey-Holmstrom-McLaughlin expansion of a seed set")
    _bound(p)
    p.add_argument("--seeds", help="comma-separated m values (default: all twin pairs with m < B)")
    p.add_argument("--rounds", type=_int_arg, default=10)
    _output(p, shardable=False)

    p = cmd("verify", "recheck every record of a results file")
    p.add_argument("paths", nargs="+")
    _bound(p, required=False)
    return parser


def _config_tokens(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Turn the --config file (if any) into argv tokens placed before the real flags."""
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None or not argv:
        return []
    sub = next((a for a in parser._actions if isinstance(a, argparse._SubParsersAction)), None)
    subparser = sub.choices.get(argv[0]) if sub else None
    if subparser is None:
        return []
    flags = {}
    for action in subparser._actions:
        for opt in action.option_strings:
            flags[opt] = action
    tokens = []
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            opt = "--" + key.strip().replace("_", "-")
            action = flags.get(opt)
            if action is None or opt == "--config":
                raise UsageError(f"{path}:{lineno}: unknown key {key.strip()!r} for {argv[0]}")
            value = value.strip()
            if isinstance(action, argparse._StoreTrueAction):
                if value.lower() in ("1", "true", "yes", "on"):
                    tokens.append(opt)
            elif isinstance(action, argparse._AppendAction):
                tokens.extend(itertools.chain.from_iterable((opt, v.strip()) for v in value.split(",")))
            else:
                tokens.extend([opt, value])
    return tokens


# -- work items (module level so worker processes can unpickle them) --------

def _sieve_item(bound: SmoothnessBound, seg: tuple[int, int]) -> jobs.ItemResult:
    lo, hi = seg
    recs = [search.make_record(m, bound, "sieve", 0) for m in arith.sieve_twin_smooth(lo, hi, bound)]
    return jobs.ItemResult(recs, hi)


def _enum_item(bound: SmoothnessBound, cap: int | None, delta: int) -> jobs.ItemResult:
    found = lehmer.twins_for_delta(delta, bound, cap)
    if found is None:
        return jobs.ItemResult([], delta, [delta])
    return jobs.ItemResult([search.make_record(t.m, bound, "enumeration", 0, t) for t in found], delta)


def _delta_block(cfg: SearchConfig, strategy: str, block: list[int]) -> jobs.ItemResult:
    recs = []
    for delta in block:
        recs.extend(search.process_delta(delta, cfg, strategy))
    return jobs.ItemResult(recs, block[-1])


def _high_order_item(cfg: SearchConfig, item: tuple[int, int, int]) -> jobs.ItemResult:
    n, lo, hi = item
    return jobs.ItemResult(search.high_order_segment(n, lo, hi, cfg), {"n": n, "w": hi})


def _lift_item(cfg: SearchConfig, delta: int) -> jobs.ItemResult:
    fund = pell.fundamental_solution(2 * delta)
    m1 = (fund.x - 1) // 2
    if not arith.is_b_smooth(m1 * (m1 + 1), cfg.bound):
        return jobs.ItemResult([], delta)
    rec = search.make_record(m1, cfg.bound, "lift", cfg.b_min,
                             lehmer.CoefficientTriple(delta, fund.x, fund.y, 1))
    return jobs.ItemResult(list(search.lift_solutions(rec, cfg)), delta)


class _ChmState:
    """Round 0 emits the seeds, round r the elements new in the r-th expansion.

    Rounds depend on each other, so after a resume the skipped rounds are
    replayed in memory before the first one that still has to be written.
    """

    def __init__(self, bound: SmoothnessBound, seeds: list[int]):
        self.bound = bound
        self.seeds = seeds
        self.S = set(seeds)
        self.frontier = set(seeds)
        self.rounds = 0

    def _expand(self) -> set[int]:
        new = search.chm_round(self.S, self.frontier)
        self.S |= new
        self.frontier = new
        self.rounds += 1
        return new

    def __call__(self, rnd: int) -> jobs.ItemResult:
        if rnd == 0:
            new = set(self.seeds)
        else:
            while self.rounds < rnd - 1:
                self._expand()
            new = self._expand()
        recs = [search.make_record(m, self.bound, "chm", 0) for m in sorted(new)]
        return jobs.ItemResult(recs, rnd)


# -- commands ---------------------------------------------------------------

def _search_config(args, **extra) -> SearchConfig:
    try:
        return SearchConfig(bound=primes_up_to(args.b), b_min=args.bits_min, b_max=args.bits_max,
                            **extra)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _bound_of(args) -> SmoothnessBound:
    try:
        return primes_up_to(args.b)
    except arith.InvalidBoundError as exc:
        raise UsageError(str(exc)) from None


def _run(args, job: jobs.JobSpec, items, process) -> int:
    if args.resume and not args.checkpoint:
        raise UsageError("--resume needs --checkpoint")
    if args.checkpoint and not args.out:
        raise UsageError("--checkpoint needs --out")
    out = args.out if args.out else sys.stdout
    try:
        summary = jobs.run_job(job, items, process, out, args.checkpoint, args.resume,
                               args.workers)
    except jobs.ConfigMismatchError as exc:
        raise UsageError(str(exc)) from None
    print(f"{job.strategy}: {summary.items} work items, {summary.written} new records, "
          f"{summary.duplicates} duplicates", file=sys.stderr)
    if summary.unresolved:
        print(f"unresolved deltas (solution above cap): {len(summary.unresolved)}", file=sys.stderr)
    return 0


def cmd_sieve_twins(args) -> int:
    bound = _bound_of(args)
    if args.lo < 1 or args.lo > args.hi:
        raise UsageError(f"need 1 <= lo <= hi, got [{args.lo}, {args.hi}]")
    lo, hi = jobs.partition(args.lo, args.hi, *args.shard)
    job = jobs.JobSpec("sieve", {"b": args.b, "lo": args.lo, "hi": args.hi,
                                 "segment": args.segment}, args.shard)
    return _run(args, job, jobs.segments(lo, hi, args.segment), partial(_sieve_item, bound))


def cmd_solve_pell(args) -> int:
    try:
        sol = pell.fundamental_solution(args.d, args.cap)
    except pell.NotApplicableError:
        print(f"NotApplicable: D={args.d} is a perfect square")
        return 0
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if sol is None:
        print(f"ExceedsCap: the fundamental solution has x > {args.cap}")
    else:
        print(f"x={sol.x} y={sol.y}")
    return 0


def cmd_enumerate(args) -> int:
    bound = _bound_of(args)
    total = (1 << bound.t) - 1
    lo, hi = jobs.partition(0, total - 1, *args.shard)
    items = itertools.islice(lehmer.enumerate_q_prime(bound), lo, hi + 1)
    job = jobs.JobSpec("enumeration", {"b": args.b, "cap": args.cap}, args.shard)
    return _run(args, job, items, partial(_enum_item, bound, args.cap))


def _delta_items(bound: SmoothnessBound, lo: int, hi: int):
    return jobs.blocks((d for d in lehmer.enumerate_q_prime(bound, hi) if d >= lo), DELTA_BLOCK)


def cmd_search_delta(args) -> int:
    cfg = _search_config(args, x_cap=args.cap, delta_max=args.delta_max, n_lift_max=args.n_max,
                         powers_of_two_only=args.powers_of_two_only)
    lo, hi = jobs.partition(1, args.delta_max, *args.shard)
    job = jobs.JobSpec("small-coefficient", _params(args, "b", "bits_min", "bits_max", "delta_max",
                                                    "cap", "n_max", "powers_of_two_only"), args.shard)
    return _run(args, job, _delta_items(cfg.bound, lo, hi),
                partial(_delta_block, cfg, "small-coefficient"))


def cmd_search_small_primes(args) -> int:
    cfg = _search_config(args, x_cap=args.cap, k=args.k, delta_lo=args.delta_lo,
                         delta_hi=args.delta_hi, n_lift_max=args.n_max,
                         powers_of_two_only=args.powers_of_two_only)
    if args.k < 1 or args.delta_lo > args.delta_hi:
        raise UsageError("need k >= 1 and delta-lo <= delta-hi")
    lo, hi = jobs.partition(args.delta_lo, args.delta_hi, *args.shard)
    job = jobs.JobSpec("small-primes", _params(args, "b", "bits_min", "bits_max", "k", "delta_lo",
                                               "delta_hi", "cap", "n_max", "powers_of_two_only"),
                       args.shard)
    items = jobs.blocks(search.small_prime_deltas(cfg.bound, args.k, lo, hi), DELTA_BLOCK)
    return _run(args, job, items, partial(_delta_block, cfg, "small-primes"))


def cmd_search_high_order(args) -> int:
    cfg = _search_config(args, s=args.s) if args.s >= 2 else None
    if cfg is None:
        raise UsageError("--s must be >= 2")

    def items():
        for n, w_max in search.high_order_plan(cfg):
            lo, hi = jobs.partition(1, w_max, *args.shard)
            for seg_lo, seg_hi in jobs.segments(lo, hi, args.segment):
                yield n, seg_lo, seg_hi

    job = jobs.JobSpec("high-order", _params(args, "b", "bits_min", "bits_max", "s", "segment"),
                       args.shard)
    return _run(args, job, items(), partial(_high_order_item, cfg))


def cmd_lift(args) -> int:
    cfg = _search_config(args, n_lift_max=args.n_max, powers_of_two_only=args.powers_of_two_only)
    ms = list(args.m)
    if args.from_file:
        ms.extend(int(d["m"]) for d in jobs.read_lines(args.from_file))
    if not ms:
        raise UsageError("give at least one --m or a --from file")
    deltas = []
    for m in ms:
        try:
            d = lehmer.triple_from_pair(m, cfg.bound).delta
        except lehmer.NotTwinSmoothError as exc:
            raise UsageError(str(exc)) from None
        if d not in deltas:
            deltas.append(d)
    lo, hi = jobs.partition(0, len(deltas) - 1, *args.shard)
    job = jobs.JobSpec("lift", {**_params(args, "b", "bits_min", "bits_max", "n_max",
                                          "powers_of_two_only"), "deltas": [str(d) for d in deltas]},
                       args.shard)
    return _run(args, job, deltas[lo:hi + 1], partial(_lift_item, cfg))


def cmd_chm(args) -> int:
    bound = _bound_of(args)
    if args.seeds:
        seeds = sorted({parse_int(s) for s in args.seeds.split(",") if s.strip()})
    else:
        seeds = search.default_chm_seeds(bound)
    for m in seeds:
        if m < 1 or not arith.is_b_smooth(m * (m + 1), bound):
            raise UsageError(f"seed {m} is not a twin {bound.B}-smooth pair")
    state = _ChmState(bound, seeds)
    job = jobs.JobSpec("chm", {"b": args.b, "seeds": [str(s) for s in seeds], "rounds": args.rounds})
    args.workers = 1  # rounds depend on each other
    return _run(args, job, range(args.rounds + 1), state)


def _params(args, *names) -> dict:
    return {name: getattr(args, name) for name in names}


# -- verify -----------------------------------------------------------------

def verify_record(d: dict, bound: SmoothnessBound | None = None) -> dict:
    """Recompute everything about one result line and compare with what it states.

    Only `m` is required; any other field present is checked against the
    recomputed value.
    """
    m = int(d["m"])
    checks: dict[str, bool] = {}
    if bound is None:
        stated = int(d["smoothness"]) if "smoothness" in d else VERIFY_DEFAULT_BOUND
        bound = primes_up_to(max(stated, 2))
    fm, fm1 = factor_with_bound(m, bound), factor_with_bound(m + 1, bound)
    report = {"m": str(m), "bits": m.bit_length(), "bound": bound.B}
    checks["smooth"] = m >= 1 and fm.complete and fm1.complete
    if not checks["smooth"]:
        report.update(ok=False, checks=checks)
        return report
    smoothness = max(fm.largest_prime, fm1.largest_prime)
    checks["factor_product"] = fm.value == m and fm1.value == m + 1
    if "m_factors" in d:
        checks["m_factors"] = [list(map(int, pe)) for pe in d["m_factors"]] == fm.as_lists()
    if "m1_factors" in d:
        checks["m1_factors"] = [list(map(int, pe)) for pe in d["m1_factors"]] == fm1.as_lists()
    if "bits" in d:
        checks["bits"] = int(d["bits"]) == m.bit_length()
    if "smoothness" in d:
        checks["smoothness"] = int(d["smoothness"]) == smoothness

    t = lehmer.triple_from_pair(m, bound)
    checks["pell_identity"] = t.x * t.x - 2 * t.delta * t.y * t.y == 1
    if all(k in d for k in ("delta", "x", "y")):
        sd, sx, sy = int(d["delta"]), int(d["x"]), int(d["y"])
        checks["stated_pell_identity"] = sx * sx - 2 * sd * sy * sy == 1
        checks["triple"] = (sd, sx, sy) == (t.delta, t.x, t.y)
    pair = lehmer.pair_from_triple(t, bound)
    checks["bijection"] = pair.m == m and lehmer.triple_from_pair(pair.m, bound) == t
    fund = pell.fundamental_solution(2 * t.delta, t.x)
    n = pell.solution_index(fund, t.x)
    checks["index_found"] = n is not None
    if "n" in d:
        checks["n"] = n == int(d["n"])
    sum_prime = is_probable_prime(2 * m + 1)
    if "sum_prime" in d:
        checks["sum_prime"] = bool(d["sum_prime"]) == sum_prime
    report.update(smoothness=smoothness, delta=str(t.delta), x=str(t.x), y=str(t.y), n=n,
                  fundamental_x=str(fund.x), sum_prime=sum_prime,
                  m_factors=fm.as_lists(), m1_factors=fm1.as_lists(),
                  ok=all(checks.values()), checks=checks)
    return report


def cmd_verify(args) -> int:
    bound = _bound_of(args) if args.b is not None else None
    total = bad = 0
    for path in args.paths:
        for d in jobs.read_lines(path):
            rep = verify_record(d, bound)
            total += 1
            bad += not rep["ok"]
            print(json.dumps(rep, separators=(",", ":")))
    print(f"verified {total} records, {bad} failed", file=sys.stderr)
    return 1 if bad else 0


COMMANDS = {
    "sieve-twins": cmd_sieve_twins,
    "solve-pell": cmd_solve_pell,
    "enumerate": cmd_enumerate,
    "search-high-order": cmd_search_high_order,
    "search-delta": cmd_search_delta,
    "search-small-primes": cmd_search_small_primes,
    "lift": cmd_lift,
    "chm": cmd_chm,
    "verify": cmd_verify,
}


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        tokens = _config_tokens(parser, argv)
    except UsageError as exc:
        parser.error(str(exc))
    except OSError as exc:
        print(f"twinsmooth: cannot read config: {exc}", file=sys.stderr)
        return 1
    if tokens:
        argv = argv[:1] + tokens + argv[1:]
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except (OSError, ValueError) as exc:
        print(f"twinsmooth: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
