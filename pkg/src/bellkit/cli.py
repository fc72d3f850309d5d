"""Command-line front end: simulate, bound, analyze, polytope, qrc, conjecture.

Every command echoes its resolved seed and configuration first, so any run
can be reproduced exactly by feeding the echoed seed back in.  Machine
output (--json) is NDJSON with sorted keys and no timestamps: re-running a
command with its echoed seed yields byte-identical lines.  Human output is
plain text and makes no such promise.

Exit codes: 0 on success, 1 on usage or data errors, 2 when a referee
dialogue hit a protocol violation, 3 when a challenger failed outright.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .bounds import (
    hoeffding_tail,
    larsson_coincidence_bound,
    larsson_detection_bound,
    min_runs_for,
    theorem1_bound,
    tsirelson_limit,
    two_term_bound,
    two_term_bound_optimized,
)
from .core import CounterfactualTable, conjecture1_estimate, observed_correlations
from .events import (
    NOT_VIOLATED,
    VIOLATED,
    analyze,
    pair_by_lattice,
    pair_by_window,
    parse_event_stream,
)
from .lhv import (
    CheaterConfig,
    DeterministicStrategy,
    LhvModel,
    TernaryRuns,
    simulate_loophole_experiment,
)
from .polytope import (
    DEFAULT_TOL,
    Behavior,
    chsh_facets,
    classify,
    is_local_mixture,
    pr_box,
    quantum_behavior,
    validate,
)
from .qrc import (
    ChallengeConfig,
    ChallengerFailure,
    CommandChallenger,
    HonestLhvChallenger,
    ProcessChannel,
    ProtocolViolation,
    QuantumPseudoChallenger,
    consistency_probe,
    loopback_channels,
    run_interactive_session,
    run_spreadsheet_session,
    run_three_node_challenge,
    run_three_node_oracle,
    transcript_dict,
    verify_determinism,
)
from .quantum import AngleSet, canonical_angles, simulate_experiment
from .rng import derive_seed

SEED_ENV = "BELLKIT_SEED"


class _Parser(argparse.ArgumentParser):
    # contract says usage errors exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class Reporter:
    """Dual-channel output: NDJSON records or human text, never both."""

    def __init__(self, json_mode: bool):
        self.json_mode = json_mode

    def record(self, kind: str, **fields) -> None:
        if self.json_mode:
            print(json.dumps({"record": kind, **fields},
                             sort_keys=True, separators=(",", ":")))

    def say(self, text: str = "") -> None:
        if not self.json_mode:
            print(text)

    def row(self, text: str) -> None:
        """Plot-ready CSV rows print in both modes."""
        print(text)


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return _u64(env)
        except argparse.ArgumentTypeError as exc:
            raise ValueError(f"{SEED_ENV}: {exc}") from None
    return int.from_bytes(os.urandom(8), "big")


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not (0 <= value < 1 << 64):
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _angles_from_option(spec: str) -> AngleSet:
    if spec == "canonical":
        return canonical_angles()
    parts = spec.split(",")
    if len(parts) != 4:
        raise ValueError(
            "angles must be 'canonical' or four comma-separated radians"
        )
    return AngleSet(*(float(p) for p in parts))


def _model_from_args(args) -> LhvModel:
    if getattr(args, "uniform", False) or args.strategy == "uniform":
        return LhvModel.uniform()
    return LhvModel.deterministic(DeterministicStrategy.from_index(int(args.strategy)))


def _summary_records(out: Reporter, summary) -> None:
    out.record("summary", s=summary.s, se=summary.se,
               corr=list(summary.corr), counts=[int(c) for c in summary.counts])
    out.say("cell,corr,count")
    for (x, y), corr, count in zip(((0, 0), (0, 1), (1, 0), (1, 1)),
                                   summary.corr, summary.counts):
        out.say(f"({x};{y}),{corr!r},{count}")
    out.say(f"s = {summary.s!r}   se = {summary.se!r}")


def _tail_note(out: Reporter, n: int, s: float) -> None:
    excess = s - 2.0
    probability = theorem1_bound(n, excess).probability if excess > 0.0 else 1.0
    out.record("tail", excess=max(excess, 0.0), probability=probability)
    if excess > 0.0:
        out.say(f"local-model tail at observed excess {excess!r}: <= {probability!r}")
    else:
        out.say("observed s does not exceed the local bound; tail note is vacuous")


# -- simulate -----------------------------------------------------------------

def cmd_simulate(args, out: Reporter) -> int:
    seed = _resolve_seed(args)
    out.record("config", command="simulate", model=args.model, n=args.n,
               seed=seed, version=__version__)
    out.say(f"simulate --model {args.model} --n {args.n} --seed {seed}")

    if args.model == "quantum":
        angles = _angles_from_option(args.angles)
        runs = simulate_experiment(angles, args.n, seed)
        summary = observed_correlations(runs)
        _summary_records(out, summary)
        _tail_note(out, args.n, summary.s)
        if args.runs:
            ternary = TernaryRuns(runs.x, runs.y, runs.a, runs.b)
            with open(args.runs, "w", encoding="utf-8") as handle:
                handle.write(ternary.to_csv())
        return 0

    if args.model == "lhv":
        model = _model_from_args(args)
        result = simulate_loophole_experiment(model, args.n, seed)
        summary = observed_correlations(result.runs.coincidences())
        _summary_records(out, summary)
        _tail_note(out, args.n, summary.s)
        if args.runs:
            with open(args.runs, "w", encoding="utf-8") as handle:
                handle.write(result.runs.to_csv())
        return 0

    # cheater: detection-loophole source against fair settings
    if args.target != "canonical":
        raise ValueError("only the canonical singlet target is built in")
    config = CheaterConfig(target=quantum_behavior(canonical_angles()),
                           wing_thinning=args.thinning)
    result = simulate_loophole_experiment(config, args.n, seed)
    out.record("counts", emissions=result.n, both=result.both,
               only_a=result.only_a, only_b=result.only_b,
               neither=result.neither)
    out.say(f"emissions {result.n}: both {result.both}, one-sided "
            f"{result.only_a + result.only_b}, neither {result.neither}")
    summary = observed_correlations(result.runs.coincidences())
    _summary_records(out, summary)
    gamma = float(result.runs.conditional_rates().min())
    detection = larsson_detection_bound(gamma)
    coincidence = larsson_coincidence_bound(gamma)
    out.record("efficiency", gamma_hat=gamma,
               detection_limit=detection.limit,
               coincidence_limit=coincidence.limit)
    out.record(
        "verdicts",
        naive=VIOLATED if summary.s > 2.0 else NOT_VIOLATED,
        detection_adjusted=VIOLATED if summary.s > detection.limit else NOT_VIOLATED,
        coincidence_adjusted=VIOLATED if summary.s > coincidence.limit else NOT_VIOLATED,
    )
    out.say(f"gamma_hat = {gamma!r}; adjusted limits: detection "
            f"{detection.limit!r}, coincidence {coincidence.limit!r}")
    if args.runs:
        with open(args.runs, "w", encoding="utf-8") as handle:
            handle.write(result.runs.to_csv())
    return 0


# -- bound --------------------------------------------------------------------

def _emit_bound(out: Reporter, report) -> None:
    out.record("bound", method=report.method, n=report.n, eta=report.eta,
               probability=report.probability, delta=report.delta)
    out.say(f"{report.method}(n={report.n}, eta={report.eta!r}"
            + (f", delta={report.delta!r}" if report.delta is not None else "")
            + f") <= {report.probability!r}")


def cmd_bound(args, out: Reporter) -> int:
    kind = args.bound_command
    out.record("config", command=f"bound {kind}", version=__version__)
    if kind == "theorem1":
        _emit_bound(out, theorem1_bound(args.n, args.eta))
    elif kind == "two-term":
        _emit_bound(out, two_term_bound(args.n, args.eta, args.delta))
    elif kind == "optimized":
        _emit_bound(out, two_term_bound_optimized(args.n, args.eta))
    elif kind == "hoeffding":
        p = hoeffding_tail(args.n, args.t)
        out.record("bound", method="hoeffding", n=args.n, t=args.t, probability=p)
        out.say(f"hoeffding(n={args.n}, t={args.t!r}) <= {p!r}")
    elif kind == "min-runs":
        n = min_runs_for(args.eta, args.alpha)
        out.record("min-runs", eta=args.eta, alpha=args.alpha, n=n)
        out.say(f"first n with tail below {args.alpha!r} at eta={args.eta!r}: {n}")
    elif kind == "larsson":
        bound = (larsson_detection_bound if args.loophole == "detection"
                 else larsson_coincidence_bound)(args.gamma)
        out.record("efficiency-bound", gamma=bound.gamma, delta=bound.delta,
                   limit=bound.limit, loophole=bound.loophole)
        out.say(f"local ceiling at gamma={bound.gamma!r} "
                f"({bound.loophole} loophole): {bound.limit!r}")
        if bound.limit >= tsirelson_limit():
            out.say("ceiling at or above the quantum maximum: "
                    "no possible violation at this efficiency")
    else:  # larsson-curve
        steps = int(math.floor((args.end - args.start) / args.step + 1e-9))
        if steps < 0:
            raise ValueError("empty gamma range")
        out.say("gamma,detection_limit,coincidence_limit")
        for k in range(steps + 1):
            gamma = min(args.start + k * args.step, 1.0)
            det = larsson_detection_bound(gamma)
            coin = larsson_coincidence_bound(gamma)
            out.record("curve-point", gamma=gamma, detection_limit=det.limit,
                       coincidence_limit=coin.limit)
            out.say(f"{gamma!r},{det.limit!r},{coin.limit!r}")
    return 0


# -- analyze ------------------------------------------------------------------

def cmd_analyze(args, out: Reporter) -> int:
    out.record("config", command="analyze", method=args.method,
               window_ns=args.window_ns, lattice_origin_ns=args.lattice_origin_ns,
               version=__version__)
    stream = parse_event_stream(_read_text(args.stream), on_unsorted=args.on_unsorted)
    if args.method == "window":
        result = pair_by_window(stream, args.window_ns)
    else:
        result = pair_by_lattice(stream, args.window_ns, args.lattice_origin_ns)
    out.record("pairing", method=result.method, window_ns=result.window_ns,
               pairs=result.n_pairs, singles_a=[int(v) for v in result.singles_a],
               singles_b=[int(v) for v in result.singles_b])
    report = analyze(result)
    _summary_records(out, report.summary)
    out.record("efficiency", gamma_hat=report.efficiency.gamma_hat,
               rates=[[float(r) for r in row] for row in report.efficiency.rates])
    out.record("verdicts", naive=report.naive,
               detection_adjusted=report.detection_adjusted,
               coincidence_adjusted=report.coincidence_adjusted,
               detection_limit=report.detection_limit,
               coincidence_limit=report.coincidence_limit)
    out.say(f"gamma_hat = {report.efficiency.gamma_hat!r}")
    out.say(f"naive (limit 2): {report.naive}")
    out.say(f"detection-adjusted (limit {report.detection_limit!r}): "
            f"{report.detection_adjusted}")
    out.say(f"coincidence-adjusted (limit {report.coincidence_limit!r}): "
            f"{report.coincidence_adjusted}")
    return 0


# -- polytope -----------------------------------------------------------------

_BUILTIN_BEHAVIORS = {
    "pr-box": pr_box,
    "canonical-quantum": lambda: quantum_behavior(canonical_angles()),
}


def cmd_polytope(args, out: Reporter) -> int:
    if args.builtin is not None:
        behavior = _BUILTIN_BEHAVIORS[args.builtin]()
        source = args.builtin
    elif args.behavior is not None:
        behavior = Behavior.from_csv(_read_text(args.behavior))
        source = args.behavior
    else:
        raise ValueError("give a behavior CSV path or --builtin")
    out.record("config", command="polytope classify", source=source,
               tol=args.tol, version=__version__)

    report = validate(behavior, tol=args.tol)
    out.record("validation", ok=report.ok, positivity=report.positivity,
               normalization=report.normalization,
               no_signalling=report.no_signalling,
               max_signalling=report.max_signalling)
    facets = chsh_facets(behavior, tol=args.tol)
    out.record("facets", values=[float(v) for v in facets.values],
               max_value=facets.max_value, max_abs=facets.max_abs,
               violated=[int(i) for i in facets.violated])
    label = classify(behavior, tol=args.tol).value
    local = is_local_mixture(behavior)
    out.record("class", label=label, local_mixture=local)
    if report.ok:
        out.say("validation: ok")
    else:
        out.say("validation: positivity={0.positivity} normalization="
                "{0.normalization} no_signalling={0.no_signalling}".format(report))
    out.say(f"max facet value = {facets.max_value!r}")
    out.say(f"class: {label}" + ("" if not local else " (explicit local mixture found)"))
    return 0


# -- qrc ----------------------------------------------------------------------

def _native_challenger(args):
    if args.native == "lhv":
        return HonestLhvChallenger(_model_from_args(args))
    if args.native == "quantum-test":
        return QuantumPseudoChallenger()
    raise ValueError("--native cheat only plays interactive loophole sessions")


def _challenge_config(args, mode: str) -> ChallengeConfig:
    return ChallengeConfig(n=args.n, trials=args.trials, threshold=args.threshold,
                           min_cell=args.min_cell, mode=mode, loophole=args.loophole)


def _emit_sessions(out: Reporter, transcripts, transcript_path: str | None) -> None:
    for k, t in enumerate(transcripts):
        out.record("session", index=k, s=t.summary.s, se=t.summary.se,
                   win=t.win, anomalies=list(t.anomalies))
        out.say(f"session {k}: s = {t.summary.s!r} -> "
                + ("win" if t.win else "no win")
                + (f"  [{'; '.join(t.anomalies)}]" if t.anomalies else ""))
    if transcript_path:
        with open(transcript_path, "w", encoding="utf-8") as handle:
            for t in transcripts:
                handle.write(json.dumps(transcript_dict(t), sort_keys=True,
                                        separators=(",", ":")) + "\n")


def _emit_verdict(out: Reporter, verdict) -> None:
    out.record("verdict", sessions_won=verdict.sessions_won,
               sessions_total=verdict.sessions_total, passed=verdict.passed,
               bound_note=verdict.bound_note)
    out.say(f"sessions won: {verdict.sessions_won} of {verdict.sessions_total} "
            f"-> {'PASS' if verdict.passed else 'FAIL'}")
    out.say(verdict.bound_note)


def _interactive_session_native(config, session_seed, native, client_seed):
    from .challengers import cheater_interactive_client, honest_interactive_client
    import threading

    referee_channel, client_channel = loopback_channels()
    client = (cheater_interactive_client if native == "cheat"
              else honest_interactive_client)
    errors = []

    def body():
        try:
            client(client_channel, client_seed)
        except Exception as exc:  # referee side reports its own failure
            errors.append(exc)

    thread = threading.Thread(target=body, daemon=True)
    thread.start()
    try:
        return run_interactive_session(
            referee_channel, config, session_seed,
            identity=f"native-{native}",
        )
    finally:
        referee_channel.close()
        thread.join(timeout=10)


def cmd_qrc(args, out: Reporter) -> int:
    seed = _resolve_seed(args)
    mode = args.mode if args.mode != "check" else "spreadsheet"
    config = _challenge_config(args, mode)
    out.record("config", command=f"qrc {args.mode}", n=config.n,
               trials=config.trials, threshold=config.threshold,
               min_cell=config.min_cell, loophole=config.loophole,
               seed=seed, version=__version__)
    out.say(f"qrc --mode {args.mode} --seed {seed}")

    if args.mode == "check":
        challenger = (CommandChallenger(args.challenger) if args.challenger
                      else _native_challenger(args))
        if not hasattr(challenger, "table_csv"):
            raise ValueError("check mode needs a table-emitting challenger")
        deterministic = verify_determinism(challenger, derive_seed(seed, 0), args.n)
        consistent = consistency_probe(challenger, derive_seed(seed, 1))
        out.record("check", challenger=challenger.identity(),
                   deterministic=deterministic, consistent=consistent)
        out.say(f"deterministic: {deterministic}")
        out.say(f"single-run consistency: "
                + ("unsupported (recorded; tables are consistent by construction)"
                   if consistent is None else str(consistent)))
        out.say("note: freedom from settings memory is not provable for a "
                "black box; these checks are the practical proxies")
        return 0 if deterministic and consistent is not False else 2

    if args.mode == "spreadsheet":
        challenger = (CommandChallenger(args.challenger, timeout_s=config.timeout_s)
                      if args.challenger else _native_challenger(args))
        transcripts = []
        won = 0
        for k in range(config.trials):
            t = run_spreadsheet_session(challenger, config, derive_seed(seed, k))
            transcripts.append(t)
            won += t.win
        from .qrc import Verdict, _bound_note

        verdict = Verdict(sessions_won=won, sessions_total=config.trials,
                          passed=won > config.trials // 2,
                          bound_note=_bound_note(config))
        _emit_sessions(out, transcripts, args.transcript)
        _emit_verdict(out, verdict)
        return 0

    if args.mode == "interactive":
        if not args.challenger and args.native == "quantum-test":
            raise ValueError("the quantum test oracle only plays spreadsheet mode")
        transcripts = []
        for k in range(config.trials):
            session_seed = derive_seed(seed, k)
            if args.challenger:
                channel = ProcessChannel(
                    (args.challenger if isinstance(args.challenger, str)
                     else " ".join(args.challenger))
                    + f" --seed {derive_seed(session_seed, 2)}"
                )
                try:
                    t = run_interactive_session(channel, config, session_seed,
                                                identity=args.challenger)
                finally:
                    channel.close()
            else:
                t = _interactive_session_native(
                    config, session_seed, args.native,
                    derive_seed(session_seed, 2))
            transcripts.append(t)
        from .qrc import Verdict, _bound_note

        won = sum(t.win for t in transcripts)
        verdict = Verdict(sessions_won=won, sessions_total=config.trials,
                          passed=won > config.trials // 2,
                          bound_note=_bound_note(config))
        _emit_sessions(out, transcripts, args.transcript)
        _emit_verdict(out, verdict)
        return 0

    # three-node: one session, three programs or the self-test oracle
    if args.oracle:
        t = run_three_node_oracle(config, seed)
    else:
        if not (args.source and args.alice and args.bob):
            raise ValueError("three-node mode needs --source, --alice, --bob "
                             "or --oracle")
        channels = [ProcessChannel(c) for c in (args.source, args.alice, args.bob)]
        try:
            t = run_three_node_challenge(*channels, config, seed)
        finally:
            for channel in channels:
                channel.close()
    _emit_sessions(out, [t], args.transcript)
    out.say(f"s = {t.summary.s!r} over {len(t.runs.x)} scored rounds")
    return 0


# -- conjecture ---------------------------------------------------------------

def _table_from_bits(bits: int, n: int = 4) -> CounterfactualTable:
    rows = np.array([[1 if (bits >> (4 * r + c)) & 1 else -1 for c in range(4)]
                     for r in range(n)], dtype=np.int8)
    return CounterfactualTable(rows)


def _sweep_block(block: tuple[int, int]) -> tuple[float, int]:
    lo, hi = block
    best, arg = -1.0, -1
    for bits in range(lo, hi):
        p = conjecture1_estimate(_table_from_bits(bits), mode="exhaustive")
        if p > best:
            best, arg = p, bits
    return best, arg


def _random_table(rows: int, seed: int) -> CounterfactualTable:
    from .rng import Rng

    words = Rng(seed).u64_block(rows)
    signs = np.empty((rows, 4), dtype=np.int8)
    for c in range(4):
        signs[:, c] = np.where((words >> np.uint64(63 - c)) & np.uint64(1), 1, -1)
    return CounterfactualTable(signs)


def _report_proportion(out: Reporter, p: float, label: str) -> None:
    out.say(f"{label}: proportion of assignments with s > 2 is {p!r}")
    if p > 0.5:
        out.record("finding", note="proportion above one half", proportion=p)
        out.say("*** PROPORTION EXCEEDS 1/2: the half-bound hypothesis fails "
                "on this table; preserve the config record above ***")


def cmd_conjecture(args, out: Reporter) -> int:
    seed = _resolve_seed(args)
    out.record("config", command="conjecture", trials=args.trials,
               mode=args.sample_mode, jobs=args.jobs, seed=seed,
               version=__version__)

    if args.table:
        table = CounterfactualTable.from_csv(_read_text(args.table))
        mode = args.sample_mode
        if mode == "auto":
            mode = "exhaustive" if 4 ** table.n <= 1 << 22 else "monte-carlo"
        p = conjecture1_estimate(table, trials=args.trials,
                                 seed=derive_seed(seed, 0), mode=mode)
        out.record("conjecture", source=args.table, n=table.n, mode=mode,
                   proportion=p)
        _report_proportion(out, p, f"table of {table.n} rows ({mode})")
        return 0

    if args.sweep4:
        blocks = [(lo, min(lo + 4096, 1 << 16)) for lo in range(0, 1 << 16, 4096)]
        if args.jobs > 1:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_sweep_block, blocks))
        else:
            results = [_sweep_block(b) for b in blocks]
        best, arg = max(results)
        out.record("sweep", tables=1 << 16, rows=4, max_proportion=best,
                   argmax_table=arg)
        _report_proportion(out, best, f"exhaustive 4-row sweep (argmax {arg})")
        return 0

    # random tables
    best, arg = -1.0, -1
    for k in range(args.random):
        table = _random_table(args.rows, derive_seed(seed, k))
        p = conjecture1_estimate(table, trials=args.trials,
                                 seed=derive_seed(seed, (1 << 32) + k),
                                 mode="monte-carlo")
        out.record("conjecture", index=k, n=args.rows, mode="monte-carlo",
                   proportion=p)
        if p > best:
            best, arg = p, k
    out.record("sweep", tables=args.random, rows=args.rows,
               max_proportion=best, argmax_table=arg)
    _report_proportion(out, best, f"{args.random} random tables (argmax {arg})")
    return 0


# -- parser wiring ------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="bellkit",
                     description="Finite-sample CHSH experiments on trial.")
    parser.add_argument("--json", action="store_true",
                        help="machine-readable NDJSON output")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    def seed_arg(p):
        p.add_argument("--seed", type=_u64, default=None,
                       help=f"64-bit seed (default: ${SEED_ENV} or fresh entropy)")

    simulate = sub.add_parser("simulate", help="run a seeded experiment")
    simulate.add_argument("--model", choices=("quantum", "lhv", "cheater"),
                          required=True)
    simulate.add_argument("--n", type=_positive, required=True)
    simulate.add_argument("--angles", default="canonical",
                          help="'canonical' or four comma-separated radians")
    simulate.add_argument("--uniform", action="store_true",
                          help="uniform strategy mixture (lhv model)")
    simulate.add_argument("--strategy", default="uniform",
                          help="'uniform' or a deterministic strategy index 0..15")
    simulate.add_argument("--target", default="canonical",
                          help="cheater target behavior")
    simulate.add_argument("--thinning", type=float, default=1.0,
                          help="per-wing detection survival probability")
    simulate.add_argument("--runs", metavar="PATH",
                          help="write the run records as CSV")
    seed_arg(simulate)
    simulate.set_defaults(func=cmd_simulate)

    bound = sub.add_parser("bound", help="evaluate closed-form bounds")
    bound_sub = bound.add_subparsers(dest="bound_command", required=True,
                                     parser_class=_Parser)
    for name in ("theorem1", "two-term", "optimized"):
        p = bound_sub.add_parser(name)
        p.add_argument("--n", type=_positive, required=True)
        p.add_argument("--eta", type=float, required=True)
        if name == "two-term":
            p.add_argument("--delta", type=float, required=True)
    p = bound_sub.add_parser("hoeffding")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--t", type=float, required=True)
    p = bound_sub.add_parser("min-runs")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p = bound_sub.add_parser("larsson")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--loophole", choices=("detection", "coincidence"),
                   required=True)
    p = bound_sub.add_parser("larsson-curve")
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="end", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    bound.set_defaults(func=cmd_bound)

    analyze_p = sub.add_parser("analyze", help="verdicts for a timestamped stream")
    analyze_p.add_argument("stream", help="event NDJSON path, or - for stdin")
    analyze_p.add_argument("--method", choices=("window", "lattice"),
                           default="window")
    analyze_p.add_argument("--window-ns", type=_positive, required=True)
    analyze_p.add_argument("--lattice-origin-ns", type=int, default=0)
    analyze_p.add_argument("--on-unsorted", choices=("reject", "sort"),
                           default="reject")
    analyze_p.set_defaults(func=cmd_analyze)

    polytope_p = sub.add_parser("polytope", help="behavior-space classification")
    polytope_sub = polytope_p.add_subparsers(dest="polytope_command",
                                             required=True, parser_class=_Parser)
    p = polytope_sub.add_parser("classify")
    p.add_argument("behavior", nargs="?", default=None,
                   help="behavior CSV path (16 rows x,y,a,b,p)")
    p.add_argument("--builtin", choices=tuple(_BUILTIN_BEHAVIORS))
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    polytope_p.set_defaults(func=cmd_polytope)

    qrc_p = sub.add_parser("qrc", help="referee a challenge")
    qrc_p.add_argument("--mode",
                       choices=("spreadsheet", "interactive", "three-node", "check"),
                       default="spreadsheet")
    qrc_p.add_argument("--challenger", help="external challenger command")
    qrc_p.add_argument("--native", choices=("lhv", "quantum-test", "cheat"),
                       default="lhv", help="built-in challenger when no command given")
    qrc_p.add_argument("--strategy", default="uniform")
    qrc_p.add_argument("--n", type=_positive, default=800)
    qrc_p.add_argument("--trials", type=_positive, default=99)
    qrc_p.add_argument("--threshold", type=float, default=1.0 + math.sqrt(2.0))
    qrc_p.add_argument("--min-cell", type=int, default=100)
    qrc_p.add_argument("--loophole", action="store_true",
                       help="interactive mode: allow the no-detection symbol")
    qrc_p.add_argument("--source", help="three-node source command")
    qrc_p.add_argument("--alice", help="three-node station A command")
    qrc_p.add_argument("--bob", help="three-node station B command")
    qrc_p.add_argument("--oracle", action="store_true",
                       help="three-node self-test with the quantum oracle")
    qrc_p.add_argument("--transcript", metavar="PATH",
                       help="write full session transcripts as NDJSON")
    seed_arg(qrc_p)
    qrc_p.set_defaults(func=cmd_qrc)

    conjecture = sub.add_parser("conjecture",
                                help="estimate the fair-settings success proportion")
    group = conjecture.add_mutually_exclusive_group(required=True)
    group.add_argument("--table", metavar="PATH", help="sign-table CSV")
    group.add_argument("--sweep4", action="store_true",
                       help="exhaust all 65536 four-row tables")
    group.add_argument("--random", type=_positive, metavar="COUNT",
                       help="random tables to scan")
    conjecture.add_argument("--rows", type=_positive, default=16,
                            help="rows per random table")
    conjecture.add_argument("--trials", type=_positive, default=10_000)
    conjecture.add_argument("--mode", dest="sample_mode",
                            choices=("auto", "monte-carlo", "exhaustive"),
                            default="auto")
    conjecture.add_argument("--jobs", type=_positive, default=1,
                            help="parallel workers for the sweep")
    seed_arg(conjecture)
    conjecture.set_defaults(func=cmd_conjecture)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Reporter(json_mode=args.json)
    try:
        return args.func(args, out)
    except ProtocolViolation as exc:
        print(f"protocol violation: {exc}", file=sys.stderr)
        return 2
    except ChallengerFailure as exc:
        print(f"challenger failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
