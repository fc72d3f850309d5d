"""Reference challengers for the referee protocols.

Every client here is honest about the message contract even when it cheats
the physics.  The spreadsheet program prints the same CSV bytes as the
in-process table challenger for the same seed, so the referee cannot tell
a subprocess from a library call.  The interactive clients audit every
reveal against the prior commitment hash and abort loudly on a mismatch:
a referee caught rigging its settings is a failed experiment, not a loss.

Exit codes follow the referee's convention from the other side: 0 for a
completed session, 3 for any client-side failure (broken channel, audit
mismatch, malformed referee message).
"""

from __future__ import annotations

import argparse
import sys

from .lhv import CheaterConfig, DeterministicStrategy, LhvModel, _outcome_from_code, generate_table
from .polytope import Behavior
from .qrc import ChallengerFailure, LineChannel, ProtocolViolation, settings_commitment
from .rng import Rng

CLIENT_TIMEOUT_S = 120.0


class AuditFailure(Exception):
    """The referee's reveal contradicts its commitment."""

    exit_code = 3


def _require(message: dict, kind: str, fields: tuple[str, ...] = ()) -> dict:
    if message.get("type") != kind:
        raise ChallengerFailure(
            f"referee sent type {message.get('type')!r} where {kind!r} was expected"
        )
    for f in fields:
        if f not in message:
            raise ChallengerFailure(f"referee {kind} message is missing field {f!r}")
    return message


def _audit_reveal(reveal: dict, committed_hash: str, round_index: int) -> tuple[int, int]:
    x, y, nonce = reveal.get("x"), reveal.get("y"), reveal.get("nonce")
    if (isinstance(x, bool) or x not in (0, 1)
            or isinstance(y, bool) or y not in (0, 1)
            or not isinstance(nonce, str)):
        raise ChallengerFailure(f"round {round_index}: malformed reveal message")
    if settings_commitment(x, y, nonce) != committed_hash:
        raise AuditFailure(
            f"round {round_index}: revealed settings do not match the commitment"
        )
    return int(x), int(y)


def honest_interactive_client(channel, seed: int, model: LhvModel | None = None) -> dict:
    """Play the commit/row/reveal dialogue from a committed local model.

    One uniform per round selects a deterministic strategy by inverse CDF
    over the model's cumulative weights, matching the spreadsheet table
    generator stream for stream; rounds and table rows are interchangeable.
    Returns the referee's result message.
    """
    if model is None:
        model = LhvModel.uniform()
    cum = model.cumulative_weights()
    last = len(cum) - 1
    rng = Rng(seed)

    hello = _require(channel.recv(CLIENT_TIMEOUT_S), "hello", ("n",))
    n = int(hello["n"])
    for i in range(n):
        commit = _require(channel.recv(CLIENT_TIMEOUT_S), "commit", ("hash",))
        u = rng.next_float()
        idx = last
        for k, c in enumerate(cum):
            if u < c:
                idx = k
                break
        row = model.strategies[idx].row()
        channel.send(
            {"type": "row", "a": int(row[0]), "ap": int(row[1]),
             "b": int(row[2]), "bp": int(row[3])}
        )
        reveal = _require(channel.recv(CLIENT_TIMEOUT_S), "reveal", ("x", "y", "nonce"))
        _audit_reveal(reveal, commit["hash"], i)
    return _require(channel.recv(CLIENT_TIMEOUT_S), "result", ("s", "win"))


def cheater_interactive_client(
    channel, seed: int, target: Behavior | None = None
) -> dict:
    """Detection-loophole cheat over the wire.

    Each round draws a desired settings pair and an outcome pair from the
    target behavior's cell, then reports signs only in the desired columns
    and the no-detection symbol 0 elsewhere.  A strict-mode referee rejects
    the first 0; in loophole mode the coincidence statistic reproduces the
    target.  Stream discipline matches the emission source: one word plus
    one uniform per round.
    """
    if target is None:
        from .polytope import quantum_behavior
        from .quantum import canonical_angles

        target = quantum_behavior(canonical_angles())
    config = CheaterConfig(target=target)
    rng = Rng(seed)

    hello = _require(channel.recv(CLIENT_TIMEOUT_S), "hello", ("n",))
    n = int(hello["n"])
    for i in range(n):
        commit = _require(channel.recv(CLIENT_TIMEOUT_S), "commit", ("hash",))
        word = rng.next_u64()
        dx, dy = word >> 63, (word >> 62) & 1
        u = rng.next_float()
        c1, c2, c3 = config.cell_cumulative(dx, dy)
        code = (u >= c1) + (u >= c2) + (u >= c3)
        a_star, b_star = _outcome_from_code(code)
        channel.send(
            {
                "type": "row",
                "a": a_star if dx == 0 else 0,
                "ap": a_star if dx == 1 else 0,
                "b": b_star if dy == 0 else 0,
                "bp": b_star if dy == 1 else 0,
            }
        )
        reveal = _require(channel.recv(CLIENT_TIMEOUT_S), "reveal", ("x", "y", "nonce"))
        _audit_reveal(reveal, commit["hash"], i)
    return _require(channel.recv(CLIENT_TIMEOUT_S), "result", ("s", "win"))


# -- three-node clients -------------------------------------------------------

def source_client(channel, seed: int, model: LhvModel | None = None) -> int:
    """Emission source: answers each emit request with a full strategy.

    The payload carries both wings' answers for both settings; the
    mediator splits it, so neither station ever sees the other's half.
    Returns the number of emissions served (the referee closing the
    channel is the normal end of a session).
    """
    if model is None:
        model = LhvModel.uniform()
    cum = model.cumulative_weights()
    last = len(cum) - 1
    rng = Rng(seed)
    served = 0
    while True:
        try:
            message = channel.recv(CLIENT_TIMEOUT_S)
        except ChallengerFailure:
            return served
        _require(message, "emit")
        u = rng.next_float()
        idx = last
        for k, c in enumerate(cum):
            if u < c:
                idx = k
                break
        s = model.strategies[idx]
        channel.send(
            {
                "type": "payload",
                "a": {"0": s.a0, "1": s.a1},
                "b": {"0": s.b0, "1": s.b1},
            }
        )
        served += 1


def station_client(channel) -> int:
    """Measurement station: holds the latest payload, answers settings.

    Deliberately stateless beyond one payload slot; with the mediator as
    the only channel there is nothing else to remember.  Returns the
    number of outcomes reported.
    """
    payload = None
    answered = 0
    while True:
        try:
            message = channel.recv(CLIENT_TIMEOUT_S)
        except ChallengerFailure:
            return answered
        kind = message.get("type")
        if kind == "payload":
            payload = message.get("data")
        elif kind == "setting":
            if payload is None:
                raise ChallengerFailure("setting arrived before any payload")
            value = message.get("value")
            if value not in (0, 1):
                raise ChallengerFailure(f"malformed setting message: {message!r}")
            try:
                outcome = int(payload[str(value)])
            except (KeyError, TypeError, ValueError):
                raise ChallengerFailure(f"payload lacks an answer for setting {value}") from None
            channel.send({"type": "outcome", "value": outcome})
            answered += 1
        else:
            raise ChallengerFailure(f"unexpected message type {kind!r}")


# -- command-line entry -------------------------------------------------------

def _u64(text: str) -> int:
    value = int(text, 0)
    if not (0 <= value < 1 << 64):
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _model_from_option(spec: str) -> LhvModel:
    if spec == "uniform":
        return LhvModel.uniform()
    try:
        index = int(spec)
    except ValueError:
        raise argparse.ArgumentTypeError(
            "strategy must be 'uniform' or an index 0..15"
        ) from None
    return LhvModel.deterministic(DeterministicStrategy.from_index(index))


def _stdio_channel() -> LineChannel:
    return LineChannel(sys.stdin, sys.stdout, name="referee")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellkit-challenger",
        description="Reference challengers speaking the referee protocols.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    spreadsheet = sub.add_parser(
        "spreadsheet", help="print an N x 4 sign table as CSV on stdout"
    )
    spreadsheet.add_argument("--seed", type=_u64, required=True)
    spreadsheet.add_argument("--n", type=int, required=True)
    spreadsheet.add_argument("--strategy", default="uniform",
                             help="'uniform' or a deterministic strategy index 0..15")
    spreadsheet.add_argument("--x", type=int, choices=(0, 1),
                             help="single-run replay: print 'a,b' for settings (x, y)")
    spreadsheet.add_argument("--y", type=int, choices=(0, 1))

    interactive = sub.add_parser(
        "interactive", help="honest commit/row/reveal client on stdio"
    )
    interactive.add_argument("--seed", type=_u64, required=True)
    interactive.add_argument("--strategy", default="uniform")

    cheat = sub.add_parser(
        "cheat", help="detection-loophole client on stdio (needs a loophole-mode referee)"
    )
    cheat.add_argument("--seed", type=_u64, required=True)

    source = sub.add_parser("source", help="three-node emission source on stdio")
    source.add_argument("--seed", type=_u64, required=True)
    source.add_argument("--strategy", default="uniform")

    sub.add_parser("station", help="three-node measurement station on stdio")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "spreadsheet":
            if (args.x is None) != (args.y is None):
                print("--x and --y must be given together", file=sys.stderr)
                return 3
            model = _model_from_option(args.strategy)
            table = generate_table(model, args.n, args.seed)
            if args.x is not None:
                if args.n != 1:
                    print("single-run replay requires --n 1", file=sys.stderr)
                    return 3
                row = table.values[0]
                sys.stdout.write(f"{row[args.x]},{row[2 + args.y]}\n")
            else:
                sys.stdout.write(table.to_csv())
            return 0
        if args.command == "interactive":
            honest_interactive_client(_stdio_channel(), args.seed,
                                      _model_from_option(args.strategy))
            return 0
        if args.command == "cheat":
            cheater_interactive_client(_stdio_channel(), args.seed)
            return 0
        if args.command == "source":
            source_client(_stdio_channel(), args.seed, _model_from_option(args.strategy))
            return 0
        if args.command == "station":
            station_client(_stdio_channel())
            return 0
    except AuditFailure as exc:
        print(f"challenger aborted: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ChallengerFailure, ProtocolViolation) as exc:
        # from the client's side either one means the referee went bad
        print(f"challenger aborted: {exc}", file=sys.stderr)
        return 3
    except argparse.ArgumentTypeError as exc:
        print(str(exc), file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"challenger aborted: {exc}", file=sys.stderr)
        return 3
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
