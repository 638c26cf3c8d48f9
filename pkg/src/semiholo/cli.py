"""Command-line front end: ``semiholo {algebra,query,capacity,copu}``.

Exit codes: 0 success, 2 parse/config error, 3 rank overflow, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import jsonschema

from . import __version__
from .algebra import (
    Chain,
    OverflowPolicy,
    RankOverflowError,
    SystemParams,
    bind,
    compress_chain,
    inverse,
    superpose,
)
from .capacity import capacity_report, mc_ambiguity
from .copu import (
    Copu,
    CopuConfig,
    OpCommand,
    OpKind,
    energy_proxy,
    estimate_transistors,
    worst_case_activity,
)
from .expr import ExpressionError, evaluate, parse
from .io import (
    REDCAR_EXPRESSION,
    REDCAR_ROLE,
    ExperimentConfig,
    dumps_canonical,
    load_codebook,
    parse_operand,
    redcar_codebook,
    validate_report,
)
from .memory import (
    DenoiseMethod,
    chain_dist,
    cleanup_query,
    denoise_item,
    item_dist,
    unbind_query,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_OVERFLOW = 3
EXIT_IO = 4


def _compact(v) -> str:
    return json.dumps(v, separators=(",", ":"))


def _chain_literal(c: Chain):
    lists = c.to_lists()
    return lists[0] if len(lists) == 1 else lists


def _int_list(text: str) -> list[int]:
    """``"20"``, ``"1,2,5"`` or an inclusive range ``"1:40"``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            lo, hi = part.split(":")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError(f"empty integer list {text!r}")
    return out


class _Out:
    """Collects text for stdout or ``--out``."""

    def __init__(self):
        self.buf = io.StringIO()

    def line(self, *parts) -> None:
        print(*parts, file=self.buf)

    def emit_json(self, kind: str, doc: dict) -> None:
        validate_report(kind, doc)
        self.buf.write(dumps_canonical(doc))


# -- algebra ---------------------------------------------------------------

def _params_from(args) -> SystemParams:
    return SystemParams(args.p, args.y, args.d)


def cmd_algebra(args, out: _Out) -> int:
    cb = load_codebook(args.codebook) if args.codebook else None
    params = cb.params if cb else _params_from(args)
    ops = [parse_operand(t, params, cb) for t in args.operands]
    op = args.op
    arity = {"superpose": 2, "bind": 2, "dist": 2, "inverse": 1, "compress": 1}
    if op in arity and len(ops) != arity[op]:
        raise ValueError(f"{op} takes {arity[op]} operand(s), got {len(ops)}")
    warning = False
    rank: int | None
    if op == "superpose":
        policy = OverflowPolicy.TRUNCATE if args.policy == "truncate" else OverflowPolicy.REJECT
        res = superpose(ops[0], ops[1], policy)
        warning = res.warning
        result, rank = _chain_literal(res), res.rank
    elif op == "bind":
        res = bind(ops[0], ops[1])
        result, rank = _chain_literal(res), res.rank
    elif op == "inverse":
        (c,) = ops
        res = Chain(params, tuple(inverse(it) for it in c.items))
        result, rank = _chain_literal(res), res.rank
    elif op == "dist":
        a, b = ops
        if a.rank != 1:
            raise ValueError("the first dist operand must be a single item")
        result = item_dist(a[0], b[0]) if b.rank == 1 else chain_dist(a[0], b)
        rank = None
    elif op == "compress":
        result, rank = list(compress_chain(ops[0]).elems), 1
    else:  # denoise
        samples = [it for c in ops for it in c.items]
        result, rank = list(denoise_item(samples, DenoiseMethod(args.method)).elems), 1
    if args.json:
        out.emit_json("algebra", {
            "command": op,
            "params": params.as_dict(),
            "result": result,
            "rank": rank,
            "warning": warning,
        })
    else:
        out.line(_compact(result))
        if rank is not None:
            out.line(f"rank: {rank}" + (" (truncated)" if warning else ""))
    return EXIT_OK


# -- query -----------------------------------------------------------------

def cmd_query(args, out: _Out) -> int:
    if args.demo_redcar:
        cb = redcar_codebook()
        expression = args.expression or REDCAR_EXPRESSION
        role = args.unbind or REDCAR_ROLE
    else:
        if not args.codebook:
            raise ValueError("--codebook is required (or use --demo-redcar)")
        if not args.expression:
            raise ValueError("an expression is required")
        cb = load_codebook(args.codebook)
        expression, role = args.expression, args.unbind
    s = evaluate(parse(expression), cb)
    if role:
        if role not in cb:
            raise KeyError(f"unknown role {role!r}")
        probe = bind(Chain(cb.params, (inverse(cb[role]),)), s)
        res = unbind_query(cb, s, role)
    else:
        probe = s
        res = cleanup_query(cb, s)
    if args.json:
        out.emit_json("query", {
            "params": cb.params.as_dict(),
            "expression": expression,
            "unbind": role,
            "probe": probe.to_lists(),
            "result": res.as_dict(),
        })
    else:
        out.line(f"probe: {_compact(probe.to_lists())}")
        line = f"{res.name} distance={res.distance}"
        if res.runner_up_name is not None:
            line += f" runner-up={res.runner_up_name}({res.runner_up_distance})"
        line += f" ambiguous={'yes' if res.ambiguous else 'no'}"
        out.line(line)
    return EXIT_OK


# -- capacity --------------------------------------------------------------

def _capacity_params(args) -> list[SystemParams]:
    if args.split:
        # every (l, y) with l*y == C, as p = 2**l
        C = args.split
        return [SystemParams(2 ** l, C // l, args.d) for l in range(1, C + 1) if C % l == 0]
    if args.p is None or args.y is None:
        raise ValueError("capacity needs --p and --y, or --split")
    return [SystemParams(args.p, args.y, args.d)]


def cmd_capacity(args, out: _Out) -> int:
    gammas = _int_list(args.gamma)
    if any(g < 1 for g in gammas):
        raise ValueError("Gamma values must be >= 1")
    rows = [capacity_report(pp, g, args.s) for pp in _capacity_params(args) for g in gammas]
    mc = []
    if args.mc:
        vocab_sizes = _int_list(args.vocab) if args.vocab else []
        if not vocab_sizes:
            raise ValueError("--mc needs --vocab")
        for pp in _capacity_params(args):
            for g in gammas:
                for v in vocab_sizes:
                    mc.append(mc_ambiguity(pp, v, g, args.trials, args.seed))
    if args.json:
        doc = {"rows": [r.as_dict() for r in rows]}
        if mc:
            doc["mc"] = [m.as_dict() for m in mc]
        out.emit_json("capacity", doc)
        return EXIT_OK
    fields = ["p", "y", "Gamma", "Q", "s", "Q_s", "J", "Q_s_bound", "dominant_valid"]
    if args.csv:
        w = csv.writer(out.buf, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([r.params.p, r.params.y, r.Gamma, r.Q, f"{r.s:.6g}", f"{r.Q_s:.6g}",
                        f"{r.J:.6g}", f"{r.Q_s_bound:.6g}", r.dominant_valid])
        if mc:
            w.writerow([])
            w.writerow(["p", "y", "Gamma", "vocab", "trials", "seed", "collision_rate",
                        "collision_lo", "collision_hi", "ambiguous_rate", "ambiguous_lo",
                        "ambiguous_hi"])
            for m in mc:
                w.writerow([m.params.p, m.params.y, m.Gamma, m.vocab_size, m.trials, m.seed,
                            f"{m.collision_rate:.6g}", f"{m.collision_ci[0]:.6g}",
                            f"{m.collision_ci[1]:.6g}", f"{m.ambiguous_query_rate:.6g}",
                            f"{m.ambiguous_query_ci[0]:.6g}", f"{m.ambiguous_query_ci[1]:.6g}"])
        return EXIT_OK
    out.line(f"{'p':>6} {'y':>5} {'Gamma':>5} {'log10 Q':>9} {'Q_s_bound':>12} "
             f"{'s':>12} {'J':>12} dominant")
    for r in rows:
        log10_q = r.params.y * math.log10(r.params.p)
        out.line(f"{r.params.p:>6} {r.params.y:>5} {r.Gamma:>5} {log10_q:>9.3f} "
                 f"{r.Q_s_bound:>12.6g} {r.s:>12.6g} {r.J:>12.6g} "
                 f"{'yes' if r.dominant_valid else 'no'}")
    for m in mc:
        out.line(f"mc p={m.params.p} y={m.params.y} Gamma={m.Gamma} vocab={m.vocab_size} "
                 f"trials={m.trials} seed={m.seed}: collision_rate={m.collision_rate:.4f} "
                 f"[{m.collision_ci[0]:.4f}, {m.collision_ci[1]:.4f}] "
                 f"ambiguous_query_rate={m.ambiguous_query_rate:.4f} "
                 f"[{m.ambiguous_query_ci[0]:.4f}, {m.ambiguous_query_ci[1]:.4f}]")
    return EXIT_OK


# -- copu ------------------------------------------------------------------

def _copu_config(args) -> CopuConfig:
    return CopuConfig.from_bits(args.l, args.y, args.d)


def _config_dict(cfg: CopuConfig) -> dict:
    p = cfg.params
    return {"l": p.l, "y": p.y, "d": p.d, "clock_period_ns": cfg.clock_period_ns,
            "toggle_weights": dict(cfg.toggle_weights)}


def _copu_commands(args, cfg: CopuConfig) -> list[OpCommand]:
    params = cfg.params
    cmds = []
    for kind in OpKind:
        operands = getattr(args, kind.name.lower())
        if operands:
            a, b = (parse_operand(t, params) for t in operands)
            cmds.append(OpCommand(kind, a, b))
    if args.script:
        for lineno, raw in enumerate(Path(args.script).read_text(encoding="utf-8").splitlines(), 1):
            if not raw.strip() or raw.lstrip().startswith("#"):
                continue
            try:
                doc = json.loads(raw)
                a = Chain.of(params, *doc["a"])
                b = Chain.of(params, *doc["b"])
                cmds.append(OpCommand(OpKind(doc["kind"]), a, b))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{args.script}:{lineno}: bad command ({exc})") from None
    if not cmds:
        raise ValueError("no command given (use --superpose/--bind/--bind-inverse/--script)")
    return cmds


def cmd_copu(args, out: _Out) -> int:
    cfg = _copu_config(args)
    if args.action == "estimate":
        rep = estimate_transistors(cfg)
        if args.json:
            out.emit_json("copu-estimate", rep.as_dict())
        else:
            for key, value in rep.as_dict().items():
                out.line(f"{key:<12} {value}")
        return EXIT_OK
    if args.action == "worst-case":
        kinds = ["superpose", "bind"] if args.kind == "both" else [args.kind]
        reports = [worst_case_activity(cfg, k) for k in kinds]
        if args.json:
            out.emit_json("copu-worst-case", {
                "config": _config_dict(cfg),
                "reports": [r.as_dict() | {"energy_proxy": energy_proxy(r.stats, cfg)}
                            for r in reports],
            })
        else:
            for r in reports:
                t = r.toggles
                out.line(f"{r.kind.value} {r.rank_a}x{r.rank_b}: cycles={r.stats.cycles} "
                         f"input_bits={r.input_bits} output_bits={r.output_bits} "
                         f"input={t['input']} datapath={t['datapath']} register={t['register']} "
                         f"control={t['control']} register_share={r.register_share:.3f} "
                         f"energy_proxy={energy_proxy(r.stats, cfg):g}")
        return EXIT_OK

    trace = args.action == "trace"
    unit = Copu(cfg, trace=trace)
    results = []
    for cmd in _copu_commands(args, cfg):
        start = len(unit.trace)
        chain, stats = unit.run_op(cmd)
        results.append((cmd, chain, stats, unit.trace[start:]))
    if args.json:
        out.emit_json("copu-run", {
            "config": _config_dict(cfg),
            "results": [
                {"kind": cmd.kind.value, "result": chain.to_lists(), "stats": stats.as_dict(),
                 "energy_proxy": energy_proxy(stats, cfg)}
                | ({"trace": lines} if trace else {})
                for cmd, chain, stats, lines in results
            ],
        })
        return EXIT_OK
    for cmd, chain, stats, lines in results:
        if trace:
            for ln in lines:
                out.line(ln)
        out.line(f"{cmd.kind.value}: {_compact(chain.to_lists())} rank={chain.rank} "
                 f"cycles={stats.cycles} eq={int(stats.eq)} toggles={_compact(stats.toggles)} "
                 f"energy_proxy={energy_proxy(stats, cfg):g}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # added to the root and to every subcommand, so flags work in either position
    dflt = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--json", action="store_true", default=dflt(False),
                   help="machine-readable output")
    g.add_argument("--seed", type=int, default=dflt(None), help="RNG seed")
    g.add_argument("--config", default=dflt(None), help="experiment config JSON")
    g.add_argument("--out", default=dflt(None), help="write output to this path")
    return g


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(suppress=True)
    parser = argparse.ArgumentParser(prog="semiholo", parents=[_global_flags(False)],
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    alg = sub.add_parser("algebra", parents=[common], help="superpose, bind, inverse, ...")
    alg.add_argument("op", choices=["superpose", "bind", "inverse", "dist", "compress", "denoise"])
    alg.add_argument("operands", nargs="+",
                     help="item [1,2], chain [[1,2],[3,0]] or codebook name")
    alg.add_argument("--p", type=int)
    alg.add_argument("--y", type=int)
    alg.add_argument("--d", type=int)
    alg.add_argument("--codebook")
    alg.add_argument("--policy", choices=["reject", "truncate"], default="reject")
    alg.add_argument("--method", choices=[m.value for m in DenoiseMethod], default="majority")

    q = sub.add_parser("query", parents=[common], help="clean up an expression against a codebook")
    q.add_argument("expression", nargs="?")
    q.add_argument("--codebook")
    q.add_argument("--unbind", metavar="ROLE")
    q.add_argument("--demo-redcar", action="store_true",
                   help="run the bundled red-car example")

    cap = sub.add_parser("capacity", parents=[common], help="capacity bounds and Monte-Carlo")
    cap.add_argument("--p", type=int)
    cap.add_argument("--y", type=int)
    cap.add_argument("--d", type=int)
    cap.add_argument("--split", type=int, metavar="C",
                     help="sweep every (l, y) with l*y = C")
    cap.add_argument("--gamma", default=None, help="e.g. 20, 1,2,5 or 1:40")
    cap.add_argument("--s", type=float, help="sparsity factor (default: from the bound)")
    cap.add_argument("--csv", action="store_true")
    cap.add_argument("--mc", action="store_true", help="append Monte-Carlo rates")
    cap.add_argument("--vocab", help="vocabulary size(s) for --mc")
    cap.add_argument("--trials", type=int, default=None)

    cp = sub.add_parser("copu", parents=[common], help="cycle-level CoPU simulator")
    cp.add_argument("action", choices=["run", "trace", "worst-case", "estimate"])
    cp.add_argument("--l", type=int, default=8)
    cp.add_argument("--y", type=int, default=1)
    cp.add_argument("--d", type=int, default=8)
    for kind in OpKind:
        cp.add_argument(f"--{kind.value}", dest=kind.name.lower(), nargs=2, metavar=("A", "B"))
    cp.add_argument("--script", help="JSON-lines file of {kind, a, b} commands")
    cp.add_argument("--kind", choices=["superpose", "bind", "both"], default="both")
    return parser


def _apply_config(args) -> None:
    if not args.config:
        return
    cfg = ExperimentConfig.load(args.config)
    for name in ("p", "y", "d"):
        if getattr(args, name, "absent") is None:
            setattr(args, name, getattr(cfg.params, name))
    if args.seed is None:
        args.seed = cfg.seed
    if getattr(args, "gamma", "absent") is None:
        args.gamma = ",".join(map(str, cfg.gammas))
    if getattr(args, "vocab", "absent") is None and cfg.mc_vocab:
        args.vocab = ",".join(map(str, cfg.mc_vocab))
    if getattr(args, "trials", "absent") is None:
        args.trials = cfg.mc_trials
    if getattr(args, "script", "absent") is None:
        args.script = cfg.copu_script
    if args.out is None:
        args.out = cfg.out


def _fill_defaults(args) -> None:
    if args.command == "algebra":
        args.p = 4 if args.p is None else args.p
        args.y = 2 if args.y is None else args.y
        args.d = 8 if args.d is None else args.d
    if args.command == "capacity":
        args.d = 8 if args.d is None else args.d
        args.gamma = args.gamma or "1"
        args.trials = args.trials or 1000


_DISPATCH = {"algebra": cmd_algebra, "query": cmd_query, "capacity": cmd_capacity, "copu": cmd_copu}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = _Out()
    try:
        _apply_config(args)
        _fill_defaults(args)
        code = _DISPATCH[args.command](args, out)
    except RankOverflowError as exc:
        print(f"error: rank overflow: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except ExpressionError as exc:
        print(f"error: parse error at {exc}", file=sys.stderr)
        return EXIT_USAGE
    except jsonschema.ValidationError as exc:
        print(f"error: invalid document: {exc.message}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, TypeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    text = out.buf.getvalue()
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8", newline="\n")
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
