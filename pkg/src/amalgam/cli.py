"""Command-line front end.

Commands: eval, embeddings, enumerate, check-ap, pushout, ec, amalgam,
combine, union-ap.  Exit codes: 0 verified/holds/success, 1 refuted/fails,
2 unknown/none-up-to, 3 input error, 4 internal verification failure.
Reports are deterministic: no timestamps, no randomness, sorted JSON keys;
the workers flag is accepted and echoed, computation itself is sequential
and its observable output does not depend on it.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

from . import jsonio
from .amalgamation import (
    check_ap,
    find_amalgam,
    image_union_amalgam,
    base_expansion_amalgam,
    pushout_extension_amalgam,
    pushout_empty,
    pushout_relational,
    quintuples_of_union_theory,
    verify_certificate,
)
from .chain import combine_over_base, amalgamate_union
from .classes import enumerate_models
from .ec import REFUTED, UNKNOWN, VERIFIED, check_ec_compatibility, is_ec
from .errors import (
    AmalgamError,
    AssertionFailure,
    HypothesisFailure,
    InapplicableError,
    InducedRelationConflict,
    InputError,
    InvalidCertificate,
    InvalidQuintuple,
    InvalidWitness,
    VerificationFailure,
    WellDefinednessFailure,
)
from .logic import evaluate, parse_formula, pretty
from .morphisms import Morphism, enumerate_embeddings
from .verdicts import Bounds, ClosureFailure, FAILS, HOLDS, Inapplicable, NoneUpTo

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_UNKNOWN = 2
EXIT_INPUT = 3
EXIT_INTERNAL = 4


@dataclass
class RunConfig:
    command: str
    args: argparse.Namespace
    bounds: Bounds
    workers: int = 1
    output: str | None = None
    format: str = "human"
    lines: list[str] = field(default_factory=list)
    payload: dict = field(default_factory=dict)

    def say(self, text: str) -> None:
        self.lines.append(text)


def _bounds_from(ns: argparse.Namespace) -> Bounds:
    return Bounds(
        max_model_size=getattr(ns, "max_model_size", 4),
        max_amalgam_size=getattr(ns, "max_amalgam_size", None) or getattr(ns, "max_d", 4),
        max_tuple=getattr(ns, "max_tuple", 4),
        max_rounds=getattr(ns, "max_rounds", 8),
        size_budget=getattr(ns, "size_budget", None),
        quintuple_bound=getattr(ns, "quintuple_bound", 2),
    )


def _load(path: str):
    return jsonio.load_json(path)


def _cmd_eval(cfg: RunConfig) -> int:
    m = jsonio.structure_from_json(_load(cfg.args.structure))
    f = parse_formula(cfg.args.formula, m.sig)
    env = {}
    for item in (cfg.args.env or "").split(","):
        if item:
            name, _, value = item.partition("=")
            env[name.strip()] = int(value)
    value = evaluate(m, f, env=env)
    cfg.payload["formula"] = pretty(f)
    cfg.payload["value"] = value
    cfg.say(f"{pretty(f)}: {str(value).lower()}")
    return EXIT_OK if value else EXIT_REFUTED


def _cmd_embeddings(cfg: RunConfig) -> int:
    dom = jsonio.structure_from_json(_load(cfg.args.dom))
    cod = jsonio.structure_from_json(_load(cfg.args.cod))
    over = jsonio.signature_from_json(_load(cfg.args.over)) if cfg.args.over else None
    embs = enumerate_embeddings(dom, cod, over, limit=cfg.args.limit)
    cfg.payload["count"] = len(embs)
    cfg.payload["maps"] = [list(h.map) for h in embs]
    cfg.say(f"{len(embs)} embedding(s)")
    for h in embs:
        cfg.say("  " + " ".join(f"{i}->{v}" for i, v in enumerate(h.map)))
    return EXIT_OK


def _cmd_enumerate(cfg: RunConfig) -> int:
    t = jsonio.theory_from_json(_load(cfg.args.theory))
    if cfg.args.size is not None:
        sizes = [cfg.args.size]
    else:
        sizes = list(range(1, cfg.args.max_size + 1))
    out = []
    for n in sizes:
        out.extend(enumerate_models(t, n))
    cfg.payload["count"] = len(out)
    cfg.payload["models"] = [jsonio.structure_to_json(m) for m in out]
    cfg.say(f"{len(out)} model(s) of {t.name} for sizes {sizes}")
    return EXIT_OK


def _cmd_check_ap(cfg: RunConfig) -> int:
    k = jsonio.model_class_from_json(_load(cfg.args.klass), os.path.dirname(cfg.args.klass))
    verdict = check_ap(k, cfg.args.quintuple_bound, cfg.args.max_d, require_strong=cfg.args.strong)
    cfg.payload["status"] = verdict.status
    if verdict.status == HOLDS:
        cfg.payload["certificates"] = [
            jsonio.certificate_to_json(c, q) for q, c in verdict.witnesses
        ]
        cfg.say(f"amalgamation property holds for all quintuples up to size {cfg.args.quintuple_bound}")
        return EXIT_OK
    cfg.payload["counterexample"] = jsonio.quintuple_to_json(verdict.counterexample)
    if verdict.status == FAILS:
        cfg.say("amalgamation property fails; counterexample recorded")
        return EXIT_REFUTED
    cfg.say(f"undecided: no amalgam within size {cfg.args.max_d}, but the class allows larger members")
    return EXIT_UNKNOWN


def _cmd_pushout(cfg: RunConfig) -> int:
    q = jsonio.quintuple_from_json(_load(cfg.args.quintuple))
    if cfg.args.empty:
        d, iota, eta = pushout_empty(q)
        cfg.payload["pushout"] = jsonio.structure_to_json(d)
        cfg.payload["iota"] = list(iota.map)
        cfg.payload["eta"] = list(eta.map)
        cfg.say(f"bare-set pushout of size {d.size}")
        return EXIT_OK
    res = pushout_relational(q, cfg.args.closure)
    if isinstance(res, ClosureFailure):
        cfg.payload["status"] = "closure-failure"
        cfg.payload["reason"] = res.reason
        cfg.payload["pairs"] = [list(p) for p in res.pairs]
        cfg.say(f"closure failure: {res.reason}")
        return EXIT_REFUTED
    d, iota, eta = res
    cfg.payload["pushout"] = jsonio.structure_to_json(d)
    cfg.payload["iota"] = list(iota.map)
    cfg.payload["eta"] = list(eta.map)
    cfg.say(f"pushout of size {d.size}")
    return EXIT_OK


def _cmd_ec(cfg: RunConfig) -> int:
    k = jsonio.model_class_from_json(_load(cfg.args.klass), os.path.dirname(cfg.args.klass))
    if cfg.args.compat:
        t1 = jsonio.theory_from_json(_load(cfg.args.theory))
        verdict = check_ec_compatibility(
            t1, k, cfg.args.model_bound, cfg.args.ec_max_size, cfg.args.max_tuple
        )
        cfg.payload["status"] = verdict.status
        cfg.payload["bounded"] = verdict.bounded
        if verdict.failing_model is not None:
            cfg.payload["failingModel"] = jsonio.structure_to_json(verdict.failing_model)
            cfg.payload["phase"] = verdict.phase
        cfg.say(f"e.c.-compatibility: {verdict.status} (bounded verdict)")
        return {VERIFIED: EXIT_OK, REFUTED: EXIT_REFUTED, UNKNOWN: EXIT_UNKNOWN}[verdict.status]
    m = jsonio.structure_from_json(_load(cfg.args.structure))
    max_d = cfg.args.max_d if cfg.args.max_d is not None else k.bound
    verdict = is_ec(m, k, max_d, cfg.args.max_tuple)
    cfg.payload["status"] = verdict.status
    if verdict.counterexample is not None:
        c = verdict.counterexample
        cfg.payload["counterexample"] = {
            "structure": jsonio.structure_to_json(c.structure),
            "embedding": list(c.embedding.map),
            "sentence": pretty(c.sentence),
            "pullback": [list(p) for p in c.pullback],
        }
        cfg.say(f"refuted: {pretty(c.sentence)} holds in an extension but not here")
    else:
        cfg.say(f"existential completeness: {verdict.status} for the bounded class")
    return {VERIFIED: EXIT_OK, REFUTED: EXIT_REFUTED, UNKNOWN: EXIT_UNKNOWN}[verdict.status]


def _cmd_amalgam(cfg: RunConfig) -> int:
    if cfg.args.verify:
        cert, q = jsonio.certificate_from_json(_load(cfg.args.verify))
        try:
            verify_certificate(cert, q)
        except InvalidCertificate as exc:
            cfg.payload["status"] = "invalid"
            cfg.payload["reason"] = str(exc)
            cfg.say(f"certificate rejected: {exc}")
            return EXIT_REFUTED
        cfg.payload["status"] = "verified"
        cfg.say("certificate re-verified")
        return EXIT_OK

    q = jsonio.quintuple_from_json(_load(cfg.args.quintuple))
    if cfg.args.image_union or cfg.args.base_expansion:
        t1 = jsonio.theory_from_json(_load(cfg.args.t1))
        t2 = jsonio.theory_from_json(_load(cfg.args.t2))
        w = jsonio.witness_from_json(_load(cfg.args.witness), q)
        fn = image_union_amalgam if cfg.args.image_union else base_expansion_amalgam
        cert = fn(q, w, t1, t2)
        cfg.payload["certificate"] = jsonio.certificate_to_json(cert, q)
        cfg.say(f"constructive amalgam of size {cert.D.size}, strong={cert.strong}")
        return EXIT_OK
    if cfg.args.pushout_extension:
        t1 = jsonio.theory_from_json(_load(cfg.args.t1))
        t2 = jsonio.theory_from_json(_load(cfg.args.t2))
        res = pushout_extension_amalgam(q, t1, t2, cfg.args.closure)
        if isinstance(res, Inapplicable):
            cfg.payload["status"] = "inapplicable"
            cfg.payload["reason"] = res.reason
            cfg.say(f"inapplicable: {res.reason}")
            return EXIT_INPUT
        if isinstance(res, ClosureFailure):
            cfg.payload["status"] = "closure-failure"
            cfg.payload["reason"] = res.reason
            cfg.say(f"closure failure: {res.reason}")
            return EXIT_REFUTED
        cfg.payload["certificate"] = jsonio.certificate_to_json(res, q)
        cfg.say(f"pushout amalgam of size {res.D.size}, strong={res.strong}")
        return EXIT_OK

    k = jsonio.model_class_from_json(_load(cfg.args.klass), os.path.dirname(cfg.args.klass))
    h = (
        jsonio.model_class_from_json(_load(cfg.args.in_class), os.path.dirname(cfg.args.in_class))
        if cfg.args.in_class
        else k
    )
    res = find_amalgam(q, k, h, cfg.args.max_d, require_strong=cfg.args.strong)
    if isinstance(res, NoneUpTo):
        cfg.payload["status"] = "none-up-to"
        cfg.payload["bound"] = res.bound
        cfg.say(f"no amalgam within size {res.bound}")
        return EXIT_UNKNOWN
    cfg.payload["certificate"] = jsonio.certificate_to_json(res, q)
    cfg.say(f"amalgam of size {res.D.size}, strong={res.strong}")
    return EXIT_OK


def _cmd_combine(cfg: RunConfig) -> int:
    t1 = jsonio.theory_from_json(_load(cfg.args.t1))
    t2 = jsonio.theory_from_json(_load(cfg.args.t2))
    k0 = jsonio.model_class_from_json(_load(cfg.args.klass), os.path.dirname(cfg.args.klass))
    d0 = jsonio.structure_from_json(_load(cfg.args.d0))
    e = jsonio.structure_from_json(_load(cfg.args.e))
    f = jsonio.structure_from_json(_load(cfg.args.f))
    iota0 = Morphism(d0, e, _parse_map(cfg.args.iota0), k0.signature)
    eta0 = Morphism(d0, f, _parse_map(cfg.args.eta0), k0.signature)
    res = combine_over_base(d0, e, f, iota0, eta0, t1, t2, k0, cfg.bounds)
    if isinstance(res, NoneUpTo):
        cfg.payload["status"] = "none-up-to"
        cfg.payload["phase"] = res.phase
        cfg.say(f"no fusion within bounds (phase: {res.phase})")
        return EXIT_UNKNOWN
    cfg.payload["g"] = jsonio.structure_to_json(res.g)
    cfg.payload["iota"] = list(res.iota.map)
    cfg.payload["eta"] = list(res.eta.map)
    cfg.payload["ecStatus"] = res.ec_flag.status
    cfg.payload["rounds"] = res.trace.rounds
    cfg.payload["trace"] = _trace_json(res.trace)
    cfg.say(
        f"fused model of size {res.g.size} after {res.trace.rounds} round(s); "
        f"base reduct e.c.: {res.ec_flag.status}"
    )
    return EXIT_OK


def _trace_json(state) -> dict:
    """Replayable chain trace: one entry per round with the new structures,
    all new morphisms, and the path equations that were verified."""

    def link_json(link):
        return {
            "structure": jsonio.structure_to_json(link.structure),
            "embed": list(link.embed.map) if link.embed else None,
        }

    rounds = []
    for i, cross in enumerate(state.crosses):
        side = cross.to_side
        entry = {
            "side": side,
            "stage": link_json(state.links(side)[cross.to_idx]),
            "cross": {
                "map": list(cross.morphism.map),
                "fromSide": cross.from_side,
                "fromIndex": cross.from_idx,
                "toIndex": cross.to_idx,
            },
            "verifiedSquare": {
                "viaCross": [
                    state.seg_map(side, cross.to_idx, len(state.links(side)) - 1)[
                        cross.morphism.map[v]
                    ]
                    for v in state.path_map(cross.from_side, cross.from_idx)
                ],
                "direct": list(state.path_map(side)),
            },
        }
        if i % 2 == 0:
            rounds.append({"round": i // 2 + 1, "zig": entry})
        else:
            rounds[-1]["zag"] = entry
    return {
        "base": jsonio.structure_to_json(state.d0),
        "start": {"e": link_json(state.e_links[0]), "f": link_json(state.f_links[0])},
        "saturation": {
            "e": [link_json(l) for l in state.e_links[1 : len(state.e_links) - sum(1 for c in state.crosses if c.to_side == "e")]],
            "f": [link_json(l) for l in state.f_links[1 : len(state.f_links) - sum(1 for c in state.crosses if c.to_side == "f")]],
        },
        "rounds": rounds,
        "roundCount": state.rounds,
    }


def _cmd_union_ap(cfg: RunConfig) -> int:
    t1 = jsonio.theory_from_json(_load(cfg.args.t1))
    t2 = jsonio.theory_from_json(_load(cfg.args.t2))
    k0 = jsonio.model_class_from_json(_load(cfg.args.klass), os.path.dirname(cfg.args.klass))
    if cfg.args.quintuple:
        q = jsonio.quintuple_from_json(_load(cfg.args.quintuple))
        res = amalgamate_union(q, t1, t2, k0, cfg.bounds)
        if isinstance(res, NoneUpTo):
            cfg.payload["status"] = "none-up-to"
            cfg.payload["phase"] = res.phase
            cfg.say(f"no amalgam within bounds (phase: {res.phase})")
            return EXIT_UNKNOWN
        cfg.payload["certificate"] = jsonio.certificate_to_json(res, q)
        cfg.say(f"union amalgam of size {res.D.size}, strong={res.strong}")
        return EXIT_OK
    results = []
    status = HOLDS
    for q in quintuples_of_union_theory(t1, t2, cfg.args.quintuple_bound):
        res = amalgamate_union(q, t1, t2, k0, cfg.bounds)
        if isinstance(res, NoneUpTo):
            cfg.payload["status"] = "none-up-to"
            cfg.payload["quintuple"] = jsonio.quintuple_to_json(q)
            cfg.payload["phase"] = res.phase
            cfg.say(f"undecided quintuple (phase: {res.phase})")
            return EXIT_UNKNOWN
        results.append(jsonio.certificate_to_json(res, q))
    cfg.payload["status"] = status
    cfg.payload["certificates"] = results
    cfg.say(f"all {len(results)} bounded quintuples amalgamate")
    return EXIT_OK


def _parse_map(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip() != "")
    except ValueError as exc:
        raise InputError(f"bad map {text!r}: expected comma-separated integers") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="amalgam", description=__doc__, exit_on_error=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("human", "json"), default="human")
        p.add_argument("--output", default=None)
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("eval", exit_on_error=False)
    p.add_argument("--structure", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--env", default="")
    common(p)

    p = sub.add_parser("embeddings", exit_on_error=False)
    p.add_argument("--dom", required=True)
    p.add_argument("--cod", required=True)
    p.add_argument("--over", default=None)
    p.add_argument("--limit", type=int, default=None)
    common(p)

    p = sub.add_parser("enumerate", exit_on_error=False)
    p.add_argument("--theory", required=True)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--max-size", type=int, default=3)
    common(p)

    p = sub.add_parser("check-ap", exit_on_error=False)
    p.add_argument("--class", dest="klass", required=True)
    p.add_argument("--quintuple-bound", type=int, default=2)
    p.add_argument("--max-d", type=int, default=4)
    p.add_argument("--strong", action="store_true")
    common(p)

    p = sub.add_parser("pushout", exit_on_error=False)
    p.add_argument("--quintuple", required=True)
    p.add_argument("--closure", default=None)
    p.add_argument("--empty", action="store_true")
    common(p)

    p = sub.add_parser("ec", exit_on_error=False)
    p.add_argument("--structure", default=None)
    p.add_argument("--class", dest="klass", required=True)
    p.add_argument("--compat", action="store_true")
    p.add_argument("--theory", default=None)
    p.add_argument("--model-bound", type=int, default=2)
    p.add_argument("--ec-max-size", type=int, default=4)
    p.add_argument("--max-d", type=int, default=None)
    p.add_argument("--max-tuple", type=int, default=4)
    common(p)

    p = sub.add_parser("amalgam", exit_on_error=False)
    p.add_argument("--quintuple", default=None)
    p.add_argument("--class", dest="klass", default=None)
    p.add_argument("--in-class", dest="in_class", default=None)
    p.add_argument("--max-d", type=int, default=4)
    p.add_argument("--strong", action="store_true")
    p.add_argument("--verify", default=None)
    p.add_argument("--image-union", action="store_true")
    p.add_argument("--base-expansion", action="store_true")
    p.add_argument("--pushout-extension", action="store_true")
    p.add_argument("--witness", default=None)
    p.add_argument("--t1", default=None)
    p.add_argument("--t2", default=None)
    p.add_argument("--closure", default=None)
    common(p)

    p = sub.add_parser("combine", exit_on_error=False)
    p.add_argument("--d0", required=True)
    p.add_argument("--e", required=True)
    p.add_argument("--f", required=True)
    p.add_argument("--iota0", required=True)
    p.add_argument("--eta0", required=True)
    p.add_argument("--t1", required=True)
    p.add_argument("--t2", required=True)
    p.add_argument("--class", dest="klass", required=True)
    _bounds_flags(p)
    common(p)

    p = sub.add_parser("union-ap", exit_on_error=False)
    p.add_argument("--quintuple", default=None)
    p.add_argument("--quintuple-bound", type=int, default=2)
    p.add_argument("--t1", required=True)
    p.add_argument("--t2", required=True)
    p.add_argument("--class", dest="klass", required=True)
    _bounds_flags(p)
    common(p)

    return parser


def _bounds_flags(p) -> None:
    p.add_argument("--max-model-size", type=int, default=4)
    p.add_argument("--max-amalgam-size", type=int, default=None)
    p.add_argument("--max-d", type=int, default=4)
    p.add_argument("--max-tuple", type=int, default=4)
    p.add_argument("--max-rounds", type=int, default=8)
    p.add_argument("--size-budget", type=int, default=None)


_COMMANDS = {
    "eval": _cmd_eval,
    "embeddings": _cmd_embeddings,
    "enumerate": _cmd_enumerate,
    "check-ap": _cmd_check_ap,
    "pushout": _cmd_pushout,
    "ec": _cmd_ec,
    "amalgam": _cmd_amalgam,
    "combine": _cmd_combine,
    "union-ap": _cmd_union_ap,
}

_REJECTED = (
    HypothesisFailure,
    InvalidCertificate,
    InvalidWitness,
    InvalidQuintuple,
    WellDefinednessFailure,
    InducedRelationConflict,
)


def run(cfg: RunConfig) -> int:
    """Dispatch one command and write its report; returns the exit code."""
    try:
        code = _COMMANDS[cfg.command](cfg)
    except (VerificationFailure, AssertionFailure) as exc:
        cfg.payload["error"] = str(exc)
        cfg.say(f"internal verification failure: {exc}")
        code = EXIT_INTERNAL
    except InapplicableError as exc:
        cfg.payload["error"] = str(exc)
        cfg.say(f"inapplicable: {exc}")
        code = EXIT_INPUT
    except _REJECTED as exc:
        cfg.payload["error"] = str(exc)
        cfg.say(f"rejected: {exc}")
        code = EXIT_REFUTED
    except AmalgamError as exc:
        cfg.payload["error"] = str(exc)
        cfg.say(f"input error: {exc}")
        code = EXIT_INPUT
    # the workers knob must never show in the report: output bytes are
    # identical for identical inputs regardless of it
    report = {
        "command": cfg.command,
        "bounds": cfg.bounds.as_dict(),
        "exit": code,
        **cfg.payload,
    }
    if cfg.format == "json":
        text = jsonio.dumps(report)
    else:
        text = "\n".join(cfg.lines) + "\n" if cfg.lines else ""
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except (argparse.ArgumentError, SystemExit):
        return EXIT_INPUT
    if ns.workers < 1:
        sys.stderr.write("workers must be >= 1\n")
        return EXIT_INPUT
    for flag in ("max_model_size", "max_amalgam_size", "max_d", "max_tuple",
                 "size_budget", "quintuple_bound", "limit", "size", "max_size",
                 "model_bound", "ec_max_size"):
        value = getattr(ns, flag, None)
        if value is not None and value < 1:
            sys.stderr.write(f"--{flag.replace('_', '-')} must be >= 1\n")
            return EXIT_INPUT
    cfg = RunConfig(
        command=ns.command,
        args=ns,
        bounds=_bounds_from(ns),
        workers=ns.workers,
        output=ns.output,
        format=ns.format,
    )
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
