"""Loading and dumping the JSON file formats.

Structure files: {"signature": {...}, "size": n, "relations": {...},
"functions": {...}, "constants": {...}}, where a unary function is an
index-ordered output array and higher arities use [[args...], out] pairs.
Unknown fields are rejected everywhere.  Dumps are deterministic: sorted
keys, sorted tuple lists, two-space indent.
"""

from __future__ import annotations

import json
import os
from typing import Any

from .amalgamation import (
    AmalgamCertificate,
    SubcompatibleWitness,
    AmalgamationSpan,
    verify_certificate,
)
from .classes import ModelClass
from .core import FinStructure, Signature
from .errors import AmalgamError, InputError
from .logic import Theory, parse_sentence, pretty
from .morphisms import Morphism


def _reject_unknown(obj: dict, allowed: set[str], what: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise InputError(f"unknown fields {sorted(unknown)} in {what}")


def signature_from_json(obj: Any) -> Signature:
    if not isinstance(obj, dict):
        raise InputError("a signature must be a JSON object")
    _reject_unknown(obj, {"relations", "functions", "constants"}, "signature")
    try:
        return Signature(
            relations=dict(obj.get("relations", {})),
            functions=dict(obj.get("functions", {})),
            constants=frozenset(obj.get("constants", [])),
        )
    except AmalgamError as exc:
        raise InputError(f"bad signature: {exc}") from exc


def signature_to_json(sig: Signature) -> dict:
    return {
        "relations": {n: sig.relations[n] for n in sorted(sig.relations)},
        "functions": {n: sig.functions[n] for n in sorted(sig.functions)},
        "constants": sorted(sig.constants),
    }


def structure_from_json(obj: Any) -> FinStructure:
    if not isinstance(obj, dict):
        raise InputError("a structure must be a JSON object")
    _reject_unknown(obj, {"signature", "size", "relations", "functions", "constants"}, "structure")
    for required in ("signature", "size"):
        if required not in obj:
            raise InputError(f"structure is missing the {required!r} field")
    sig = signature_from_json(obj["signature"])
    size = obj["size"]
    relations = {}
    for name, rows in (obj.get("relations") or {}).items():
        try:
            relations[name] = {tuple(row) for row in rows}
        except TypeError as exc:
            raise InputError(f"relation {name} must be an array of integer arrays") from exc
    functions = {}
    for name, table in (obj.get("functions") or {}).items():
        arity = sig.functions.get(name)
        if arity is None:
            raise InputError(f"function {name} interpreted but not declared")
        if arity == 1:
            if not isinstance(table, list) or not all(isinstance(v, int) for v in table):
                raise InputError(f"unary function {name} must be an index-ordered output array")
            functions[name] = {(i,): v for i, v in enumerate(table)}
        else:
            try:
                functions[name] = {tuple(args): out for args, out in table}
            except (TypeError, ValueError) as exc:
                raise InputError(f"function {name} must be an array of [args, out] pairs") from exc
    constants = dict(obj.get("constants") or {})
    try:
        return FinStructure(sig, size, relations=relations, functions=functions, constants=constants)
    except AmalgamError as exc:
        raise InputError(f"bad structure: {exc}") from exc


def structure_to_json(m: FinStructure) -> dict:
    functions: dict[str, Any] = {}
    for name in sorted(m.sig.functions):
        if m.sig.functions[name] == 1:
            functions[name] = [m.functions[name][(i,)] for i in m.universe]
        else:
            functions[name] = [
                [list(args), out] for args, out in sorted(m.functions[name].items())
            ]
    return {
        "signature": signature_to_json(m.sig),
        "size": m.size,
        "relations": {
            name: [list(t) for t in sorted(m.relations[name])] for name in sorted(m.sig.relations)
        },
        "functions": functions,
        "constants": {name: m.constants[name] for name in sorted(m.sig.constants)},
    }


def theory_from_json(obj: Any) -> Theory:
    if not isinstance(obj, dict):
        raise InputError("a theory must be a JSON object")
    _reject_unknown(obj, {"name", "signature", "sentences"}, "theory")
    sig = signature_from_json(obj.get("signature", {}))
    try:
        sentences = tuple(parse_sentence(text, sig) for text in obj.get("sentences", []))
        return Theory(obj.get("name", "theory"), sig, sentences)
    except AmalgamError as exc:
        raise InputError(f"bad theory: {exc}") from exc


def theory_to_json(t: Theory) -> dict:
    return {
        "name": t.name,
        "signature": signature_to_json(t.sig),
        "sentences": [pretty(s) for s in t.sentences],
    }


def model_class_from_json(obj: Any, base_dir: str = ".") -> ModelClass:
    if not isinstance(obj, dict):
        raise InputError("a model class must be a JSON object")
    kind = obj.get("kind")
    if kind == "explicit":
        _reject_unknown(obj, {"kind", "structures"}, "model class")
        structures = [structure_from_json(s) for s in obj.get("structures", [])]
        try:
            return ModelClass.explicit(structures)
        except (AmalgamError, ValueError) as exc:
            raise InputError(f"bad explicit class: {exc}") from exc
    if kind == "bounded":
        _reject_unknown(obj, {"kind", "theory", "maxSize"}, "model class")
        theory = obj.get("theory")
        if isinstance(theory, str):
            theory = load_json(os.path.join(base_dir, theory))
        t = theory_from_json(theory)
        max_size = obj.get("maxSize")
        if not isinstance(max_size, int) or max_size < 1:
            raise InputError("a bounded class needs a positive integer maxSize")
        return ModelClass.bounded(t, max_size)
    raise InputError("a model class must have kind 'explicit' or 'bounded'")


def model_class_to_json(k: ModelClass) -> dict:
    if k.kind == "explicit":
        return {"kind": "explicit", "structures": [structure_to_json(m) for m in k.structures]}
    return {"kind": "bounded", "theory": theory_to_json(k.theory), "maxSize": k.max_size}


def morphism_from_json(obj: Any) -> Morphism:
    if not isinstance(obj, dict):
        raise InputError("a morphism must be a JSON object")
    _reject_unknown(obj, {"dom", "cod", "over", "map"}, "morphism")
    try:
        dom = structure_from_json(obj["dom"])
        cod = structure_from_json(obj["cod"])
        over = signature_from_json(obj["over"]) if "over" in obj else dom.sig
        return Morphism(dom, cod, tuple(obj["map"]), over)
    except (KeyError, AmalgamError) as exc:
        raise InputError(f"bad morphism: {exc}") from exc


def morphism_to_json(h: Morphism) -> dict:
    return {
        "dom": structure_to_json(h.dom),
        "cod": structure_to_json(h.cod),
        "over": signature_to_json(h.over),
        "map": list(h.map),
    }


def quintuple_from_json(obj: Any) -> AmalgamationSpan:
    if not isinstance(obj, dict):
        raise InputError("a quintuple must be a JSON object")
    _reject_unknown(obj, {"A", "B", "C", "alpha", "beta"}, "quintuple")
    try:
        a = structure_from_json(obj["A"])
        b = structure_from_json(obj["B"])
        c = structure_from_json(obj["C"])
        alpha = Morphism(c, a, tuple(obj["alpha"]), c.sig)
        beta = Morphism(c, b, tuple(obj["beta"]), c.sig)
        return AmalgamationSpan(a, b, c, alpha, beta)
    except (KeyError, AmalgamError) as exc:
        raise InputError(f"bad quintuple: {exc}") from exc


def quintuple_to_json(q: AmalgamationSpan) -> dict:
    return {
        "A": structure_to_json(q.A),
        "B": structure_to_json(q.B),
        "C": structure_to_json(q.C),
        "alpha": list(q.alpha.map),
        "beta": list(q.beta.map),
    }


def certificate_to_json(c: AmalgamCertificate, q: AmalgamationSpan) -> dict:
    """Self-contained replay payload; "verified" is set only because the
    certificate re-verified at dump time."""
    verify_certificate(c, q)
    return {
        "quintuple": quintuple_to_json(q),
        "D": structure_to_json(c.D),
        "iota": list(c.iota.map),
        "eta": list(c.eta.map),
        "strong": c.strong,
        "verified": True,
    }


def certificate_from_json(obj: Any) -> tuple[AmalgamCertificate, AmalgamationSpan]:
    if not isinstance(obj, dict):
        raise InputError("a certificate must be a JSON object")
    _reject_unknown(obj, {"quintuple", "D", "iota", "eta", "strong", "verified"}, "certificate")
    try:
        q = quintuple_from_json(obj["quintuple"])
        d = structure_from_json(obj["D"])
        iota = Morphism(q.A, d, tuple(obj["iota"]), q.sig)
        eta = Morphism(q.B, d, tuple(obj["eta"]), q.sig)
        return AmalgamCertificate(d, iota, eta, bool(obj["strong"])), q
    except (KeyError, AmalgamError) as exc:
        raise InputError(f"bad certificate: {exc}") from exc


def witness_from_json(obj: Any, q: AmalgamationSpan) -> SubcompatibleWitness:
    if not isinstance(obj, dict):
        raise InputError("a witness must be a JSON object")
    _reject_unknown(obj, {"D0", "E", "F", "alpha1", "beta1", "iota0", "eta0"}, "witness")
    try:
        d0 = structure_from_json(obj["D0"])
        e = structure_from_json(obj["E"])
        f = structure_from_json(obj["F"])
        l0 = d0.sig
        return SubcompatibleWitness(
            d0,
            e,
            f,
            alpha1=Morphism(q.A, d0, tuple(obj["alpha1"]), l0),
            beta1=Morphism(q.B, d0, tuple(obj["beta1"]), l0),
            iota0=Morphism(d0, e, tuple(obj["iota0"]), l0),
            eta0=Morphism(d0, f, tuple(obj["eta0"]), l0),
        )
    except (KeyError, AmalgamError) as exc:
        raise InputError(f"bad witness: {exc}") from exc


def witness_to_json(w: SubcompatibleWitness) -> dict:
    return {
        "D0": structure_to_json(w.d0),
        "E": structure_to_json(w.e),
        "F": structure_to_json(w.f),
        "alpha1": list(w.alpha1.map),
        "beta1": list(w.beta1.map),
        "iota0": list(w.iota0.map),
        "eta0": list(w.eta0.map),
    }


def load_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
