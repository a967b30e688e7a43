"""Amalgamation spans, amalgam search and certification, pushouts, and the
constructive amalgams for universal theories over a shared base language.

Every positive answer is returned as a machine-checkable certificate and is
re-verified from scratch before being handed out.  Plain amalgam search
accepts any commuting cospan; strong search additionally requires the two
images to meet exactly in the shared part (pass require_strong=True), which
is also the faithful procedure for the strong amalgamation property.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .classes import ModelClass, contains, enumerate_models, iterate
from .core import (
    EMPTY_SIGNATURE,
    FinStructure,
    Signature,
    expand,
    reduct,
    sig_intersect,
    sig_minus,
    sig_union,
)
from .errors import (
    InapplicableError,
    InducedRelationConflict,
    InvalidCertificate,
    InvalidQuintuple,
    InvalidWitness,
    MembershipError,
    NotRelational,
    SignatureMismatch,
    UnknownSymbol,
    VerificationFailure,
    WellDefinednessFailure,
)
from .logic import (
    Eq,
    Exists,
    ForAll,
    Formula,
    Func,
    Implies,
    Not,
    Or,
    And,
    Rel,
    Theory,
    UNIVERSAL,
    Var,
    classify,
    models_theory,
    parse_sentence,
    theory_union,
)
from .morphisms import (
    Morphism,
    automorphisms,
    compose,
    enumerate_embeddings,
    verify_embedding,
)
from .theories import endomorphism_axiom
from .verdicts import (
    Bounds,
    ClosureFailure,
    FAILS,
    HOLDS,
    Inapplicable,
    NoneUpTo,
    UNKNOWN,
)


@dataclass(frozen=True)
class AmalgamationSpan:
    """A span A <- C -> B of verified embeddings over a common signature."""

    A: FinStructure
    B: FinStructure
    C: FinStructure
    alpha: Morphism
    beta: Morphism

    def __post_init__(self):
        sig = self.C.sig
        if self.A.sig != sig or self.B.sig != sig:
            raise InvalidQuintuple("A, B and C must share a signature")
        if self.alpha.dom != self.C or self.alpha.cod != self.A:
            raise InvalidQuintuple("alpha must map C into A")
        if self.beta.dom != self.C or self.beta.cod != self.B:
            raise InvalidQuintuple("beta must map C into B")
        if self.alpha.over != sig or self.beta.over != sig:
            raise InvalidQuintuple("alpha and beta must be checked over the common signature")
        if not verify_embedding(self.alpha):
            raise InvalidQuintuple("alpha is not an embedding")
        if not verify_embedding(self.beta):
            raise InvalidQuintuple("beta is not an embedding")

    @property
    def sig(self) -> Signature:
        return self.C.sig


@dataclass(frozen=True)
class AmalgamCertificate:
    """An amalgamating structure with its two commuting insertions."""

    D: FinStructure
    iota: Morphism
    eta: Morphism
    strong: bool


@dataclass(frozen=True)
class ApVerdict:
    status: str  # holds | fails | unknown
    witnesses: tuple = ()
    counterexample: AmalgamationSpan | None = None
    bound: int = 0

    def __bool__(self):
        return self.status == HOLDS


def _is_strong(q: AmalgamationSpan, iota: Morphism, eta: Morphism) -> bool:
    shared = set(compose(q.alpha, iota).map)
    return set(iota.map) & set(eta.map) == shared


def verify_certificate(
    c: AmalgamCertificate,
    q: AmalgamationSpan,
    h: ModelClass | None = None,
    theory: Theory | None = None,
) -> None:
    """Re-verify a certificate from scratch; raise InvalidCertificate if any
    condition fails."""
    if c.iota.dom != q.A or c.eta.dom != q.B:
        raise InvalidCertificate("insertions must start at A and B")
    if c.iota.cod != c.D or c.eta.cod != c.D:
        raise InvalidCertificate("insertions must land in D")
    if c.iota.over != q.sig or c.eta.over != q.sig:
        raise InvalidCertificate("insertions must be checked over the quintuple signature")
    if not verify_embedding(c.iota):
        raise InvalidCertificate("iota is not an embedding")
    if not verify_embedding(c.eta):
        raise InvalidCertificate("eta is not an embedding")
    if compose(q.alpha, c.iota).map != compose(q.beta, c.eta).map:
        raise InvalidCertificate("the amalgamation square does not commute")
    if c.strong != _is_strong(q, c.iota, c.eta):
        raise InvalidCertificate("the strong flag does not match the images")
    if h is not None and not contains(h, c.D):
        raise InvalidCertificate("D does not belong to the target class")
    if theory is not None and not models_theory(c.D, theory):
        raise InvalidCertificate("D is not a model of the target theory")


def certificate_ok(c: AmalgamCertificate, q: AmalgamationSpan, **kw) -> bool:
    try:
        verify_certificate(c, q, **kw)
        return True
    except InvalidCertificate:
        return False


def is_strong(c: AmalgamCertificate, q: AmalgamationSpan) -> bool:
    """Whether the certificate's images meet exactly in the image of C.

    The certificate must be valid for q as given, its strong flag included.
    """
    verify_certificate(c, q)
    return _is_strong(q, c.iota, c.eta)


def find_amalgam(
    q: AmalgamationSpan,
    k: ModelClass,
    h: ModelClass,
    max_d: int,
    require_strong: bool = False,
) -> AmalgamCertificate | NoneUpTo:
    """First amalgam certificate in canonical order with D in h of size
    <= max_d; candidates are scanned by D ascending, then iota, then eta
    in lexicographic map order."""
    for name, s in (("A", q.A), ("B", q.B), ("C", q.C)):
        if not contains(k, s):
            raise MembershipError(f"{name} does not belong to the amalgamation class")
    for d in iterate(h, max_d):
        for iota in enumerate_embeddings(q.A, d, q.sig):
            ai = compose(q.alpha, iota).map
            for eta in enumerate_embeddings(q.B, d, q.sig):
                if compose(q.beta, eta).map != ai:
                    continue
                strong = _is_strong(q, iota, eta)
                if require_strong and not strong:
                    continue
                cert = AmalgamCertificate(d, iota, eta, strong)
                verify_certificate(cert, q, h=h)
                return cert
    return NoneUpTo(max_d, phase="amalgam")


_QUINTUPLE_CACHE: dict = {}


def enumerate_quintuples(k: ModelClass, bound: int) -> tuple[AmalgamationSpan, ...]:
    """All spans with |A|, |B|, |C| <= bound, one per isomorphism class of
    quintuples (isomorphisms act by automorphisms of the three canonical
    representatives, with the same C-component on both legs)."""
    key = (k, bound)
    hit = _QUINTUPLE_CACHE.get(key)
    if hit is not None:
        return hit
    members = iterate(k, bound)
    sig = k.signature
    out: list[AmalgamationSpan] = []
    for c in members:
        auts_c = [a.map for a in automorphisms(c)]
        inv_c = []
        for g in auts_c:
            inv = [0] * len(g)
            for x, y in enumerate(g):
                inv[y] = x
            inv_c.append(tuple(inv))
        for a in members:
            embs_a = enumerate_embeddings(c, a, sig)
            if not embs_a:
                continue
            auts_a = [g.map for g in automorphisms(a)]
            for b in members:
                embs_b = enumerate_embeddings(c, b, sig)
                if not embs_b:
                    continue
                auts_b = [g.map for g in automorphisms(b)]
                seen: set = set()
                for alpha in embs_a:
                    for beta in embs_b:
                        rep = min(
                            (
                                tuple(ga[alpha.map[gci[x]]] for x in range(c.size)),
                                tuple(gb[beta.map[gci[x]]] for x in range(c.size)),
                            )
                            for gci in inv_c
                            for ga in auts_a
                            for gb in auts_b
                        )
                        if rep in seen:
                            continue
                        seen.add(rep)
                        out.append(AmalgamationSpan(a, b, c, alpha, beta))
    result = tuple(out)
    _QUINTUPLE_CACHE[key] = result
    return result


def quintuples_of_union_theory(t1: Theory, t2: Theory, bound: int) -> tuple[AmalgamationSpan, ...]:
    """All bounded spans of models of the union theory, up to isomorphism."""
    return enumerate_quintuples(ModelClass.bounded(theory_union(t1, t2), bound), bound)


_AP_CACHE: dict = {}


def check_ap(
    k: ModelClass,
    quintuple_bound: int,
    max_d: int,
    require_strong: bool = False,
) -> ApVerdict:
    """Amalgamation property of the bounded class.

    Holds carries one certificate per quintuple; a failure is FailsAt only
    when max_d covers the class's own size bound (the search was exhaustive
    for the class), Unknown otherwise.
    """
    key = (k, quintuple_bound, max_d, require_strong)
    hit = _AP_CACHE.get(key)
    if hit is not None:
        return hit
    witnesses = []
    verdict = None
    for q in enumerate_quintuples(k, quintuple_bound):
        res = find_amalgam(q, k, k, max_d, require_strong=require_strong)
        if isinstance(res, NoneUpTo):
            exhaustive = max_d >= k.bound
            verdict = ApVerdict(
                FAILS if exhaustive else UNKNOWN, counterexample=q, bound=max_d
            )
            break
        witnesses.append((q, res))
    if verdict is None:
        verdict = ApVerdict(HOLDS, witnesses=tuple(witnesses), bound=max_d)
    _AP_CACHE[key] = verdict
    return verdict


def check_superamalgamation(c: AmalgamCertificate, q: AmalgamationSpan, rel: str) -> bool:
    """Every cross fact rel(iota(a), eta(b)) (either direction) must be
    interpolated through some element of C."""
    if q.sig.relations.get(rel) != 2:
        raise UnknownSymbol(f"{rel} is not a declared binary relation")
    rd = c.D.relations[rel]
    ra, rb = q.A.relations[rel], q.B.relations[rel]
    for a in q.A.universe:
        for b in q.B.universe:
            if (c.iota.map[a], c.eta.map[b]) in rd:
                if not any(
                    (a, q.alpha.map[x]) in ra and (q.beta.map[x], b) in rb
                    for x in q.C.universe
                ):
                    return False
            if (c.eta.map[b], c.iota.map[a]) in rd:
                if not any(
                    (b, q.beta.map[x]) in rb and (q.alpha.map[x], a) in ra
                    for x in q.C.universe
                ):
                    return False
    return True


# --------------------------------------------------------------------------
# Pushouts


def _pushout_maps(q: AmalgamationSpan):
    """Universe of size |A| + |B| - |C| with the two insertions: A keeps its
    labels, B's non-shared elements follow in ascending order."""
    beta_pre = {q.beta.map[x]: x for x in q.C.universe}
    iota_map = tuple(range(q.A.size))
    eta_map = []
    nxt = q.A.size
    for b in q.B.universe:
        if b in beta_pre:
            eta_map.append(q.alpha.map[beta_pre[b]])
        else:
            eta_map.append(nxt)
            nxt += 1
    return nxt, iota_map, tuple(eta_map)


def pushout_empty(q: AmalgamationSpan) -> tuple[FinStructure, Morphism, Morphism]:
    """The bare-set pushout: A and B glued exactly along C, no structure."""
    size, iota_map, eta_map = _pushout_maps(q)
    d = FinStructure(EMPTY_SIGNATURE, size)
    return (
        d,
        Morphism(q.A, d, iota_map, EMPTY_SIGNATURE),
        Morphism(q.B, d, eta_map, EMPTY_SIGNATURE),
    )


def _transitive_closure(pairs: set, size: int) -> set:
    closed = set(pairs)
    changed = True
    while changed:
        changed = False
        for x, y in list(closed):
            for z in range(size):
                if (y, z) in closed and (x, z) not in closed:
                    closed.add((x, z))
                    changed = True
    return closed


def pushout_relational(
    q: AmalgamationSpan, closure: str | None = None
) -> tuple[FinStructure, Morphism, Morphism] | ClosureFailure:
    """Union-of-images pushout of relational structures.

    With closure naming a binary relation, that relation is transitively
    closed afterwards; the result is rejected as a ClosureFailure when the
    closure breaks antisymmetry or makes an insertion stop reflecting.
    """
    sig = q.sig
    if not sig.is_relational:
        raise NotRelational("pushouts are only constructed over relational signatures")
    if closure is not None and sig.relations.get(closure) != 2:
        raise UnknownSymbol(f"{closure} is not a declared binary relation")
    size, iota_map, eta_map = _pushout_maps(q)
    rels = {}
    for name in sig.relations:
        arity = sig.relations[name]
        tuples = {tuple(iota_map[x] for x in t) for t in q.A.relations[name]}
        tuples |= {tuple(eta_map[x] for x in t) for t in q.B.relations[name]}
        rels[name] = tuples
    if closure is not None:
        rels[closure] = _transitive_closure(rels[closure], size)
        bad = sorted(
            (x, y) for (x, y) in rels[closure] if x != y and (y, x) in rels[closure]
        )
        if bad:
            return ClosureFailure("closure breaks antisymmetry", tuple(bad))
    d = FinStructure(sig, size, relations=rels)
    iota = Morphism(q.A, d, iota_map, sig)
    eta = Morphism(q.B, d, eta_map, sig)
    if closure is not None:
        if not verify_embedding(iota) or not verify_embedding(eta):
            return ClosureFailure("closure makes an insertion stop reflecting")
    else:
        if not verify_embedding(iota) or not verify_embedding(eta):
            raise VerificationFailure("pushout insertions failed to embed")
    return d, iota, eta


def reduct_quintuple(q: AmalgamationSpan, s0: Signature) -> AmalgamationSpan:
    """The same span with every structure and map cut down to s0."""
    a0, b0, c0 = reduct(q.A, s0), reduct(q.B, s0), reduct(q.C, s0)
    return AmalgamationSpan(
        a0, b0, c0, Morphism(c0, a0, q.alpha.map, s0), Morphism(c0, b0, q.beta.map, s0)
    )


def find_pushout_extending_amalgam(
    q: AmalgamationSpan,
    t1: Theory,
    k0: ModelClass,
    closure: str | None,
    max_d: int,
):
    """An amalgamating model of t1 whose base reduct extends the k0-pushout:
    the insertions, read over the base language, must factor as an embedding
    of the pushout.  Returns (certificate, pushout) or NoneUpTo."""
    l0 = k0.signature
    for name, s in (("A", q.A), ("B", q.B), ("C", q.C)):
        if not contains(k0, reduct(s, l0)):
            raise MembershipError(f"the base reduct of {name} is outside the base class")
    q0 = reduct_quintuple(q, l0)
    po = pushout_relational(q0, closure)
    if isinstance(po, ClosureFailure):
        raise InapplicableError(f"the base class has no pushout here: {po.reason}")
    p, ins_a, ins_b = po
    if not contains(k0, p):
        raise MembershipError("the pushout falls outside the base class; enlarge its bound")
    mod_t1 = ModelClass.bounded(t1, max_d)
    for d in iterate(mod_t1, max_d):
        d0 = reduct(d, l0)
        for iota in enumerate_embeddings(q.A, d, q.sig):
            ai = compose(q.alpha, iota).map
            for eta in enumerate_embeddings(q.B, d, q.sig):
                if compose(q.beta, eta).map != ai:
                    continue
                med = [None] * p.size
                for a in q.A.universe:
                    med[ins_a.map[a]] = iota.map[a]
                for b in q.B.universe:
                    med[ins_b.map[b]] = eta.map[b]
                mu = Morphism(p, d0, tuple(med), l0)
                if not verify_embedding(mu):
                    continue
                strong = _is_strong(q, iota, eta)
                cert = AmalgamCertificate(d, iota, eta, strong)
                verify_certificate(cert, q, theory=t1)
                return cert, (p, ins_a, ins_b)
    return NoneUpTo(max_d, phase="pushout-extension")


def check_ap_over_pushouts(
    t1: Theory,
    k0: ModelClass,
    closure: str | None,
    quintuple_bound: int,
    max_d: int,
) -> ApVerdict:
    """Amalgamation over base-class pushouts for the bounded surrogate
    Mod_{<=max_d}(t1); the surrogate class is exhausted at max_d, so a
    failure is reported as FailsAt (relative to the bound)."""
    mod_t1 = ModelClass.bounded(t1, max(quintuple_bound, max_d))
    witnesses = []
    for q in enumerate_quintuples(ModelClass.bounded(t1, quintuple_bound), quintuple_bound):
        res = find_pushout_extending_amalgam(q, t1, k0, closure, max_d)
        if isinstance(res, NoneUpTo):
            return ApVerdict(FAILS, counterexample=q, bound=max_d)
        witnesses.append((q, res[0]))
    return ApVerdict(HOLDS, witnesses=tuple(witnesses), bound=max_d)


# --------------------------------------------------------------------------
# Subcompatible witnesses (the data of common subcompatible amalgamation)


@dataclass(frozen=True)
class SubcompatibleWitness:
    """Base structure plus one model of each theory receiving it, with all
    composite-embedding conditions over both component languages."""

    d0: FinStructure
    e: FinStructure
    f: FinStructure
    alpha1: Morphism
    beta1: Morphism
    iota0: Morphism
    eta0: Morphism


def validate_witness(
    w: SubcompatibleWitness,
    q: AmalgamationSpan,
    t1: Theory,
    t2: Theory,
    k0: ModelClass,
) -> None:
    """All seven conditions of a subcompatible witness; raise InvalidWitness
    on the first failure."""
    l0 = k0.signature
    l1, l2 = t1.sig, t2.sig

    def embeds(m: Morphism, over: Signature, what: str):
        if m.over != over or not verify_embedding(m):
            raise InvalidWitness(f"{what} is not an embedding over the required language")

    if not contains(k0, w.d0):
        raise InvalidWitness("D0 is outside the base class")
    if not models_theory(w.e, t1):
        raise InvalidWitness("E is not a model of the first theory")
    if not models_theory(w.f, t2):
        raise InvalidWitness("F is not a model of the second theory")
    if w.alpha1.dom != q.A or w.alpha1.cod != w.d0:
        raise InvalidWitness("alpha1 must map A into D0")
    if w.beta1.dom != q.B or w.beta1.cod != w.d0:
        raise InvalidWitness("beta1 must map B into D0")
    embeds(w.alpha1, l0, "alpha1")
    embeds(w.beta1, l0, "beta1")
    if compose(q.alpha, w.alpha1).map != compose(q.beta, w.beta1).map:
        raise InvalidWitness("the witness square over C does not commute")
    if w.iota0.dom != w.d0 or w.iota0.cod != w.e:
        raise InvalidWitness("iota0 must map D0 into E")
    if w.eta0.dom != w.d0 or w.eta0.cod != w.f:
        raise InvalidWitness("eta0 must map D0 into F")
    embeds(w.iota0, l0, "iota0")
    embeds(w.eta0, l0, "eta0")
    for m, dom, cod, over, what in (
        (compose(w.alpha1, w.iota0), q.A, w.e, l1, "alpha1;iota0"),
        (compose(w.beta1, w.iota0), q.B, w.e, l1, "beta1;iota0"),
        (compose(w.alpha1, w.eta0), q.A, w.f, l2, "alpha1;eta0"),
        (compose(w.beta1, w.eta0), q.B, w.f, l2, "beta1;eta0"),
    ):
        lifted = Morphism(dom, cod, m.map, over)
        if not verify_embedding(lifted):
            raise InvalidWitness(f"{what} is not an embedding over the component language")


def find_subcompatible_witness(
    q: AmalgamationSpan,
    k0: ModelClass,
    t1: Theory,
    t2: Theory,
    bounds: Bounds,
) -> SubcompatibleWitness | NoneUpTo:
    """First witness in canonical order: D0 ascending, then E, then F, then
    the four morphisms lexicographically."""
    l0 = k0.signature
    if sig_intersect(t1.sig, t2.sig) != l0:
        raise SignatureMismatch("the base language must be the intersection of the two component languages")
    for d0 in iterate(k0, bounds.max_amalgam_size):
        pairs = []
        for alpha1 in enumerate_embeddings(q.A, d0, l0):
            aa = compose(q.alpha, alpha1).map
            for beta1 in enumerate_embeddings(q.B, d0, l0):
                if compose(q.beta, beta1).map == aa:
                    pairs.append((alpha1, beta1))
        if not pairs:
            continue
        for e_size in range(d0.size, bounds.max_model_size + 1):
            for e in enumerate_models(t1, e_size):
                # the e-side triples admissible for this model, in
                # lexicographic (alpha1, beta1, iota0) order
                triples = [
                    (alpha1, beta1, iota0)
                    for alpha1, beta1 in pairs
                    for iota0 in enumerate_embeddings(d0, e, l0)
                    if _component_embeds(q.A, alpha1, iota0, e, t1.sig)
                    and _component_embeds(q.B, beta1, iota0, e, t1.sig)
                ]
                if not triples:
                    continue
                for f_size in range(d0.size, bounds.max_model_size + 1):
                    for f in enumerate_models(t2, f_size):
                        etas = enumerate_embeddings(d0, f, l0)
                        if not etas:
                            continue
                        for alpha1, beta1, iota0 in triples:
                            for eta0 in etas:
                                if not _component_embeds(q.A, alpha1, eta0, f, t2.sig):
                                    continue
                                if not _component_embeds(q.B, beta1, eta0, f, t2.sig):
                                    continue
                                w = SubcompatibleWitness(d0, e, f, alpha1, beta1, iota0, eta0)
                                validate_witness(w, q, t1, t2, k0)
                                return w
    return NoneUpTo(bounds.max_amalgam_size, phase="witness")


def _component_embeds(src: FinStructure, first: Morphism, second: Morphism,
                      target: FinStructure, over: Signature) -> bool:
    composite = tuple(second.map[v] for v in first.map)
    return verify_embedding(Morphism(src, target, composite, over))


# --------------------------------------------------------------------------
# The constructive amalgams


def _check_universal(t: Theory, label: str) -> None:
    for s in t.sentences:
        if classify(s) != UNIVERSAL:
            raise InapplicableError(f"{label} must be a universal theory")


def image_union_amalgam(
    q: AmalgamationSpan, w: SubcompatibleWitness, t1: Theory, t2: Theory
) -> AmalgamCertificate:
    """Carve the amalgam out of the witness base as the union of the two
    images; unary functions glue along the insertions, relations pull back
    from E (first language) and F (second language)."""
    l1, l2 = t1.sig, t2.sig
    l0 = sig_intersect(l1, l2)
    l = sig_union(l1, l2)
    if q.sig != l:
        raise SignatureMismatch("the quintuple must live over the union language")
    if any(a >= 2 for a in l.functions.values()):
        raise InapplicableError("no language may contain a function symbol of arity >= 2")
    _check_universal(t1, "the first theory")
    _check_universal(t2, "the second theory")

    carrier = sorted(set(w.alpha1.map) | set(w.beta1.map))
    idx = {d: i for i, d in enumerate(carrier)}
    size = len(carrier)

    functions: dict[str, dict[tuple[int, ...], int]] = {}
    for name in l.functions:
        table: dict[tuple[int, ...], int] = {}
        for side, src, ins in (("A", q.A, w.alpha1), ("B", q.B, w.beta1)):
            for x in src.universe:
                key = (idx[ins.map[x]],)
                val = idx[ins.map[src.functions[name][(x,)]]]
                if key in table and table[key] != val:
                    raise WellDefinednessFailure(
                        f"the two clauses defining {name} disagree on a shared point"
                    )
                table[key] = val
        functions[name] = table

    constants: dict[str, int] = {}
    for name in l.constants:
        va = w.alpha1.map[q.A.constants[name]]
        vb = w.beta1.map[q.B.constants[name]]
        if va != vb:
            raise WellDefinednessFailure(f"the two clauses defining {name} disagree")
        constants[name] = idx[va]

    relations: dict[str, frozenset] = {}
    for name, arity in l.relations.items():
        from_e = from_f = None
        if name in l1.relations:
            from_e = frozenset(
                t
                for t in itertools.product(range(size), repeat=arity)
                if tuple(w.iota0.map[carrier[x]] for x in t) in w.e.relations[name]
            )
        if name in l2.relations:
            from_f = frozenset(
                t
                for t in itertools.product(range(size), repeat=arity)
                if tuple(w.eta0.map[carrier[x]] for x in t) in w.f.relations[name]
            )
        if from_e is not None and from_f is not None and from_e != from_f:
            raise InducedRelationConflict(
                f"E and F disagree on the shared relation {name} over the carved universe"
            )
        relations[name] = from_e if from_e is not None else from_f

    d_star = FinStructure(l, size, relations=relations, functions=functions, constants=constants)
    iota = Morphism(q.A, d_star, tuple(idx[w.alpha1.map[a]] for a in q.A.universe), l)
    eta = Morphism(q.B, d_star, tuple(idx[w.beta1.map[b]] for b in q.B.universe), l)
    cert = AmalgamCertificate(d_star, iota, eta, _is_strong(q, iota, eta))
    try:
        verify_certificate(cert, q, theory=theory_union(t1, t2))
    except InvalidCertificate as exc:
        raise InvalidWitness(f"the carved structure fails verification: {exc}") from exc
    return cert


def base_expansion_amalgam(
    q: AmalgamationSpan, w: SubcompatibleWitness, t1: Theory, t2: Theory
) -> AmalgamCertificate:
    """Expand the witness base itself: each extra relation of a component
    language pulls back along that side's insertion into its model."""
    l1, l2 = t1.sig, t2.sig
    l0 = sig_intersect(l1, l2)
    l = sig_union(l1, l2)
    if q.sig != l:
        raise SignatureMismatch("the quintuple must live over the union language")
    delta1 = sig_minus(l1, l0)
    delta2 = sig_minus(l2, l0)
    if not delta1.is_relational or not delta2.is_relational:
        raise NotRelational("both language differences must be purely relational")
    _check_universal(t1, "the first theory")
    _check_universal(t2, "the second theory")
    if w.d0.sig != l0:
        raise InvalidWitness("the witness base must live over the shared language")

    relations: dict[str, set] = {}
    n = w.d0.size
    for delta, ins, target in ((delta1, w.iota0, w.e), (delta2, w.eta0, w.f)):
        for name, arity in delta.relations.items():
            relations[name] = {
                t
                for t in itertools.product(range(n), repeat=arity)
                if tuple(ins.map[x] for x in t) in target.relations[name]
            }
    d = expand(w.d0, sig_union(delta1, delta2), relations=relations)
    iota = Morphism(q.A, d, w.alpha1.map, l)
    eta = Morphism(q.B, d, w.beta1.map, l)
    cert = AmalgamCertificate(d, iota, eta, _is_strong(q, iota, eta))
    try:
        verify_certificate(cert, q, theory=theory_union(t1, t2))
    except InvalidCertificate as exc:
        raise InvalidWitness(f"the expanded base fails verification: {exc}") from exc
    return cert


def _alpha_normal(f: Formula, env: dict | None = None, counter: list | None = None) -> Formula:
    """Rename bound variables canonically for alpha-equivalence tests."""
    env = env or {}
    counter = counter if counter is not None else [0]

    def term(t):
        if isinstance(t, Var):
            return Var(env.get(t.name, t.name))
        if isinstance(t, Func):
            return Func(t.name, tuple(term(a) for a in t.args))
        return t

    if isinstance(f, Rel):
        return Rel(f.name, tuple(term(a) for a in f.args))
    if isinstance(f, Eq):
        return Eq(term(f.left), term(f.right))
    if isinstance(f, Not):
        return Not(_alpha_normal(f.body, env, counter))
    if isinstance(f, And):
        return And(tuple(_alpha_normal(p, env, counter) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(_alpha_normal(p, env, counter) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(_alpha_normal(f.left, env, counter), _alpha_normal(f.right, env, counter))
    if isinstance(f, (ForAll, Exists)):
        fresh = f"v{counter[0]}"
        counter[0] += 1
        inner = dict(env)
        inner[f.var] = fresh
        body = _alpha_normal(f.body, inner, counter)
        return type(f)(fresh, body)
    raise TypeError(f"not a formula: {f!r}")


def _has_endo_axioms(t: Theory, fn: str, l0: Signature) -> bool:
    """Does t contain, up to bound-variable renaming, the preservation
    axiom of fn for every relation of the base language?"""
    normalized = {_alpha_normal(s) for s in t.sentences}
    for rel, arity in l0.relations.items():
        axiom = parse_sentence(endomorphism_axiom(rel, fn, arity), t.sig)
        if _alpha_normal(axiom) not in normalized:
            return False
    return True


def pushout_extension_amalgam(
    q: AmalgamationSpan, t1: Theory, t2: Theory, closure: str | None = None
) -> AmalgamCertificate | Inapplicable | ClosureFailure:
    """Take the base pushout itself as the amalgam: the unary functions of
    each language difference extend along the insertions (they are asserted
    to preserve the base structure), extra unary relations and constants
    glue by images."""
    l1, l2 = t1.sig, t2.sig
    l0 = sig_intersect(l1, l2)
    l = sig_union(l1, l2)
    if q.sig != l:
        raise SignatureMismatch("the quintuple must live over the union language")
    delta = sig_minus(l, l0)
    if any(a >= 2 for a in delta.functions.values()) or any(
        a >= 2 for a in delta.relations.values()
    ):
        return Inapplicable("a symbol outside the base language has arity >= 2")
    if not l0.is_relational:
        return Inapplicable("the base pushout needs a purely relational base language")
    for t in (t1, t2):
        for s in t.sentences:
            if classify(s) != UNIVERSAL:
                return Inapplicable(f"{t.name} is not a universal theory")
    for fn in sig_minus(l1, l0).functions:
        if not _has_endo_axioms(t1, fn, l0):
            return Inapplicable(f"{t1.name} does not assert that {fn} preserves the base structure")
    for fn in sig_minus(l2, l0).functions:
        if not _has_endo_axioms(t2, fn, l0):
            return Inapplicable(f"{t2.name} does not assert that {fn} preserves the base structure")
    t_union = theory_union(t1, t2)
    for name, s in (("A", q.A), ("B", q.B), ("C", q.C)):
        if not models_theory(s, t_union):
            raise MembershipError(f"{name} is not a model of the union theory")

    po = pushout_relational(reduct_quintuple(q, l0), closure)
    if isinstance(po, ClosureFailure):
        return po
    p, ins_a, ins_b = po

    functions: dict[str, dict[tuple[int, ...], int]] = {}
    for name in delta.functions:
        table: dict[tuple[int, ...], int] = {}
        for src, ins in ((q.A, ins_a), (q.B, ins_b)):
            for x in src.universe:
                key = (ins.map[x],)
                val = ins.map[src.functions[name][(x,)]]
                if key in table and table[key] != val:
                    raise WellDefinednessFailure(
                        f"the two clauses defining {name} disagree on a shared point"
                    )
                table[key] = val
        functions[name] = table
    relations: dict[str, set] = {}
    for name in delta.relations:
        relations[name] = {
            (ins.map[x],)
            for src, ins in ((q.A, ins_a), (q.B, ins_b))
            for x in src.universe
            if (x,) in src.relations[name]
        }
    constants: dict[str, int] = {}
    for name in delta.constants:
        va = ins_a.map[q.A.constants[name]]
        vb = ins_b.map[q.B.constants[name]]
        if va != vb:
            raise WellDefinednessFailure(f"the two clauses defining {name} disagree")
        constants[name] = va

    d = expand(p, delta, relations=relations, functions=functions, constants=constants)
    iota = Morphism(q.A, d, ins_a.map, l)
    eta = Morphism(q.B, d, ins_b.map, l)
    cert = AmalgamCertificate(d, iota, eta, _is_strong(q, iota, eta))
    try:
        verify_certificate(cert, q, theory=t_union)
    except InvalidCertificate as exc:
        raise VerificationFailure(f"the extended pushout fails verification: {exc}") from exc
    return cert
