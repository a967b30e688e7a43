"""The zig-zag chain engine: a bounded surrogate for the compactness and
direct-limit arguments behind combining two theories over a shared base.

A chain run keeps two sides: models of the first theory connected by
embeddings over its language, models of the second likewise, plus
alternating cross embeddings over the base language.  Each step searches
directly for a finite model completing the next triangle (where the
original argument invokes compactness) and re-saturates the new tip to an
existentially complete base reduct.  A run stabilizes when the last two
cross maps are mutually inverse bijections up to the connecting
embeddings: the two sides have become isomorphic over the chain, the
finite stand-in for reaching the direct limit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .amalgamation import (
    AmalgamCertificate,
    AmalgamationSpan,
    _is_strong,
    check_ap,
    find_subcompatible_witness,
    verify_certificate,
)
from .classes import ModelClass, contains, enumerate_models
from .core import FinStructure, reduct, sig_intersect, sig_minus, sig_union, transport
from .ec import EcVerdict, ec_closure, is_ec
from .errors import (
    AssertionFailure,
    HypothesisFailure,
    VerificationFailure,
)
from .logic import Theory, classify, models_theory, OTHER, theory_union
from .morphisms import Morphism, compose, enumerate_embeddings, identity, verify_embedding
from .verdicts import Bounds, NoneUpTo, NotYet


@dataclass
class ChainLink:
    structure: FinStructure
    embed: Morphism | None  # from the previous structure on the same side


@dataclass
class CrossLink:
    morphism: Morphism
    from_side: str
    from_idx: int
    to_idx: int

    @property
    def to_side(self) -> str:
        return "f" if self.from_side == "e" else "e"


@dataclass
class ChainState:
    t1: Theory
    t2: Theory
    k0: ModelClass
    bounds: Bounds
    d0: FinStructure
    iota0: Morphism
    eta0: Morphism
    e_links: list[ChainLink] = field(default_factory=list)
    f_links: list[ChainLink] = field(default_factory=list)
    crosses: list[CrossLink] = field(default_factory=list)
    e_ec: EcVerdict | None = None
    f_ec: EcVerdict | None = None
    ap_status: str = "holds"
    rounds: int = 0

    def links(self, side: str) -> list[ChainLink]:
        return self.e_links if side == "e" else self.f_links

    def tip(self, side: str) -> FinStructure:
        return self.links(side)[-1].structure

    def base_map(self, side: str) -> tuple[int, ...]:
        return (self.iota0 if side == "e" else self.eta0).map

    def path_map(self, side: str, upto: int | None = None) -> tuple[int, ...]:
        """The composite map from the base structure to links[upto]."""
        links = self.links(side)
        upto = len(links) - 1 if upto is None else upto
        out = list(self.base_map(side))
        for link in links[1 : upto + 1]:
            out = [link.embed.map[v] for v in out]
        return tuple(out)

    def seg_map(self, side: str, start: int, end: int) -> tuple[int, ...]:
        """The composite map links[start] -> links[end] on one side."""
        links = self.links(side)
        out = list(range(links[start].structure.size))
        for link in links[start + 1 : end + 1]:
            out = [link.embed.map[v] for v in out]
        return tuple(out)


def verify_chain(state: ChainState) -> None:
    """Re-check every embedding and every composite path from the base to
    the current tips (the full diagram, not just the last square)."""
    l0 = state.k0.signature
    for side, theory in (("e", state.t1), ("f", state.t2)):
        links = state.links(side)
        for link in links[1:]:
            if link.embed.over != theory.sig or not verify_embedding(link.embed):
                raise VerificationFailure(f"a {side}-side connecting map is not an embedding")
    for cross in state.crosses:
        if cross.morphism.over != l0 or not verify_embedding(cross.morphism):
            raise VerificationFailure("a cross map is not an embedding over the base language")
        src = state.links(cross.from_side)
        dst = state.links(cross.to_side)
        if cross.morphism.dom != src[cross.from_idx].structure:
            raise VerificationFailure("a cross map starts at the wrong stage")
        if cross.morphism.cod != dst[cross.to_idx].structure:
            raise VerificationFailure("a cross map lands at the wrong stage")
        before = state.path_map(cross.from_side, cross.from_idx)
        after = state.seg_map(cross.to_side, cross.to_idx, len(dst) - 1)
        via = tuple(after[cross.morphism.map[v]] for v in before)
        direct = state.path_map(cross.to_side)
        if via != direct:
            raise VerificationFailure("a base-to-tip path through a cross map does not commute")


def saturate_ec(
    m: FinStructure, t: Theory, k0: ModelClass, bounds: Bounds
) -> tuple[FinStructure, Morphism] | NoneUpTo:
    """Extend m to a model of t with an existentially complete base reduct;
    the embedding is over t's full signature."""
    return ec_closure(m, t, k0, bounds.max_model_size, bounds.max_tuple)


def zigzag_step(state: ChainState, side: str) -> ChainState | NoneUpTo:
    """Extend one side: search jointly for the next model, its connecting
    embedding and the cross embedding from the other side's tip, such that
    the new triangle commutes with the chain so far; then re-saturate the
    new tip.  Candidates are scanned smallest-first, so the step returns
    the first fully successful stage."""
    if state.e_ec is None or state.f_ec is None:
        raise AssertionFailure("zigzag_step needs both tips saturated")
    t_side = state.t1 if side == "e" else state.t2
    other = "f" if side == "e" else "e"
    own_tip = state.tip(side)
    other_tip = state.tip(other)
    l0 = state.k0.signature
    budget = state.bounds.size_budget or (own_tip.size + other_tip.size + 4)

    if state.crosses:
        last = state.crosses[-1]
        if last.morphism.dom != own_tip:
            raise AssertionFailure("chain sides must alternate")
        prev_cross = last.morphism.map
        base_own = base_other = None
    else:
        if side != "e":
            raise AssertionFailure("the first step extends the e side")
        prev_cross = None
        base_own = state.path_map(side)
        base_other = state.path_map(other)

    for n in range(own_tip.size, budget + 1):
        for cand in enumerate_models(t_side, n):
            for emb in enumerate_embeddings(own_tip, cand, t_side.sig):
                for cross in enumerate_embeddings(other_tip, cand, l0):
                    if prev_cross is not None:
                        # triangle: the new connecting map factors through
                        # the previous cross map and the new one
                        if any(
                            emb.map[x] != cross.map[prev_cross[x]]
                            for x in own_tip.universe
                        ):
                            continue
                    else:
                        # first step: both base-to-tip paths agree
                        if any(
                            emb.map[base_own[x]] != cross.map[base_other[x]]
                            for x in state.d0.universe
                        ):
                            continue
                    sat = ec_closure(cand, t_side, state.k0, budget, state.bounds.max_tuple)
                    if isinstance(sat, NoneUpTo):
                        continue
                    b, sigma = sat
                    new_embed = compose(emb, sigma)
                    new_cross = compose(cross, sigma)
                    links = state.links(side)
                    links.append(ChainLink(b, new_embed))
                    state.crosses.append(
                        CrossLink(
                            new_cross,
                            from_side=other,
                            from_idx=len(state.links(other)) - 1,
                            to_idx=len(links) - 1,
                        )
                    )
                    flag = is_ec(reduct(b, l0), state.k0, state.k0.bound, state.bounds.max_tuple)
                    if side == "e":
                        state.e_ec = flag
                    else:
                        state.f_ec = flag
                    verify_chain(state)
                    return state
    return NoneUpTo(budget, phase=f"zigzag-{side}")


def detect_stabilization(state: ChainState) -> Morphism | NotYet:
    """The fusion bijection once the chain has settled: the last two cross
    maps must both be bijective and compose to the connecting embedding
    between their shared side's stages.  Returns the base-language
    bijection from the f-side tip onto the e-side tip."""
    if len(state.crosses) < 2:
        return NotYet("fewer than two cross maps")
    a, b = state.crosses[-2], state.crosses[-1]
    if a.from_side == b.from_side:
        raise AssertionFailure("cross maps must alternate")
    if not a.morphism.is_bijective or not b.morphism.is_bijective:
        return NotYet("the latest cross maps are not both bijective")
    links = state.links(b.to_side)
    connecting = links[b.to_idx].embed
    if connecting.map != compose(a.morphism, b.morphism).map:
        return NotYet("the cross maps do not pair into the connecting embedding")
    if b.to_side == "e":
        kappa = b.morphism
    else:
        kappa = b.morphism.inverse()
    if kappa.dom != state.tip("f") or kappa.cod != state.tip("e"):
        return NotYet("the latest cross map does not join the current tips")
    return kappa


@dataclass
class FusionResult:
    """A model of both theories with verified embeddings of the two sides'
    starting structures, plus the chain trace that produced it."""

    g: FinStructure
    iota: Morphism
    eta: Morphism
    trace: ChainState
    ec_flag: EcVerdict


def fuse(state: ChainState, kappa: Morphism) -> FusionResult:
    """Transport the second language's extra structure from the f-side tip
    onto the e-side tip along kappa and assemble the two embeddings by
    composing the chain; everything is re-verified before returning."""
    check = detect_stabilization(state)
    if isinstance(check, NotYet) or check.map != kappa.map or check.dom != kappa.dom or check.cod != kappa.cod:
        raise VerificationFailure("kappa was not produced by stabilization detection")
    l0 = state.k0.signature
    l1, l2 = state.t1.sig, state.t2.sig
    delta = sig_minus(l2, l0)
    g = transport(state.tip("e"), delta, state.tip("f"), kappa.map)

    e0 = state.e_links[0].structure
    f0 = state.f_links[0].structure
    e_map = state.seg_map("e", 0, len(state.e_links) - 1)
    f_map = state.seg_map("f", 0, len(state.f_links) - 1)
    iota = Morphism(e0, g, e_map, l1)
    eta = Morphism(f0, g, tuple(kappa.map[v] for v in f_map), l2)
    if not verify_embedding(iota):
        raise VerificationFailure("the assembled e-side embedding is not an embedding")
    if not verify_embedding(eta):
        raise VerificationFailure("the assembled f-side embedding is not an embedding")
    if compose(state.iota0, iota).map != compose(state.eta0, eta).map:
        raise VerificationFailure("the fused square over the base structure does not commute")
    if not models_theory(g, state.t1) or not models_theory(g, state.t2):
        raise VerificationFailure("the fused structure is not a model of both theories")
    flag = is_ec(reduct(g, l0), state.k0, state.k0.bound, state.bounds.max_tuple)
    return FusionResult(g, iota, eta, state, flag)


def combine_over_base(
    d0: FinStructure,
    e: FinStructure,
    f: FinStructure,
    iota0: Morphism,
    eta0: Morphism,
    t1: Theory,
    t2: Theory,
    k0: ModelClass,
    bounds: Bounds,
) -> FusionResult | NoneUpTo:
    """The full lifting run: check the hypotheses, saturate both sides,
    alternate zig and zag until stabilization, then fuse."""
    l0 = k0.signature
    if sig_intersect(t1.sig, t2.sig) != l0:
        raise HypothesisFailure("language intersection", "the two languages must meet exactly in the base language")
    for t, label in ((t1, "t1"), (t2, "t2")):
        for s in t.sentences:
            if classify(s) == OTHER:
                raise HypothesisFailure("inductive", f"{label} has a non-inductive sentence")
    if not contains(k0, d0):
        raise HypothesisFailure("base membership", "the base structure is outside the base class")
    if e.sig != t1.sig or f.sig != t2.sig:
        raise HypothesisFailure("side signatures", "e and f must live over exactly their theories' languages")
    if not models_theory(e, t1):
        raise HypothesisFailure("e models t1")
    if not models_theory(f, t2):
        raise HypothesisFailure("f models t2")
    for m, cod, label in ((iota0, e, "iota0"), (eta0, f, "eta0")):
        if m.dom != d0 or m.cod != cod or m.over != l0 or not verify_embedding(m):
            raise HypothesisFailure("base embedding", f"{label} is not a base-language embedding into its side")
    # A non-Holds answer here may be an artifact of the size bound, so it
    # taints the result as bounded-Unknown instead of failing outright.
    ap = check_ap(k0, bounds.quintuple_bound, k0.bound)

    if bounds.size_budget is None:
        bounds = Bounds(
            bounds.max_model_size,
            bounds.max_amalgam_size,
            bounds.max_tuple,
            bounds.max_rounds,
            e.size + f.size + 4,
            bounds.quintuple_bound,
        )

    state = ChainState(t1, t2, k0, bounds, d0, iota0, eta0, ap_status=ap.status)
    state.e_links.append(ChainLink(e, None))
    state.f_links.append(ChainLink(f, None))
    sat_e = saturate_ec(e, t1, k0, bounds)
    if isinstance(sat_e, NoneUpTo):
        return NoneUpTo(sat_e.bound, phase="saturate-e", unknown_encountered=sat_e.unknown_encountered)
    e1, s1 = sat_e
    if s1.map != identity(e, t1.sig).map or e1 != e:
        state.e_links.append(ChainLink(e1, s1))
    sat_f = saturate_ec(f, t2, k0, bounds)
    if isinstance(sat_f, NoneUpTo):
        return NoneUpTo(sat_f.bound, phase="saturate-f", unknown_encountered=sat_f.unknown_encountered)
    f1, r1 = sat_f
    if r1.map != identity(f, t2.sig).map or f1 != f:
        state.f_links.append(ChainLink(f1, r1))
    state.e_ec = is_ec(reduct(e1, l0), k0, k0.bound, bounds.max_tuple)
    state.f_ec = is_ec(reduct(f1, l0), k0, k0.bound, bounds.max_tuple)
    verify_chain(state)

    for rnd in range(1, bounds.max_rounds + 1):
        for side in ("e", "f"):
            step = zigzag_step(state, side)
            if isinstance(step, NoneUpTo):
                return NoneUpTo(step.bound, phase=f"{step.phase}-round-{rnd}")
            state.rounds = rnd
            kappa = detect_stabilization(state)
            if not isinstance(kappa, NotYet):
                return fuse(state, kappa)
    return NoneUpTo(bounds.max_rounds, phase="rounds")


@dataclass
class EcEmbeddingResult:
    """An embedding of a union-theory model into a fused model whose base
    reduct carries its e.c. verdict."""

    g: FinStructure
    embedding: Morphism
    ec_flag: EcVerdict
    fusion: FusionResult


def union_ec_extension(
    c: FinStructure,
    t1: Theory,
    t2: Theory,
    k0: ModelClass,
    bounds: Bounds,
) -> EcEmbeddingResult | NoneUpTo:
    """Run the combining engine on the reducts of a single union-theory
    model with identity base maps; the two assembled embeddings coincide
    and give one embedding over the union language."""
    t = theory_union(t1, t2)
    if not models_theory(c, t):
        raise HypothesisFailure("c models the union theory")
    l0 = k0.signature
    d0 = reduct(c, l0)
    e = reduct(c, t1.sig)
    f = reduct(c, t2.sig)
    ident = tuple(range(c.size))
    iota0 = Morphism(d0, e, ident, l0)
    eta0 = Morphism(d0, f, ident, l0)
    res = combine_over_base(d0, e, f, iota0, eta0, t1, t2, k0, bounds)
    if isinstance(res, NoneUpTo):
        return res
    if res.iota.map != res.eta.map:
        raise AssertionFailure("the two assembled embeddings must coincide over identity base maps")
    h = Morphism(c, res.g, res.iota.map, sig_union(t1.sig, t2.sig))
    if not verify_embedding(h):
        raise VerificationFailure("the combined embedding is not an embedding over the union language")
    return EcEmbeddingResult(res.g, h, res.ec_flag, res)


def amalgamate_union(
    q: AmalgamationSpan,
    t1: Theory,
    t2: Theory,
    k0: ModelClass,
    bounds: Bounds,
) -> AmalgamCertificate | NoneUpTo:
    """Amalgamate a span of union-theory models: find a subcompatible
    witness, run the combining engine on it, and assemble the two
    composite embeddings into a certificate over the union language."""
    t = theory_union(t1, t2)
    for name, s in (("A", q.A), ("B", q.B), ("C", q.C)):
        if not models_theory(s, t):
            raise HypothesisFailure("quintuple models", f"{name} is not a model of the union theory")
    w = find_subcompatible_witness(q, k0, t1, t2, bounds)
    if isinstance(w, NoneUpTo):
        return NoneUpTo(w.bound, phase="witness")
    res = combine_over_base(w.d0, w.e, w.f, w.iota0, w.eta0, t1, t2, k0, bounds)
    if isinstance(res, NoneUpTo):
        return NoneUpTo(res.bound, phase=f"chain({res.phase})")
    l = sig_union(t1.sig, t2.sig)
    alpha_star = Morphism(
        q.A, res.g, tuple(res.iota.map[w.iota0.map[v]] for v in w.alpha1.map), l
    )
    beta_star = Morphism(
        q.B, res.g, tuple(res.iota.map[w.iota0.map[v]] for v in w.beta1.map), l
    )
    if not verify_embedding(alpha_star) or not verify_embedding(beta_star):
        raise VerificationFailure("a composite insertion is not an embedding over the union language")
    if compose(q.alpha, alpha_star).map != compose(q.beta, beta_star).map:
        raise VerificationFailure("the assembled amalgamation square does not commute")
    cert = AmalgamCertificate(res.g, alpha_star, beta_star, _is_strong(q, alpha_star, beta_star))
    verify_certificate(cert, q, theory=t)
    return cert
