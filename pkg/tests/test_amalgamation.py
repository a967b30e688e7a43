"""Amalgam search, certificates, pushouts, constructive amalgams, witnesses."""

import itertools

import pytest

from amalgam.amalgamation import (
    AmalgamCertificate,
    SubcompatibleWitness,
    AmalgamationSpan,
    check_ap,
    check_ap_over_pushouts,
    check_superamalgamation,
    enumerate_quintuples,
    find_amalgam,
    find_pushout_extending_amalgam,
    find_subcompatible_witness,
    is_strong,
    image_union_amalgam,
    base_expansion_amalgam,
    pushout_extension_amalgam,
    pushout_empty,
    pushout_relational,
    validate_witness,
    verify_certificate,
)
from amalgam.classes import ModelClass, iterate
from amalgam.core import EMPTY_SIGNATURE, FinStructure, Signature, reduct, sig_union
from amalgam.errors import (
    InapplicableError,
    InducedRelationConflict,
    InvalidCertificate,
    InvalidQuintuple,
    InvalidWitness,
    MembershipError,
    NotRelational,
    UnknownSymbol,
)
from amalgam.logic import Theory, models_theory, theory_union
from amalgam.morphisms import Morphism, compose, enumerate_embeddings, identity, verify_embedding
from amalgam.theories import (
    POSET_AXIOMS,
    POSET_SIG,
    chain_poset,
    graph_theory,
    linear_order_theory,
    poset_from_pairs,
    poset_theory,
    poset_with_endo_theory,
    with_unary,
)
from amalgam.verdicts import Bounds, ClosureFailure, FAILS, HOLDS, Inapplicable, NoneUpTo, UNKNOWN


def span(a, b, c, am, bm):
    sig = c.sig
    return AmalgamationSpan(a, b, c, Morphism(c, a, am, sig), Morphism(c, b, bm, sig))


@pytest.fixture(scope="module")
def bottom_bottom():
    return span(chain_poset(2), chain_poset(2), chain_poset(1), (0,), (0,))


@pytest.fixture(scope="module")
def bottom_top():
    return span(chain_poset(2), chain_poset(2), chain_poset(1), (0,), (1,))


@pytest.fixture(scope="module")
def lin3():
    return ModelClass.bounded(linear_order_theory(), 3)


class TestQuintuple:
    def test_non_embedding_rejected(self, antichain2, chain2, chain1):
        with pytest.raises(InvalidQuintuple):
            span(chain2, antichain2, chain2, (0, 1), (0, 1))

    def test_signature_mismatch_rejected(self, chain2):
        bare = FinStructure(EMPTY_SIGNATURE, 2)
        with pytest.raises(InvalidQuintuple):
            AmalgamationSpan(chain2, bare, chain2, identity(chain2), Morphism(chain2, bare, (0, 1), EMPTY_SIGNATURE))


class TestFindAmalgam:
    def test_identity_quintuple(self, chain1):
        k = ModelClass.explicit([chain1])
        q = span(chain1, chain1, chain1, (0,), (0,))
        cert = find_amalgam(q, k, k, 1)
        assert cert.D.size == 1 and cert.strong

    def test_plain_search_allows_collapse(self, bottom_bottom, lin3):
        cert = find_amalgam(bottom_bottom, lin3, lin3, 3)
        assert cert.D.size == 2 and not cert.strong
        verify_certificate(cert, bottom_bottom, h=lin3)

    def test_strong_search_needs_three_elements(self, bottom_bottom, lin3):
        cert = find_amalgam(bottom_bottom, lin3, lin3, 3, require_strong=True)
        assert cert.D == chain_poset(3)
        assert cert.strong
        assert find_amalgam(bottom_bottom, lin3, lin3, 2, require_strong=True) == NoneUpTo(2, phase="amalgam")

    def test_mixed_anchoring_needs_three_even_plainly(self, bottom_top, lin3):
        assert isinstance(find_amalgam(bottom_top, lin3, lin3, 2), NoneUpTo)
        cert = find_amalgam(bottom_top, lin3, lin3, 3)
        assert cert.D == chain_poset(3) and cert.strong

    def test_membership_checked(self, bottom_bottom):
        k = ModelClass.bounded(linear_order_theory(), 1)
        with pytest.raises(MembershipError):
            find_amalgam(bottom_bottom, k, k, 3)

    def test_complete_up_to_bounds_against_brute_force(self, posets):
        # independent oracle: scan every class member and embedding pair
        k = ModelClass.bounded(posets, 3)
        for q in enumerate_quintuples(k, 2):
            exists = False
            for d in iterate(k, 3):
                for iota in enumerate_embeddings(q.A, d, POSET_SIG):
                    for eta in enumerate_embeddings(q.B, d, POSET_SIG):
                        if compose(q.alpha, iota).map == compose(q.beta, eta).map:
                            exists = True
            assert exists == (not isinstance(find_amalgam(q, k, k, 3), NoneUpTo))


class TestCheckAp:
    def test_posets_hold(self, posets):
        k = ModelClass.bounded(posets, 4)
        v = check_ap(k, 2, 4)
        assert v.status == HOLDS
        for q, cert in v.witnesses:
            verify_certificate(cert, q, h=k)

    def test_linear_orders_fail_at_bound_two(self):
        k = ModelClass.bounded(linear_order_theory(), 2)
        v = check_ap(k, 2, 2)
        assert v.status == FAILS
        # the recorded counterexample really has no amalgam in the class
        assert isinstance(find_amalgam(v.counterexample, k, k, 2), NoneUpTo)

    def test_single_point_class_holds(self, chain1):
        v = check_ap(ModelClass.explicit([chain1]), 1, 1)
        assert v.status == HOLDS

    def test_unknown_when_bound_not_exhaustive(self):
        k = ModelClass.bounded(linear_order_theory(), 3)
        v = check_ap(k, 2, 2)
        assert v.status == UNKNOWN


class TestStrongAndSuper:
    def test_three_chain_certificate_is_strong(self, bottom_bottom, chain3):
        iota = Morphism(bottom_bottom.A, chain3, (0, 1), POSET_SIG)
        eta = Morphism(bottom_bottom.B, chain3, (0, 2), POSET_SIG)
        cert = AmalgamCertificate(chain3, iota, eta, True)
        assert is_strong(cert, bottom_bottom)

    def test_collapse_certificate_not_strong(self, bottom_bottom, chain2):
        cert = AmalgamCertificate(chain2, identity(chain2, POSET_SIG), identity(chain2, POSET_SIG), False)
        assert not is_strong(cert, bottom_bottom)

    def test_identity_quintuple_strong(self, chain1):
        q = span(chain1, chain1, chain1, (0,), (0,))
        cert = AmalgamCertificate(chain1, identity(chain1, POSET_SIG), identity(chain1, POSET_SIG), True)
        assert is_strong(cert, q)

    def test_wrong_flag_rejected(self, bottom_bottom, chain2):
        cert = AmalgamCertificate(chain2, identity(chain2, POSET_SIG), identity(chain2, POSET_SIG), True)
        with pytest.raises(InvalidCertificate):
            is_strong(cert, bottom_bottom)

    def test_pushout_superamalgamates(self, bottom_bottom):
        d, iota, eta = pushout_relational(bottom_bottom, closure="leq")
        cert = AmalgamCertificate(d, iota, eta, True)
        assert check_superamalgamation(cert, bottom_bottom, "leq")

    def test_chain_amalgam_lacks_interpolant(self, bottom_bottom, chain3):
        # leq(iota(top), eta(top)) holds with no witness through C
        iota = Morphism(bottom_bottom.A, chain3, (0, 1), POSET_SIG)
        eta = Morphism(bottom_bottom.B, chain3, (0, 2), POSET_SIG)
        cert = AmalgamCertificate(chain3, iota, eta, True)
        assert not check_superamalgamation(cert, bottom_bottom, "leq")

    def test_identity_superamalgamation(self, chain1):
        q = span(chain1, chain1, chain1, (0,), (0,))
        cert = AmalgamCertificate(chain1, identity(chain1, POSET_SIG), identity(chain1, POSET_SIG), True)
        assert check_superamalgamation(cert, q, "leq")

    def test_undeclared_relation_rejected(self, bottom_bottom, chain2):
        cert = AmalgamCertificate(chain2, identity(chain2, POSET_SIG), identity(chain2, POSET_SIG), False)
        with pytest.raises(UnknownSymbol):
            check_superamalgamation(cert, bottom_bottom, "edge")


class TestPushouts:
    def test_empty_pushout_size(self, bottom_bottom):
        d, iota, eta = pushout_empty(bottom_bottom)
        assert d.size == 3
        assert iota.map == (0, 1) and eta.map == (0, 2)

    def test_empty_pushout_identity_span(self, chain2):
        q = span(chain2, chain2, chain2, (0, 1), (0, 1))
        d, iota, eta = pushout_empty(q)
        assert d.size == 2 and iota.map == eta.map

    def test_relational_pushout_of_bottom_anchored_chains(self, bottom_bottom):
        d, iota, eta = pushout_relational(bottom_bottom, closure="leq")
        assert d == poset_from_pairs(3, [(0, 1), (0, 2)])
        assert verify_embedding(iota) and verify_embedding(eta)

    def test_closure_adds_transitive_pair(self):
        # A = {a < c}, B = {c < b} glued along c: closure adds a < b
        a = poset_from_pairs(2, [(1, 0)])  # element 1 below element 0 = c at index 0
        b = poset_from_pairs(2, [(0, 1)])
        c = chain_poset(1)
        q = span(a, b, c, (0,), (0,))
        d, iota, eta = pushout_relational(q, closure="leq")
        assert (iota.map[1], eta.map[1]) in d.relations["leq"]
        assert verify_embedding(iota) and verify_embedding(eta)

    def test_cyclic_union_is_rejected(self):
        sig = POSET_SIG
        c = FinStructure(sig, 2, relations={"leq": {(0, 1)}})
        a = FinStructure(sig, 3, relations={"leq": {(0, 1), (1, 2), (2, 0)}})
        q = AmalgamationSpan(a, c, c, Morphism(c, a, (0, 1), sig), identity(c))
        res = pushout_relational(q, closure="leq")
        assert isinstance(res, ClosureFailure)
        assert res.pairs

    def test_function_signature_rejected(self):
        sig = Signature(functions={"f": 1})
        m = FinStructure(sig, 1, functions={"f": {(0,): 0}})
        q = AmalgamationSpan(m, m, m, identity(m), identity(m))
        with pytest.raises(NotRelational):
            pushout_relational(q)

    def test_universal_property(self, posets, bottom_bottom):
        # unique mediating homomorphism into every small poset
        p, ins_a, ins_b = pushout_relational(bottom_bottom, closure="leq")
        q = bottom_bottom

        def is_hom(mp, dom, cod):
            return all(
                (mp[x], mp[y]) in cod.relations["leq"]
                for (x, y) in dom.relations["leq"]
            )

        for x in iterate(ModelClass.bounded(posets, 3), 3):
            homs_a = [mp for mp in itertools.product(x.universe, repeat=q.A.size) if is_hom(mp, q.A, x)]
            homs_b = [mp for mp in itertools.product(x.universe, repeat=q.B.size) if is_hom(mp, q.B, x)]
            for u in homs_a:
                for v in homs_b:
                    if any(u[q.alpha.map[i]] != v[q.beta.map[i]] for i in q.C.universe):
                        continue
                    mediating = [
                        mp
                        for mp in itertools.product(x.universe, repeat=p.size)
                        if is_hom(mp, p, x)
                        and all(mp[ins_a.map[i]] == u[i] for i in q.A.universe)
                        and all(mp[ins_b.map[i]] == v[i] for i in q.B.universe)
                    ]
                    assert len(mediating) == 1


class TestApOverPushouts:
    def test_posets_over_their_own_pushouts(self, posets):
        v = check_ap_over_pushouts(posets, ModelClass.bounded(posets, 6), "leq", 2, 4)
        assert v.status == HOLDS

    def test_linear_orders_fail_over_poset_pushouts(self, posets):
        v = check_ap_over_pushouts(linear_order_theory(), ModelClass.bounded(posets, 6), "leq", 2, 4)
        assert v.status == FAILS

    def test_empty_base_matches_strong_search(self):
        # amalgamation over bare-set pushouts is exactly strong amalgamation
        t = Theory("p-sets", Signature(relations={"p": 1}), ())
        k0 = ModelClass.bounded(Theory("sets", EMPTY_SIGNATURE, ()), 5)
        kt = ModelClass.bounded(t, 4)
        for q in enumerate_quintuples(ModelClass.bounded(t, 2), 2):
            po = find_pushout_extending_amalgam(q, t, k0, None, 4)
            st = find_amalgam(q, kt, kt, 4, require_strong=True)
            assert isinstance(po, NoneUpTo) == isinstance(st, NoneUpTo)


@pytest.fixture(scope="module")
def endo_theories():
    return poset_with_endo_theory("f"), poset_with_endo_theory("g")


def fg_structure(base, f, g):
    return with_unary(with_unary(base, "f", f), "g", g)


@pytest.fixture(scope="module")
def fg_span():
    a = fg_structure(chain_poset(2), [0, 1], [0, 1])
    b = fg_structure(chain_poset(2), [0, 1], [0, 1])
    c = fg_structure(chain_poset(1), [0], [0])
    sig = a.sig
    return AmalgamationSpan(a, b, c, Morphism(c, a, (0,), sig), Morphism(c, b, (0,), sig))


@pytest.fixture(scope="module")
def fg_pushout_witness(fg_span, endo_theories):
    t1, t2 = endo_theories
    d0 = poset_from_pairs(3, [(0, 1), (0, 2)])
    e = with_unary(d0, "f", [0, 1, 2])
    f = with_unary(d0, "g", [0, 1, 2])
    l0 = POSET_SIG
    return SubcompatibleWitness(
        d0,
        e,
        f,
        alpha1=Morphism(fg_span.A, d0, (0, 1), l0),
        beta1=Morphism(fg_span.B, d0, (0, 2), l0),
        iota0=Morphism(d0, e, (0, 1, 2), l0),
        eta0=Morphism(d0, f, (0, 1, 2), l0),
    )


class TestProp41a:
    def test_one_point_span(self, endo_theories):
        t1, t2 = endo_theories
        pt = fg_structure(chain_poset(1), [0], [0])
        q = AmalgamationSpan(pt, pt, pt, identity(pt), identity(pt))
        d0 = chain_poset(1)
        w = SubcompatibleWitness(
            d0,
            with_unary(d0, "f", [0]),
            with_unary(d0, "g", [0]),
            alpha1=Morphism(pt, d0, (0,), POSET_SIG),
            beta1=Morphism(pt, d0, (0,), POSET_SIG),
            iota0=Morphism(d0, with_unary(d0, "f", [0]), (0,), POSET_SIG),
            eta0=Morphism(d0, with_unary(d0, "g", [0]), (0,), POSET_SIG),
        )
        cert = image_union_amalgam(q, w, t1, t2)
        assert cert.D.size == 1
        assert cert.D.functions["f"] == {(0,): 0} and cert.D.functions["g"] == {(0,): 0}

    def test_two_chain_span_full_verification(self, fg_span, fg_pushout_witness, endo_theories):
        t1, t2 = endo_theories
        cert = image_union_amalgam(fg_span, fg_pushout_witness, t1, t2)
        assert cert.D.size == 3
        assert models_theory(cert.D, theory_union(t1, t2))
        verify_certificate(cert, fg_span)
        assert cert.D.functions["f"] == {(0,): 0, (1,): 1, (2,): 2}

    def test_corrupted_eta0_raises_relation_conflict(self, fg_span, fg_pushout_witness, endo_theories):
        t1, t2 = endo_theories
        w = fg_pushout_witness
        bad = SubcompatibleWitness(
            w.d0, w.e, w.f, w.alpha1, w.beta1, w.iota0,
            eta0=Morphism(w.d0, w.f, (1, 0, 2), POSET_SIG),
        )
        with pytest.raises(InducedRelationConflict):
            image_union_amalgam(fg_span, bad, t1, t2)

    def test_binary_function_inapplicable(self):
        sig1 = Signature(relations={"leq": 2}, functions={"h": 2})
        t1 = Theory.from_strings("posets-h", sig1, POSET_AXIOMS)
        t2 = poset_with_endo_theory("g")
        l = sig_union(sig1, t2.sig)
        m = FinStructure(l, 1, relations={"leq": {(0, 0)}}, functions={"h": {(0, 0): 0}, "g": {(0,): 0}})
        q = AmalgamationSpan(m, m, m, identity(m), identity(m))
        d0 = chain_poset(1)
        w = SubcompatibleWitness(
            d0,
            FinStructure(sig1, 1, relations={"leq": {(0, 0)}}, functions={"h": {(0, 0): 0}}),
            with_unary(d0, "g", [0]),
            alpha1=Morphism(m, d0, (0,), POSET_SIG),
            beta1=Morphism(m, d0, (0,), POSET_SIG),
            iota0=Morphism(d0, FinStructure(sig1, 1, relations={"leq": {(0, 0)}}, functions={"h": {(0, 0): 0}}), (0,), POSET_SIG),
            eta0=Morphism(d0, with_unary(d0, "g", [0]), (0,), POSET_SIG),
        )
        with pytest.raises(InapplicableError):
            image_union_amalgam(q, w, t1, t2)


GRAPH_AXIOMS = ("forall x. !edge(x,x)", "forall x y. edge(x,y) -> edge(y,x)")


@pytest.fixture(scope="module")
def color_setup():
    t_red = Theory.from_strings("graphs-red", Signature(relations={"edge": 2, "red": 1}), GRAPH_AXIOMS)
    t_blue = Theory.from_strings("graphs-blue", Signature(relations={"edge": 2, "blue": 1}), GRAPH_AXIOMS)
    lu = sig_union(t_red.sig, t_blue.sig)

    def gs(n, edges, red, blue):
        sym = set(edges) | {(b, a) for a, b in edges}
        return FinStructure(lu, n, relations={"edge": sym, "red": {(v,) for v in red}, "blue": {(v,) for v in blue}})

    c = gs(1, [], [], [])
    a = gs(2, [(0, 1)], [1], [])
    b = gs(2, [(0, 1)], [], [1])
    q = AmalgamationSpan(a, b, c, Morphism(c, a, (0,), lu), Morphism(c, b, (0,), lu))
    return t_red, t_blue, q


class TestProp41b:
    def test_color_graph_amalgam(self, color_setup):
        t_red, t_blue, q = color_setup
        k0 = ModelClass.bounded(graph_theory(), 3)
        w = find_subcompatible_witness(q, k0, t_red, t_blue, Bounds(max_model_size=3, max_amalgam_size=3))
        assert isinstance(w, SubcompatibleWitness)
        cert = base_expansion_amalgam(q, w, t_red, t_blue)
        assert cert.D.size == w.d0.size
        assert models_theory(cert.D, theory_union(t_red, t_blue))
        # pulled-back predicates reflect because the composite insertions
        # are embeddings over the component languages
        verify_certificate(cert, q)

    def test_corrupted_insertion_raises_invalid_witness(self, color_setup):
        t_red, t_blue, q = color_setup
        k0 = ModelClass.bounded(graph_theory(), 3)
        w = find_subcompatible_witness(q, k0, t_red, t_blue, Bounds(max_model_size=3, max_amalgam_size=3))
        perm = tuple((w.iota0.map[0],) + tuple(reversed(w.iota0.map[1:])))
        if perm == w.iota0.map:
            perm = tuple(reversed(w.iota0.map))
        bad = SubcompatibleWitness(w.d0, w.e, w.f, w.alpha1, w.beta1,
                                   iota0=Morphism(w.d0, w.e, perm, w.iota0.over), eta0=w.eta0)
        with pytest.raises(InvalidWitness):
            base_expansion_amalgam(q, bad, t_red, t_blue)

    def test_function_delta_rejected(self, fg_span, fg_pushout_witness, endo_theories):
        t1, t2 = endo_theories
        with pytest.raises(NotRelational):
            base_expansion_amalgam(fg_span, fg_pushout_witness, t1, t2)


class TestProp41c:
    def test_two_chain_span(self, fg_span, endo_theories):
        t1, t2 = endo_theories
        cert = pushout_extension_amalgam(fg_span, t1, t2, closure="leq")
        assert cert.D.size == 3
        assert reduct(cert.D, POSET_SIG) == poset_from_pairs(3, [(0, 1), (0, 2)])
        assert cert.D.functions["f"] == {(0,): 0, (1,): 1, (2,): 2}
        assert models_theory(cert.D, theory_union(t1, t2))

    def test_nonidentity_functions_extend(self, endo_theories):
        t1, t2 = endo_theories
        a = fg_structure(chain_poset(2), [0, 0], [0, 1])
        b = fg_structure(chain_poset(2), [0, 1], [0, 0])
        c = fg_structure(chain_poset(1), [0], [0])
        sig = a.sig
        q = AmalgamationSpan(a, b, c, Morphism(c, a, (0,), sig), Morphism(c, b, (0,), sig))
        cert = pushout_extension_amalgam(q, t1, t2, closure="leq")
        assert cert.D.functions["f"] == {(0,): 0, (1,): 0, (2,): 2}
        assert cert.D.functions["g"] == {(0,): 0, (1,): 1, (2,): 0}

    def test_binary_delta_inapplicable(self):
        sig1 = Signature(relations={"leq": 2}, functions={"h": 2})
        t1 = Theory.from_strings("posets-h", sig1, POSET_AXIOMS)
        t2 = poset_with_endo_theory("g")
        l = sig_union(sig1, t2.sig)
        m = FinStructure(l, 1, relations={"leq": {(0, 0)}}, functions={"h": {(0, 0): 0}, "g": {(0,): 0}})
        q = AmalgamationSpan(m, m, m, identity(m), identity(m))
        res = pushout_extension_amalgam(q, t1, t2)
        assert isinstance(res, Inapplicable)

    def test_missing_endomorphism_axiom_inapplicable(self, fg_span):
        sig_f = Signature(relations={"leq": 2}, functions={"f": 1})
        t1_no_axiom = Theory.from_strings("posets-f-free", sig_f, POSET_AXIOMS)
        res = pushout_extension_amalgam(fg_span, t1_no_axiom, poset_with_endo_theory("g"), closure="leq")
        assert isinstance(res, Inapplicable)


class TestWitnessSearch:
    def test_union_amalgam_yields_reduct_witness(self, fg_span, endo_theories):
        # when the union theory amalgamates, the amalgam's own reducts form
        # a witness with the base, e-side and f-side all cut from one model
        t1, t2 = endo_theories
        cert = pushout_extension_amalgam(fg_span, t1, t2, closure="leq")
        d = cert.D
        l0 = POSET_SIG
        w = SubcompatibleWitness(
            d0=reduct(d, l0),
            e=reduct(d, t1.sig),
            f=reduct(d, t2.sig),
            alpha1=Morphism(fg_span.A, reduct(d, l0), cert.iota.map, l0),
            beta1=Morphism(fg_span.B, reduct(d, l0), cert.eta.map, l0),
            iota0=Morphism(reduct(d, l0), reduct(d, t1.sig), tuple(range(d.size)), l0),
            eta0=Morphism(reduct(d, l0), reduct(d, t2.sig), tuple(range(d.size)), l0),
        )
        validate_witness(w, fg_span, t1, t2, ModelClass.bounded(poset_theory(), 3))

    def test_search_finds_witness_for_toy_span(self, fg_span, endo_theories):
        t1, t2 = endo_theories
        k0 = ModelClass.bounded(poset_theory(), 3)
        w = find_subcompatible_witness(fg_span, k0, t1, t2, Bounds(max_model_size=3, max_amalgam_size=3))
        assert isinstance(w, SubcompatibleWitness)
        validate_witness(w, fg_span, t1, t2, k0)

    def test_starved_bounds(self, fg_span, endo_theories):
        t1, t2 = endo_theories
        k0 = ModelClass.bounded(poset_theory(), 3)
        res = find_subcompatible_witness(fg_span, k0, t1, t2, Bounds(max_model_size=1, max_amalgam_size=1))
        assert res == NoneUpTo(1, phase="witness")
