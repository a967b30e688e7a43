"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Every verdict asserted here is relative to the stated bounds, which are
pinned in this file.  Run with -s to see the per-criterion lines.
"""

import json
import time

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
    pushout_extension_amalgam,
    pushout_relational,
    validate_witness,
    verify_certificate,
)
from amalgam.chain import fuse, combine_over_base, union_ec_extension, amalgamate_union
from amalgam.classes import ModelClass, enumerate_models, iterate
from amalgam.cli import main as cli_main
from amalgam.core import canonical_form
from amalgam.ec import VERIFIED, is_ec
from amalgam.errors import (
    AssertionFailure,
    InducedRelationConflict,
    InvalidCertificate,
    InvalidQuintuple,
    InvalidWitness,
    MembershipError,
    NotBijective,
    VerificationFailure,
)
from amalgam.jsonio import structure_to_json
from amalgam.logic import models_theory, theory_union
from amalgam.morphisms import Morphism, compose, identity, verify_embedding
from amalgam.theories import (
    POSET_AXIOMS,
    POSET_SIG,
    antichain_poset,
    chain_poset,
    graph_theory,
    loopfree_function_theory,
    poset_from_pairs,
    poset_theory,
    poset_with_endo_theory,
    pure_set_theory,
    unary_predicate_theory,
    with_unary,
)
from amalgam.verdicts import Bounds, HOLDS, NoneUpTo

from conftest import all_binary_structures
from test_ec import oracle_is_ec


def report(number, name, ok, detail=""):
    line = f"acceptance {number} ({name}): {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" [{detail}]"
    print(line)
    assert ok, line


# -- criterion 1 -------------------------------------------------------------


def test_criterion_1_poset_ap_and_pushouts():
    """check_ap on posets up to size 5 holds; every certificate is the
    transitive-closure pushout or extends it; pushout certificates
    superamalgamate.  Strong search is used: it is the mode whose
    certificates carry the pushout property this criterion asserts."""
    start = time.perf_counter()
    k = ModelClass.bounded(poset_theory(), 5)
    verdict = check_ap(k, 2, 5, require_strong=True)
    assert verdict.status == HOLDS
    pushout_like = 0
    for q, cert in verdict.witnesses:
        verify_certificate(cert, q, h=k)
        p, ins_a, ins_b = pushout_relational(q, closure="leq")
        glue = [None] * p.size
        for a in q.A.universe:
            glue[ins_a.map[a]] = cert.iota.map[a]
        for b in q.B.universe:
            glue[ins_b.map[b]] = cert.eta.map[b]
        mu = Morphism(p, cert.D, tuple(glue), POSET_SIG)
        assert verify_embedding(mu), "certificate does not extend the pushout"
        if mu.is_bijective:
            pushout_like += 1
            assert check_superamalgamation(cert, q, "leq")
    elapsed = time.perf_counter() - start
    report(
        1,
        "poset AP over pushouts",
        elapsed < 60,
        f"{len(verdict.witnesses)} quintuples, {pushout_like} exact pushouts, {elapsed:.1f}s",
    )


# -- criterion 2 -------------------------------------------------------------


def test_criterion_2_strong_ap_pushout_equivalence():
    """Over the empty base language, amalgamation over pushouts coincides
    with strong amalgamation, checked mechanically on three toy theories."""
    k0 = ModelClass.bounded(pure_set_theory(), 6)
    checked = 0
    for t in (pure_set_theory(), unary_predicate_theory(), loopfree_function_theory()):
        strong_class = ModelClass.bounded(t, 5)
        for q in enumerate_quintuples(ModelClass.bounded(t, 3), 3):
            po = find_pushout_extending_amalgam(q, t, k0, None, 5)
            st = find_amalgam(q, strong_class, strong_class, 5, require_strong=True)
            assert isinstance(po, NoneUpTo) == isinstance(st, NoneUpTo), t.name
            checked += 1
        ap_po = check_ap_over_pushouts(t, k0, None, 3, 5)
        ap_st = check_ap(strong_class, 3, 5, require_strong=True)
        assert (ap_po.status == HOLDS) == (ap_st.status == HOLDS), t.name
    report(2, "strong AP = pushout AP over bare sets", True, f"{checked} quintuples, 3 theories")


# -- criterion 3 -------------------------------------------------------------


def _fg(base, f, g):
    return with_unary(with_unary(base, "f", f), "g", g)


def _fg_span(a, b, c, am, bm):
    sig = a.sig
    return AmalgamationSpan(a, b, c, Morphism(c, a, am, sig), Morphism(c, b, bm, sig))


def curated_fg_suite():
    """Spans of order-preserving-function structures whose function tables
    disagree away from the shared part, so no collapsed witness exists and
    both pipelines settle on the pushout amalgam."""
    c1, c2, c3, a2 = chain_poset(1), chain_poset(2), chain_poset(3), antichain_poset(2)
    v3 = poset_from_pairs(3, [(0, 1), (0, 2)])
    pt1 = _fg(c1, [0], [0])
    return [
        _fg_span(_fg(c2, [0, 0], [0, 1]), _fg(c2, [0, 1], [0, 0]), pt1, (0,), (0,)),
        _fg_span(_fg(c2, [1, 1], [0, 1]), _fg(c2, [0, 1], [1, 1]), pt1, (1,), (1,)),
        _fg_span(_fg(a2, [0, 0], [0, 1]), _fg(a2, [0, 1], [0, 0]), pt1, (0,), (0,)),
        _fg_span(_fg(c2, [0, 1], [0, 1]), _fg(a2, [0, 0], [0, 0]), pt1, (0,), (0,)),
        _fg_span(_fg(c2, [0, 0], [0, 0]), _fg(c2, [0, 1], [0, 1]), pt1, (0,), (0,)),
        _fg_span(
            _fg(c3, [0, 1, 1], [0, 1, 2]), _fg(c3, [0, 1, 2], [0, 1, 1]),
            _fg(c2, [0, 1], [0, 1]), (0, 1), (0, 1),
        ),
        _fg_span(_fg(c3, [0, 0, 0], [0, 1, 2]), _fg(c2, [0, 1], [0, 0]), pt1, (0,), (0,)),
        _fg_span(_fg(v3, [0, 0, 0], [0, 1, 2]), _fg(c2, [0, 1], [0, 0]), pt1, (0,), (0,)),
        _fg_span(_fg(c3, [0, 1, 2], [0, 0, 0]), _fg(c2, [0, 0], [0, 1]), pt1, (0,), (0,)),
        _fg_span(_fg(a2, [0, 0], [0, 0]), _fg(c2, [0, 1], [0, 1]), pt1, (0,), (0,)),
        _fg_span(_fg(c2, [0, 0], [0, 1]), _fg(a2, [0, 1], [0, 0]), pt1, (0,), (0,)),
    ]


def _isomorphic_over_span(c1, c2, q):
    """The two amalgams agree after relabeling along the certificate maps."""
    if c1.D.size != c2.D.size:
        return False
    glue = [None] * c1.D.size
    for a in q.A.universe:
        glue[c1.iota.map[a]] = c2.iota.map[a]
    for b in q.B.universe:
        glue[c1.eta.map[b]] = c2.eta.map[b]
    if any(v is None for v in glue):
        return canonical_form(c1.D)[0] == canonical_form(c2.D)[0]
    phi = Morphism(c1.D, c2.D, tuple(glue), c1.D.sig)
    return phi.is_bijective and verify_embedding(phi)


def test_criterion_3_constructive_vs_chain_amalgams():
    start = time.perf_counter()
    t1, t2 = poset_with_endo_theory("f"), poset_with_endo_theory("g")
    union = theory_union(t1, t2)
    suite = curated_fg_suite()
    assert len(suite) >= 10
    for q in suite:
        cert_po = pushout_extension_amalgam(q, t1, t2, closure="leq")
        assert isinstance(cert_po, AmalgamCertificate)
        verify_certificate(cert_po, q, theory=union)
        psize = q.A.size + q.B.size - q.C.size
        k0 = ModelClass.bounded(poset_theory(), psize)
        bounds = Bounds(max_model_size=psize, max_amalgam_size=psize, max_tuple=psize)
        cert_ch = amalgamate_union(q, t1, t2, k0, bounds)
        assert isinstance(cert_ch, AmalgamCertificate)
        verify_certificate(cert_ch, q, theory=union)
        assert compose(q.alpha, cert_ch.iota).map == compose(q.beta, cert_ch.eta).map
        assert _isomorphic_over_span(cert_po, cert_ch, q)
    elapsed = time.perf_counter() - start
    report(3, "constructive vs chain amalgams", elapsed < 60, f"{len(suite)} spans, {elapsed:.1f}s")


# -- criterion 4 -------------------------------------------------------------


def test_criterion_4_ec_oracle_equivalence():
    classes = (
        ModelClass.bounded(poset_theory(), 3),
        ModelClass.bounded(graph_theory(), 3),
        ModelClass.bounded(pure_set_theory(), 3),
    )
    checked = 0
    for k in classes:
        for e in iterate(k, 3):
            assert is_ec(e, k, 3, 3).status == oracle_is_ec(e, k, 3, 3)
            checked += 1
    report(4, "e.c. matches the syntactic-sentence oracle", True, f"{checked} structures")


# -- criterion 5 -------------------------------------------------------------


def test_criterion_5_combine_over_base_surrogate():
    t1, t2 = poset_with_endo_theory("f"), poset_with_endo_theory("g")
    d0 = chain_poset(2)
    e = with_unary(d0, "f", [0, 1])
    f = with_unary(d0, "g", [0, 1])
    iota0 = Morphism(d0, e, (0, 1), POSET_SIG)
    eta0 = Morphism(d0, f, (0, 1), POSET_SIG)
    k0 = ModelClass.bounded(poset_theory(), 2)
    res = combine_over_base(d0, e, f, iota0, eta0, t1, t2, k0, Bounds(max_model_size=2, max_amalgam_size=2, max_tuple=2))
    assert not isinstance(res, NoneUpTo)
    assert res.trace.rounds <= 2
    assert models_theory(res.g, theory_union(t1, t2))
    assert compose(iota0, res.iota).map == compose(eta0, res.eta).map
    assert res.ec_flag.status == VERIFIED
    report(5, "lifting run on the 2-chain instance", True, f"{res.trace.rounds} round(s)")


# -- criterion 6 -------------------------------------------------------------


def test_criterion_6_union_ec_extension_surrogate():
    t1, t2 = poset_with_endo_theory("f"), poset_with_endo_theory("g")
    union = theory_union(t1, t2)
    k0 = ModelClass.bounded(poset_theory(), 2)
    bounds = Bounds(max_model_size=2, max_amalgam_size=2, max_tuple=2)
    count = 0
    for n in (1, 2):
        for c in enumerate_models(union, n):
            try:
                res = union_ec_extension(c, t1, t2, k0, bounds)
            except AssertionFailure as exc:
                report(6, "single-model combination", False, f"coincidence assertion fired: {exc}")
            assert not isinstance(res, NoneUpTo)
            assert res.ec_flag.status == VERIFIED
            assert verify_embedding(res.embedding)
            count += 1
    report(6, "single-model combination", True, f"{count} models")


# -- criterion 7 -------------------------------------------------------------


def test_criterion_7_poset_counts():
    pt = poset_theory()
    counts = [len(enumerate_models(pt, n)) for n in range(1, 6)]
    assert counts == [1, 2, 5, 16, 63]
    # independent label-all-and-filter gate for sizes up to 4
    for n in range(1, 5):
        classes = set()
        for m in all_binary_structures(n):
            if models_theory(m, pt):
                classes.add(canonical_form(m)[0])
        assert len(classes) == counts[n - 1]
    report(7, "poset counts 1,2,5,16,63", True, "oracle gate at n<=4")


# -- criterion 8 -------------------------------------------------------------


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_criterion_8_cli_determinism(tmp_path, capsys):
    poset_theory_json = {
        "name": "posets",
        "signature": {"relations": {"leq": 2}, "functions": {}, "constants": []},
        "sentences": list(POSET_AXIOMS),
    }
    endo = lambda fn: {
        "name": f"posets-{fn}",
        "signature": {"relations": {"leq": 2}, "functions": {fn: 1}, "constants": []},
        "sentences": list(POSET_AXIOMS) + [f"forall x y. leq(x,y) -> leq({fn}(x),{fn}(y))"],
    }
    chain2 = structure_to_json(chain_poset(2))
    chain1 = structure_to_json(chain_poset(1))
    chain3 = structure_to_json(chain_poset(3))
    e2 = structure_to_json(with_unary(chain_poset(2), "f", [0, 1]))
    f2 = structure_to_json(with_unary(chain_poset(2), "g", [0, 1]))
    afg = structure_to_json(_fg(chain_poset(2), [0, 0], [0, 1]))
    bfg = structure_to_json(_fg(chain_poset(2), [0, 1], [0, 0]))
    cfg1 = structure_to_json(_fg(chain_poset(1), [0], [0]))
    files = {
        "chain1": _write(tmp_path, "chain1.json", chain1),
        "chain2": _write(tmp_path, "chain2.json", chain2),
        "chain3": _write(tmp_path, "chain3.json", chain3),
        "posets2": _write(tmp_path, "posets2.json", {"kind": "bounded", "theory": poset_theory_json, "maxSize": 2}),
        "posets3": _write(tmp_path, "posets3.json", {"kind": "bounded", "theory": poset_theory_json, "maxSize": 3}),
        "theory": _write(tmp_path, "theory.json", poset_theory_json),
        "tf": _write(tmp_path, "tf.json", endo("f")),
        "tg": _write(tmp_path, "tg.json", endo("g")),
        "e2": _write(tmp_path, "e2.json", e2),
        "f2": _write(tmp_path, "f2.json", f2),
        "q": _write(tmp_path, "q.json", {"A": chain2, "B": chain2, "C": chain1, "alpha": [0], "beta": [0]}),
        "qfg": _write(tmp_path, "qfg.json", {"A": afg, "B": bfg, "C": cfg1, "alpha": [0], "beta": [0]}),
    }
    commands = [
        ["eval", "--structure", files["chain2"], "--formula", "forall x y. leq(x,y) | leq(y,x)"],
        ["embeddings", "--dom", files["chain2"], "--cod", files["chain3"]],
        ["enumerate", "--theory", files["theory"], "--max-size", "3"],
        ["check-ap", "--class", files["posets3"], "--quintuple-bound", "2", "--max-d", "3"],
        ["pushout", "--quintuple", files["q"], "--closure", "leq"],
        ["ec", "--structure", files["chain1"], "--class", files["posets2"]],
        ["amalgam", "--quintuple", files["q"], "--class", files["posets3"], "--max-d", "3", "--strong"],
        ["combine", "--d0", files["chain2"], "--e", files["e2"], "--f", files["f2"],
         "--iota0", "0,1", "--eta0", "0,1", "--t1", files["tf"], "--t2", files["tg"],
         "--class", files["posets2"], "--max-model-size", "2", "--max-tuple", "2"],
        ["union-ap", "--quintuple", files["qfg"], "--t1", files["tf"], "--t2", files["tg"],
         "--class", files["posets3"], "--max-model-size", "3", "--max-amalgam-size", "3", "--max-tuple", "3"],
    ]
    for argv in commands:
        runs = []
        for workers in ("1", "4"):
            for _ in range(2):
                code = cli_main(argv + ["--format", "json", "--workers", workers])
                out = capsys.readouterr().out
                runs.append((code, out))
        codes = {c for c, _ in runs}
        outputs = {o for _, o in runs}
        assert len(codes) == 1 and len(outputs) == 1, argv[0]
    report(8, "byte-identical CLI output across runs and workers", True, f"{len(commands)} commands")


# -- criterion 9 -------------------------------------------------------------


def test_criterion_9_negative_controls(tmp_path, capsys):
    t1, t2 = poset_with_endo_theory("f"), poset_with_endo_theory("g")
    q = curated_fg_suite()[0]
    k0 = ModelClass.bounded(poset_theory(), 3)
    bounds = Bounds(max_model_size=3, max_amalgam_size=3, max_tuple=3)
    w = find_subcompatible_witness(q, k0, t1, t2, bounds)
    assert isinstance(w, SubcompatibleWitness)
    good = pushout_extension_amalgam(q, t1, t2, closure="leq")
    cases = []

    def expect(name, exc_type, thunk):
        try:
            thunk()
        except exc_type:
            cases.append(name)
            return
        except Exception as other:  # noqa: BLE001 - the designated error only
            raise AssertionError(f"{name}: raised {type(other).__name__} instead of {exc_type.__name__}")
        raise AssertionError(f"{name}: accepted a corrupted value")

    # 1: witness with the base embedding remapped: shared facts now disagree
    bad_eta0 = SubcompatibleWitness(
        w.d0, w.e, w.f, w.alpha1, w.beta1, w.iota0,
        eta0=Morphism(w.d0, w.f, (1, 0, 2), POSET_SIG),
    )
    expect("witness/eta0-remap", InducedRelationConflict, lambda: image_union_amalgam(q, bad_eta0, t1, t2))

    # 2: witness whose square over C is broken (the two legs send the
    # shared point to different base elements)
    c3 = chain_poset(3)
    e3 = with_unary(c3, "f", [0, 1, 2])
    f3 = with_unary(c3, "g", [0, 1, 2])
    broken_square = SubcompatibleWitness(
        c3, e3, f3,
        alpha1=Morphism(q.A, c3, (0, 1), POSET_SIG),
        beta1=Morphism(q.B, c3, (1, 2), POSET_SIG),
        iota0=Morphism(c3, e3, (0, 1, 2), POSET_SIG),
        eta0=Morphism(c3, f3, (0, 1, 2), POSET_SIG),
    )
    assert compose(q.alpha, broken_square.alpha1).map != compose(q.beta, broken_square.beta1).map
    expect("witness/broken-square", InvalidWitness, lambda: validate_witness(broken_square, q, t1, t2, k0))

    # 3: witness whose base structure leaves the class
    big = poset_from_pairs(4, [(0, 1), (0, 2), (0, 3)])
    bad_d0 = SubcompatibleWitness(
        big, w.e, w.f,
        Morphism(q.A, big, (0, 1), POSET_SIG), Morphism(q.B, big, (0, 2), POSET_SIG),
        Morphism(big, w.e, (0, 1, 2, 2), POSET_SIG), Morphism(big, w.f, (0, 1, 2, 2), POSET_SIG),
    )
    expect(
        "witness/base-outside-class",
        InvalidWitness,
        lambda: validate_witness(bad_d0, q, t1, t2, ModelClass.bounded(poset_theory(), 3)),
    )

    # 4: certificate with a lying strong flag
    expect(
        "certificate/wrong-strong-flag",
        InvalidCertificate,
        lambda: is_strong(AmalgamCertificate(good.D, good.iota, good.eta, not good.strong), q),
    )

    # 5: certificate whose square is broken
    eta_shift = Morphism(q.B, good.D, tuple(reversed(good.eta.map)), q.sig)
    expect(
        "certificate/broken-square",
        InvalidCertificate,
        lambda: verify_certificate(AmalgamCertificate(good.D, good.iota, eta_shift, good.strong), q),
    )

    # 6: certificate whose insertion is not an embedding
    collapse = Morphism(q.A, good.D, (good.iota.map[0], good.iota.map[0]), q.sig)
    expect(
        "certificate/non-embedding-insertion",
        InvalidCertificate,
        lambda: verify_certificate(AmalgamCertificate(good.D, collapse, good.eta, good.strong), q),
    )

    # 7: fusion with a bijection that stabilization did not produce
    d0c = chain_poset(2)
    e = with_unary(d0c, "f", [0, 1])
    f = with_unary(d0c, "g", [0, 1])
    res = combine_over_base(
        d0c, e, f,
        Morphism(d0c, e, (0, 1), POSET_SIG), Morphism(d0c, f, (0, 1), POSET_SIG),
        t1, t2, ModelClass.bounded(poset_theory(), 2),
        Bounds(max_model_size=2, max_amalgam_size=2, max_tuple=2),
    )
    state = res.trace
    rogue = Morphism(state.tip("f"), state.tip("e"), (1, 0), POSET_SIG)
    expect("fusion/rogue-bijection", VerificationFailure, lambda: fuse(state, rogue))

    # 8: span whose legs are not embeddings
    expect(
        "span/non-embedding-leg",
        InvalidQuintuple,
        lambda: AmalgamationSpan(
            chain_poset(2), antichain_poset(2), chain_poset(2),
            identity(chain_poset(2)),
            Morphism(chain_poset(2), antichain_poset(2), (0, 1), POSET_SIG),
        ),
    )

    # 9: transport along a non-bijection
    from amalgam.core import transport, Signature

    expect(
        "transport/non-bijection",
        NotBijective,
        lambda: transport(chain_poset(2), Signature(), chain_poset(2), (0, 0)),
    )

    # 10: amalgam search on a span outside its class
    tiny = ModelClass.bounded(theory_union(t1, t2), 1)
    expect(
        "search/membership",
        MembershipError,
        lambda: find_amalgam(curated_fg_suite()[0], tiny, tiny, 3),
    )

    # 11: tampered certificate file rejected on replay through the CLI
    from amalgam.jsonio import certificate_to_json

    payload = certificate_to_json(good, q)
    payload["eta"] = list(reversed(payload["eta"]))
    path = tmp_path / "tampered.json"
    path.write_text(json.dumps(payload))
    code = cli_main(["amalgam", "--verify", str(path)])
    capsys.readouterr()
    assert code == 1
    cases.append("cli/tampered-certificate")

    report(9, "negative controls rejected", len(cases) >= 10, f"{len(cases)} mutations")
