import math
import random

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from oracles import load, random_acyclic_algebra, same_ideal, to_nx
from strategies import gbps
from quivergbp import (BoundPathAlgebra, GbpAlgebra, Quiver, RelationClass, VertexPartition,
                       build_simplification, canonical_labelling, classify_relation,
                       count_labellings, decompose_path, enumerate_labellings, expand,
                       expansion_matches, field_algebra, gbp_equivalent, ideals_equal, is_coherent,
                       is_compatible, loop_simplification, partition_from_gbp,
                       search_simplifications, trivial_gbp_gabriel, trivial_gbp_single)
from quivergbp.dsl import parse_lincomb
from quivergbp.errors import ValidationError
from quivergbp.partitions import bell, iter_rgs
from quivergbp.simplify import coherent_partitions, iter_labellings

SQ = load("square.alg").algebras
FAN = load("fan.alg").algebras["Fan"]
FAN_P = VertexPartition.parse("1,2|3|4,5,6")
SQ_P = VertexPartition.parse("1|2,3|4")


def lc(text, q):
    return parse_lincomb(text, q)


# ---------- coherence ----------

def test_coherence_examples():
    assert is_coherent(SQ["Zero"].quiver, SQ_P)
    assert is_coherent(FAN.quiver, FAN_P)
    bad = is_coherent(FAN.quiver, VertexPartition.parse("1,3|2|4|5|6"))
    assert not bad and bad.clause == "2"
    cyc = Quiver.build("123", [("x", "1", "2"), ("y", "2", "1"), ("z", "2", "3"),
                               ("w", "1", "3")])
    res = is_coherent(cyc, VertexPartition.identity(cyc.vertices))
    assert not res and res.clause == "1"
    assert is_coherent(cyc, VertexPartition.parse("1,2|3"))


def test_loops_keep_identity_coherent():
    q = Quiver.build("12", [("t", "1", "1"), ("u", "1", "2")])
    assert is_coherent(q, VertexPartition.identity(q.vertices))


@st.composite
def small_quivers(draw):
    n = draw(st.integers(1, 5))
    vs = [str(i) for i in range(n)]
    ends = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=6))
    return Quiver.build(vs, [(f"a{i}", vs[s], vs[t]) for i, (s, t) in enumerate(ends)])


def _coherent_oracle(q, p):
    g = to_nx(q)
    for a in q.arrows:
        on_cycle = a.source == a.target or nx.has_path(g, a.target, a.source)
        if on_cycle and not p.same(a.source, a.target):
            return False
    for i in q.vertices:
        for j in q.vertices:
            for k in q.vertices:
                if p.same(i, j) and not p.same(j, k):
                    if q.count(i, k) != q.count(j, k) or q.count(k, i) != q.count(k, j):
                        return False
    return True


@settings(max_examples=60, deadline=None)
@given(small_quivers())
def test_pruned_enumeration_matches_brute_force(q):
    order = tuple(sorted(q.vertices))
    brute = {rgs for rgs in iter_rgs(len(order))
             if _coherent_oracle(q, VertexPartition.from_rgs(order, rgs))}
    found, skipped = [], 0
    for rgs, p, s in coherent_partitions(q, order):
        skipped += s
        if p is not None:
            found.append(rgs)
    assert found == sorted(brute)
    assert len(found) + skipped == bell(len(order))


@settings(max_examples=60, deadline=None)
@given(small_quivers())
def test_total_and_identity_partitions(q):
    assert is_coherent(q, VertexPartition.total(q.vertices))
    loopless = nx.MultiDiGraph(to_nx(q))
    loopless.remove_edges_from(list(nx.selfloop_edges(loopless, keys=True)))
    ident = bool(is_coherent(q, VertexPartition.identity(q.vertices)))
    assert ident == nx.is_directed_acyclic_graph(loopless)


# ---------- labellings ----------

def _class_factorials(q, p):
    sizes = {}
    for a in q.arrows:
        if not p.same(a.source, a.target):
            sizes[a.source, a.target] = sizes.get((a.source, a.target), 0) + 1
    return math.prod(math.factorial(k) for k in sizes.values())


def test_labelling_counts():
    assert count_labellings(SQ["Zero"].quiver, SQ_P) == 1
    two = Quiver.build("12", [("a", "1", "2"), ("b", "1", "2")])
    assert count_labellings(two, VertexPartition.identity("12")) == 2
    # classes (1,3) and (2,3) hold two arrows each, the others one
    assert count_labellings(FAN.quiver, FAN_P) == 4 == _class_factorials(FAN.quiver, FAN_P)
    zs = enumerate_labellings(FAN.quiver, FAN_P)
    assert len({z.arrow_map for z in zs}) == 4
    assert all(z.validate() for z in zs)
    assert zs[0] == canonical_labelling(FAN.quiver, FAN_P)


def test_labelling_cap_truncates(caplog):
    zs = enumerate_labellings(FAN.quiver, FAN_P, cap=3)
    assert len(zs) == 3
    assert "labelling cap" in caplog.text


# ---------- decomposition and relation classes ----------

def test_decomposition_examples():
    z = canonical_labelling(SQ["Zero"].quiver, SQ_P)
    d = decompose_path(SQ["Zero"].quiver.path("alpha", "beta"), z)
    assert d.straightforward
    assert d.induced.arrows == ("4__2.3__0", "2.3__1__0")
    assert d.induced == decompose_path(SQ["Zero"].quiver.path("gamma", "delta"), z).induced

    zf = canonical_labelling(FAN.quiver, FAN_P)
    assert decompose_path(FAN.quiver.path("d", "e"), zf).induced.length == 0
    ag = decompose_path(FAN.quiver.path("a1", "g1"), zf)
    assert ag.straightforward and ag.induced.arrows == ("1.2__3__0", "3__4.5.6__0")
    gd = decompose_path(FAN.quiver.path("g1", "d"), zf)
    assert not gd.straightforward and gd.segments[-1].arrows == ("d",)


def test_relation_classes():
    z = canonical_labelling(SQ["Comm"].quiver, SQ_P)
    assert classify_relation(SQ["Comm"].relations[0], z) is RelationClass.NEITHER
    assert {classify_relation(r, z) for r in SQ["Zero"].relations} == {RelationClass.EXTERNAL}
    zf = canonical_labelling(FAN.quiver, FAN_P)
    classes = {str(r): classify_relation(r, zf) for r in FAN.relations}
    assert classes.pop("d*e") is RelationClass.INTERNAL
    assert set(classes.values()) == {RelationClass.EXTERNAL}


def test_internal_classification_ignores_the_labelling():
    de = lc("d*e", FAN.quiver)
    assert {classify_relation(de, z) for z in iter_labellings(FAN.quiver, FAN_P)} == {
        RelationClass.INTERNAL}


# ---------- compatibility ----------

def test_compatibility_examples():
    res = is_compatible(SQ["Comm"].relations, canonical_labelling(SQ["Comm"].quiver, SQ_P))
    assert not res and res.clause == "1"
    assert "alpha*beta - gamma*delta" in res.message
    assert is_compatible(SQ["Zero"].relations, canonical_labelling(SQ["Zero"].quiver, SQ_P))
    assert is_compatible(FAN.relations, canonical_labelling(FAN.quiver, FAN_P))


def test_fan_compatible_labellings_identify_the_alphas():
    ok = [z for z in iter_labellings(FAN.quiver, FAN_P) if is_compatible(FAN.relations, z)]
    assert len(ok) == 2
    assert all(z.z("a1") == z.z("a2") for z in ok)


def test_missing_rerouting_violates_closure():
    rels = [lc("a1*g1", FAN.quiver), lc("d*e", FAN.quiver)]
    res = is_compatible(rels, canonical_labelling(FAN.quiver, FAN_P))
    assert not res and res.clause == "3"


def test_block_without_admissible_relations():
    q = Quiver.build("123", [("x", "1", "2"), ("y", "2", "1"), ("z", "2", "3"), ("w", "1", "3")])
    p = VertexPartition.parse("1,2|3")
    res = is_compatible([], canonical_labelling(q, p))
    assert not res and res.clause == "2"


def test_ideal_and_strict_readings_differ():
    g = load("expansion.gbp").gbps["L"]
    e = expand(g)
    _, z, rels = partition_from_gbp(g)
    longest = max(rels, key=lambda r: r.max_length)
    assert longest.max_length == 4
    rest = [r for r in rels if r != longest]
    # the dropped generator is a multiple of delta*eps, so only the set reading notices
    assert is_compatible(rest, z)
    assert not is_compatible(rest, z, strict=True)
    assert is_compatible(rels, z, strict=True)
    assert e.quiver == z.quiver


# ---------- building simplifications ----------

def test_square_simplification():
    a = SQ["Zero"]
    g = build_simplification(a, canonical_labelling(a.quiver, SQ_P))
    assert g.gamma.vertices == ("1", "2.3", "4")
    assert [(x.source, x.target) for x in g.gamma.arrows] == [("2.3", "1"), ("4", "2.3")]
    assert [len(b.quiver.vertices) for _, b in g.family] == [1, 2, 1]
    assert all(not b.quiver.arrows and not b.relations for _, b in g.family)
    assert [str(r) for r in g.relations] == ["4__2.3__0*2.3__1__0"]


def hub_reference_gbp():
    gamma = Quiver.build("abc", [("alpha", "a", "b"), ("beta", "a", "b"), ("gamma", "b", "c")])
    chain = Quiver.build("456", [("delta", "4", "5"), ("eps", "5", "6")])
    return GbpAlgebra(gamma, {
        "a": BoundPathAlgebra(Quiver(("x", "y"))),
        "b": field_algebra(),
        "c": BoundPathAlgebra(chain, (lc("delta*eps", chain),)),
    }, (lc("alpha*gamma", gamma),))


def test_fan_simplification_matches_the_stated_gbp():
    g = build_simplification(FAN, canonical_labelling(FAN.quiver, FAN_P))
    assert (len(g.gamma.vertices), len(g.gamma.arrows), len(g.relations)) == (3, 3, 1)
    assert gbp_equivalent(g, hub_reference_gbp())
    assert not gbp_equivalent(g, trivial_gbp_gabriel(FAN))


def test_trivial_partitions_give_trivial_gbps():
    for a in (SQ["Zero"], FAN):
        total = VertexPartition.total(a.quiver.vertices)
        g = build_simplification(a, canonical_labelling(a.quiver, total))
        assert gbp_equivalent(g, trivial_gbp_single(a))
        ident = VertexPartition.identity(a.quiver.vertices)
        g = build_simplification(a, canonical_labelling(a.quiver, ident))
        assert gbp_equivalent(g, trivial_gbp_gabriel(a))


def test_build_rejects_bad_input():
    a = SQ["Comm"]
    with pytest.raises(ValidationError):
        build_simplification(a, canonical_labelling(a.quiver, SQ_P))
    with pytest.raises(ValidationError):
        canonical_labelling(FAN.quiver, VertexPartition.parse("1,3|2|4|5|6"))


# ---------- gbp -> partition ----------

def test_partition_from_expansion_fixture():
    p, z, rels = partition_from_gbp(load("expansion.gbp").gbps["L"])
    assert p.blocks == (("1",), ("2.1", "2.2", "2.3"), ("3",))
    assert len(rels) == 7
    assert sum(classify_relation(r, z) is RelationClass.INTERNAL for r in rels) == 1


def test_partition_from_trivial_gbps():
    a = SQ["Zero"]
    p, _, rels = partition_from_gbp(trivial_gbp_gabriel(a))
    assert p == VertexPartition.identity(a.quiver.vertices)
    assert set(rels) == set(a.relations)
    p, _, rels = partition_from_gbp(trivial_gbp_single(a))
    assert len(p.blocks) == 1
    assert [str(r) for r in rels] == ["1.alpha*1.beta", "1.gamma*1.delta"]


@settings(max_examples=25, deadline=None)
@given(gbps())
def test_gbp_round_trip(g):
    p, z, rels = partition_from_gbp(g)
    a = BoundPathAlgebra(z.quiver, tuple(rels))
    h = build_simplification(a, z)
    assert gbp_equivalent(h, g)


# ---------- loops ----------

def test_loop_simplification():
    q = Quiver.build("1", [("x", "1", "1")])
    a = BoundPathAlgebra(q, (lc("x*x", q),))
    g = loop_simplification(a)
    assert g.gamma == Quiver(("1",)) and g.algebra_at("1") == a

    q = Quiver.build("12", [("x", "1", "1"), ("u", "1", "2")])
    a = BoundPathAlgebra(q, (lc("x*x", q),))
    g = loop_simplification(a)
    assert [x.name for x in g.gamma.arrows] == ["u"] and not g.relations
    assert g.algebra_at("1").quiver.arrows[0].name == "x"
    assert g.algebra_at("2") == field_algebra("2")
    e = expand(g)
    assert sorted(x.name for x in e.quiver.arrows) == ["1.x", "u"]
    moved = BoundPathAlgebra(q, tuple(r.map_paths(lambda path: q.path(*(
        x.removeprefix("1.") for x in path.arrows))) for r in e.algebra.relations))
    assert ideals_equal(moved, a)
    z = canonical_labelling(q, VertexPartition.identity(q.vertices))
    assert gbp_equivalent(g, build_simplification(a, z))


def test_loop_simplification_preconditions():
    with pytest.raises(ValidationError):
        loop_simplification(SQ["Zero"])
    q = Quiver.build("12", [("x", "1", "2"), ("y", "2", "1")])
    with pytest.raises(ValidationError):
        loop_simplification(BoundPathAlgebra(q, (lc("x*y", q), lc("y*x", q))))


# ---------- search ----------

def test_search_fan():
    r = search_simplifications(FAN)
    assert r.simplifiable and r.partitions_examined == bell(6)
    hit = [x for x in r.results if x.partition == FAN_P]
    assert len(hit) == 1 and not hit[0].trivial
    assert [x.rgs for x in r.results] == sorted(x.rgs for x in r.results)


def test_search_marks_equivalent_results():
    r = search_simplifications(FAN, all_labellings=True)
    hub = [i for i, x in enumerate(r.results) if x.partition == FAN_P]
    assert len(hub) == 2
    assert r.results[hub[0]].equivalent_to == () and r.results[hub[1]].equivalent_to == (hub[0],)
    assert all(i < j for j, x in enumerate(r.results) for i in x.equivalent_to)


def test_search_chain_and_point():
    q = Quiver.build("12", [("a", "1", "2")])
    r = search_simplifications(BoundPathAlgebra(q))
    assert not r.simplifiable and r.partitions_examined == 2
    assert len(r.results) == 2 and all(x.trivial for x in r.results)
    r = search_simplifications(field_algebra())
    assert len(r.results) == 1 and r.results[0].trivial and not r.simplifiable


def test_search_commutative_square_is_not_simplifiable():
    r = search_simplifications(SQ["Comm"])
    assert r.partitions_examined == 15 and not r.simplifiable
    assert search_simplifications(SQ["Zero"]).simplifiable


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_random_round_trip(seed):
    a = random_acyclic_algebra(random.Random(seed), max_vertices=5, max_arrows=6)
    for _, p, _ in coherent_partitions(a.quiver):
        if p is None:
            continue
        z = canonical_labelling(a.quiver, p)
        if not is_compatible(a.relations, z):
            continue
        g = build_simplification(a, z, verify=False)
        assert expansion_matches(a, z, g)
        # the rank oracle agrees on the ideal of the expansion, renamed through z
        ex = expand(g)
        names = {n: o.arrow if hasattr(o, "arrow") else next(
            x for x in a.quiver.arrows_between(o.source, o.target) if z.z(x) == o.gamma_arrow)
            for n, o in ex.arrow_origin.items()}
        moved = BoundPathAlgebra(a.quiver, tuple(r.map_paths(
            lambda path: a.quiver.path(*(names[x] for x in path.arrows)) if path.arrows
            else path) for r in ex.algebra.relations))
        assert same_ideal(moved, a)
