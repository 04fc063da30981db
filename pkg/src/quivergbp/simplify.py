"""Simplifications of a bound path algebra from equivalence relations on its vertices.

The pipeline per vertex partition is coherence -> labellings -> compatibility
-> gbp construction, and the exhaustive search runs it over every set
partition of the vertices.
"""

from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterator

from .algebra import (
    DEFAULT_NMAX,
    BoundPathAlgebra,
    LinComb,
    Status,
    check_admissible,
    ideal_span,
    ideals_equal,
    is_relation,
)
from .errors import CapExceeded, ValidationError
from .gbp import (
    GbpAlgebra,
    InternalOrigin,
    expand,
    gbp_equivalent,
    internal_path_choices,
    trivial_gbp_gabriel,
    trivial_gbp_single,
    validate_gbp,
)
from .partitions import bell, completions
from .quiver import (
    Path,
    Quiver,
    QuiverIso,
    VertexPartition,
    cycle_arrows,
    is_acyclic,
    quotient_quiver,
    reduced_quiver,
    relabel_path,
    relabel_quiver,
    strongly_connected_components,
)

log = logging.getLogger(__name__)

DEFAULT_LABELLING_CAP = 64
DEFAULT_MAX_VERTICES = 12
PAIRWISE_LIMIT = 32
DEFAULT_COMBINATION_CAP = 200_000


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a structural check; falsy when a clause is violated."""

    ok: bool
    clause: str | None = None
    message: str = ""
    witness: object = None

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "ok"
        return f"clause ({self.clause}) violated: {self.message}"


OK = CheckResult(True)


def is_coherent(q: Quiver, p: VertexPartition) -> CheckResult:
    if not p.covers(q):
        raise ValueError(f"partition {p} does not cover the quiver's vertices")
    for a in cycle_arrows(q):
        if not p.same(a.source, a.target):
            return CheckResult(False, "1", f"arrow {a.name}: {a.source} -> {a.target} lies on an "
                               "oriented cycle but its endpoints are not identified", a.name)
    for block in p.blocks:
        for x, y in itertools.combinations(block, 2):
            for w in q.vertices:
                if p.same(w, x):
                    continue
                if q.count(x, w) != q.count(y, w):
                    return CheckResult(False, "2", f"[{x},{w}]={q.count(x, w)} but "
                                       f"[{y},{w}]={q.count(y, w)}", (x, y, w))
                if q.count(w, x) != q.count(w, y):
                    return CheckResult(False, "2", f"[{w},{x}]={q.count(w, x)} but "
                                       f"[{w},{y}]={q.count(w, y)}", (x, y, w))
    return OK


@dataclass(frozen=True)
class Labelling:
    """A quiver morphism z from the reduced quiver onto ``target``.

    ``vertex_map`` sends each vertex to the target vertex standing for its
    block; ``arrow_map`` covers exactly the arrows between distinct blocks.
    """

    quiver: Quiver
    partition: VertexPartition
    target: Quiver
    vertex_map: tuple[tuple[str, str], ...]
    arrow_map: tuple[tuple[str, str], ...]

    @cached_property
    def _vmap(self) -> dict[str, str]:
        return dict(self.vertex_map)

    @cached_property
    def _amap(self) -> dict[str, str]:
        return dict(self.arrow_map)

    @cached_property
    def _pre(self) -> dict[str, list[str]]:
        out = {a.name: [] for a in self.target.arrows}
        for src, dst in self.arrow_map:
            out[dst].append(src)
        return out

    def vertex(self, v: str) -> str:
        return self._vmap[v]

    def z(self, arrow: str) -> str:
        return self._amap[arrow]

    def preimages(self, target_arrow: str) -> list[str]:
        return self._pre[target_arrow]

    def block_at(self, target_vertex: str) -> tuple[str, ...]:
        return tuple(v for v in self.quiver.vertices if self._vmap[v] == target_vertex)

    def validate(self) -> CheckResult:
        q, p, t = self.quiver, self.partition, self.target
        blocks_seen = {}
        for v in q.vertices:
            img = self._vmap[v]
            other = blocks_seen.setdefault(img, p.block_of(v))
            if other != p.block_of(v):
                return CheckResult(False, "vertex", f"vertex {img} receives two blocks")
        if set(blocks_seen) != set(t.vertices):
            return CheckResult(False, "vertex", "vertex map is not onto the target")
        crossing = {a.name for a in q.arrows if not p.same(a.source, a.target)}
        if set(self._amap) != crossing:
            return CheckResult(False, "arrow", "arrow map must cover exactly the reduced quiver")
        for x in q.vertices:
            for y in q.vertices:
                if p.same(x, y):
                    continue
                src = q.arrows_between(x, y)
                imgs = [self._amap[a] for a in src]
                want = set(t.arrows_between(self._vmap[x], self._vmap[y]))
                if len(set(imgs)) != len(imgs) or set(imgs) != want:
                    return CheckResult(False, "bijection",
                                       f"arrows {x}->{y} do not map bijectively", (x, y))
        return OK

    def describe(self) -> dict[str, str]:
        return dict(sorted(self.arrow_map))


def _crossing_classes(q: Quiver, p: VertexPartition, target: Quiver, vname) -> list:
    classes = []
    for x in sorted(q.vertices):
        for y in sorted(q.vertices):
            if p.same(x, y) or not q.count(x, y):
                continue
            src = tuple(sorted(q.arrows_between(x, y)))
            dst = target.arrows_between(vname(x), vname(y))
            if len(src) != len(dst):
                raise ValidationError(f"partition {p} is not coherent: [{x},{y}] differs "
                                      "from the quotient arrow count")
            classes.append((src, dst))
    return classes


def _labelling_target(q: Quiver, p: VertexPartition) -> Quiver:
    return quotient_quiver(reduced_quiver(q, p), p)


def iter_labellings(q: Quiver, p: VertexPartition) -> Iterator[Labelling]:
    """All labellings; the canonical (sorted-order) one comes first."""
    target = _labelling_target(q, p)
    vmap = tuple((v, p.name_of(v)) for v in q.vertices)
    classes = _crossing_classes(q, p, target, p.name_of)
    for combo in itertools.product(*(itertools.permutations(dst) for _, dst in classes)):
        amap = []
        for (src, _), dst in zip(classes, combo):
            amap.extend(zip(src, dst))
        yield Labelling(q, p, target, vmap, tuple(sorted(amap)))


def canonical_labelling(q: Quiver, p: VertexPartition) -> Labelling:
    check = is_coherent(q, p)
    if not check:
        raise ValidationError(f"partition {p} is not coherent: {check}")
    return next(iter_labellings(q, p))


def count_labellings(q: Quiver, p: VertexPartition) -> int:
    n = 1
    for x in q.vertices:
        for y in q.vertices:
            if not p.same(x, y):
                n *= _factorial(q.count(x, y))
    return n


def _factorial(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def enumerate_labellings(q: Quiver, p: VertexPartition,
                         cap: int = DEFAULT_LABELLING_CAP) -> list[Labelling]:
    """Labellings up to ``cap``; truncation is logged (compare ``count_labellings``)."""
    check = is_coherent(q, p)
    if not check:
        raise ValidationError(f"partition {p} is not coherent: {check}")
    out = list(itertools.islice(iter_labellings(q, p), cap))
    total = count_labellings(q, p)
    if total > cap:
        log.warning("labelling cap %d reached for partition %s (%d labellings exist)",
                    cap, p, total)
    return out


@dataclass(frozen=True)
class PathDecomposition:
    """delta_0 alpha_1 delta_1 ... alpha_m delta_m with internal deltas."""

    segments: tuple[Path, ...]
    crossings: tuple[str, ...]
    induced: Path
    straightforward: bool


def decompose_path(path: Path, z: Labelling) -> PathDecomposition:
    q, p = z.quiver, z.partition
    segments, crossings = [], []
    seg_start, seg = path.start, []
    for name in path.arrows:
        a = q.arrow(name)
        if p.same(a.source, a.target):
            seg.append(name)
        else:
            segments.append(Path(seg_start, a.source, tuple(seg)))
            crossings.append(name)
            seg_start, seg = a.target, []
    segments.append(Path(seg_start, path.end, tuple(seg)))
    induced = Path(z.vertex(path.start), z.vertex(path.end), tuple(z.z(a) for a in crossings))
    return PathDecomposition(tuple(segments), tuple(crossings), induced,
                             segments[0].length == 0 and segments[-1].length == 0)


class RelationClass(enum.Enum):
    INTERNAL = "internal"
    EXTERNAL = "external"
    NEITHER = "neither"


def classify_relation(c: LinComb, z: Labelling) -> RelationClass:
    decs = [decompose_path(p, z) for p in c.paths]
    if all(d.induced.length == 0 for d in decs):
        return RelationClass.INTERNAL
    induced = [d.induced for d in decs]
    if all(d.straightforward for d in decs) and len(set(induced)) == len(induced):
        return RelationClass.EXTERNAL
    return RelationClass.NEITHER


def induced_relation(c: LinComb, z: Labelling) -> LinComb:
    """z(c) = sum of coefficients times induced paths over the target quiver."""
    return c.map_paths(lambda p: decompose_path(p, z).induced)


def _block_algebras(rels, z: Labelling) -> dict[str, BoundPathAlgebra]:
    out = {}
    internal = [r for r in rels if classify_relation(r, z) is RelationClass.INTERNAL]
    for tv in z.target.vertices:
        block = z.block_at(tv)
        sub = z.quiver.subquiver(block)
        omega = [r for r in internal if next(iter(r.starts)) in block]
        out[tv] = BoundPathAlgebra(sub, tuple(omega))
    return out


class _Lifter:
    """Straightforward paths of Q over a given induced path of the target."""

    def __init__(self, z: Labelling, blocks: dict[str, BoundPathAlgebra], nmax: int):
        self.z = z
        self.segments: dict[tuple[str, str], list[Path]] = {}
        self.cyclic = False
        for tv, alg in blocks.items():
            if not is_acyclic(alg.quiver):
                self.cyclic = True
            for p in internal_path_choices(alg, nmax):
                self.segments.setdefault((p.start, p.end), []).append(p)

    def lifts(self, induced: Path) -> list[Path]:
        q = self.z.quiver
        partial = [(None, ())]
        for i, zeta in enumerate(induced.arrows):
            nxt = []
            for end, arrows in partial:
                for alpha in self.z.preimages(zeta):
                    a = q.arrow(alpha)
                    if end is None:
                        nxt.append((a.target, (alpha,)))
                        continue
                    for seg in self.segments.get((end, a.source), ()):
                        nxt.append((a.target, arrows + seg.arrows + (alpha,)))
            partial = nxt
        return [q.path(*arrows) for _, arrows in partial]


def is_compatible(rels, z: Labelling, strict: bool = False, nmax: int = DEFAULT_NMAX,
                  cap: int = DEFAULT_COMBINATION_CAP) -> CheckResult:
    """Check the three compatibility clauses of ``rels`` with ``z.partition``.

    Clause (3) asks, for each external relation, that every re-routing through
    straightforward paths with the same induced paths lies in the ideal (R)
    (default) or literally in the normalized relation set (``strict``).
    """
    rels = tuple(rels)
    classes = {}
    for r in rels:
        if not is_relation(r):
            raise ValidationError(f"{r} is not a relation")
        cls = classify_relation(r, z)
        if cls is RelationClass.NEITHER:
            return CheckResult(False, "1", f"{r} is neither internal nor external", r)
        classes[r] = cls

    blocks = _block_algebras(rels, z)
    for tv, alg in blocks.items():
        adm = check_admissible(alg, nmax)
        if adm.status is not Status.ADMISSIBLE:
            return CheckResult(False, "2", f"internal relations on block {tv} are "
                               f"{adm.status.value}: {adm.reason}", tv)

    external = [r for r in rels if classes[r] is RelationClass.EXTERNAL]
    if not external:
        return OK
    lifter = _Lifter(z, blocks, nmax)
    if strict:
        if lifter.cyclic:
            raise ValueError("strict compatibility needs every block to be loop-free")
        members = {r.normalized() for r in rels}
        contains = lambda x: x.normalized() in members  # noqa: E731
    else:
        whole = BoundPathAlgebra(z.quiver, rels)
        adm = check_admissible(whole, nmax)
        if adm.status is not Status.ADMISSIBLE:
            return CheckResult(False, "3", f"ideal membership undecidable: {adm.reason}")
        contains = ideal_span(whole, adm.bound, True).contains

    for r in external:
        items = r.items()
        options = [lifter.lifts(decompose_path(p, z).induced) for p, _ in items]
        total = 1
        for o in options:
            total *= len(o)
        if total > cap:
            raise CapExceeded(f"{total} re-routings of {r} exceed the cap {cap}")
        for combo in itertools.product(*options):
            x = LinComb([(eta, c) for eta, (_, c) in zip(combo, items)])
            if not contains(x):
                return CheckResult(False, "3", f"re-routing {x} of external relation {r} "
                                   "is not generated by R", x)
    return OK


def build_simplification(a: BoundPathAlgebra, z: Labelling, nmax: int = DEFAULT_NMAX,
                         strict: bool = False, verify: bool = True) -> GbpAlgebra:
    """The gbp-algebra attached to a coherent, compatible partition and labelling.

    With ``verify`` the expansion of the result is checked to present the
    same ideal as ``a`` under the origin correspondence.
    """
    if z.quiver != a.quiver:
        raise ValidationError("labelling is over a different quiver")
    coh = is_coherent(a.quiver, z.partition)
    if not coh:
        raise ValidationError(f"partition not coherent: {coh}")
    comp = is_compatible(a.relations, z, strict=strict, nmax=nmax)
    if not comp:
        raise ValidationError(f"relations not compatible: {comp}")
    gamma = z.target
    if not is_acyclic(gamma):
        raise RuntimeError("quotient of the reduced quiver has a cycle despite coherence")
    blocks = _block_algebras(a.relations, z)
    ext = [induced_relation(r, z) for r in a.relations
           if classify_relation(r, z) is RelationClass.EXTERNAL]
    g = GbpAlgebra(gamma, blocks, tuple(ext), name=a.name)
    if verify and not expansion_matches(a, z, g, nmax):
        raise RuntimeError(f"expansion of the simplification for {z.partition} "
                           "does not reproduce the original ideal")
    return g


def expansion_matches(a: BoundPathAlgebra, z: Labelling, g: GbpAlgebra,
                      nmax: int = DEFAULT_NMAX) -> bool:
    """ideals_equal(expand(g), a) after renaming expanded ids back to a's ids.

    Block algebras keep the original vertex and arrow ids, and an arrow copy
    of gamma arrow l from p to q corresponds to the unique arrow of Q(p, q)
    labelled l.
    """
    ex = expand(g, nmax)
    vmap = {name: lv for name, (_, lv) in ex.vertex_origin.items()}
    amap = {}
    for name, origin in ex.arrow_origin.items():
        if isinstance(origin, InternalOrigin):
            amap[name] = origin.arrow
        else:
            pre = [x for x in a.quiver.arrows_between(origin.source, origin.target)
                   if z.z(x) == origin.gamma_arrow]
            if len(pre) != 1:
                return False
            amap[name] = pre[0]
    iso = QuiverIso(vmap, amap)
    if not relabel_quiver(ex.quiver, iso).same_as(a.quiver):
        return False
    moved = BoundPathAlgebra(a.quiver, tuple(r.map_paths(lambda p: relabel_path(p, iso))
                                             for r in ex.algebra.relations))
    return ideals_equal(moved, a, nmax)


def partition_from_gbp(g: GbpAlgebra, nmax: int = DEFAULT_NMAX
                       ) -> tuple[VertexPartition, Labelling, list[LinComb]]:
    """Partition, labelling and relations R' on the expanded quiver of ``g``.

    The partition groups expanded vertices by the gamma vertex they came from
    and every arrow copy is labelled by its gamma arrow.
    """
    ex = expand(g, nmax)
    q = ex.quiver
    groups = {}
    for v in q.vertices:
        groups.setdefault(ex.vertex_origin[v][0], []).append(v)
    p = VertexPartition(tuple(tuple(b) for b in groups.values()))
    amap = tuple(sorted((name, o.gamma_arrow) for name, o in ex.arrow_origin.items()
                        if not isinstance(o, InternalOrigin)))
    vmap = tuple((v, ex.vertex_origin[v][0]) for v in q.vertices)
    z = Labelling(q, p, g.gamma, vmap, amap)
    rels = list(ex.algebra.relations)
    for check in (z.validate(), is_coherent(q, p), is_compatible(rels, z, nmax=nmax)):
        if not check:
            raise RuntimeError(f"recovered partition fails a check: {check}")
    return p, z, rels


def loop_simplification(a: BoundPathAlgebra, nmax: int = DEFAULT_NMAX) -> GbpAlgebra:
    """Delete all loops; each vertex carries the algebra of its loops.

    Requires every oriented cycle to be a loop and every relation to involve
    loops only.
    """
    q = a.quiver
    loops = {x.name for x in q.loops()}
    gamma = Quiver(q.vertices, tuple(x for x in q.arrows if x.name not in loops))
    diags = []
    if not is_acyclic(gamma):
        comp = next(c for c in strongly_connected_components(gamma) if len(c) > 1)
        diags.append(f"oriented cycle through {sorted(comp)} is not a loop")
    for r in a.relations:
        bad = sorted({x for p in r.paths for x in p.arrows if x not in loops})
        if bad:
            diags.append(f"relation {r} uses non-loop arrows {bad}")
    if diags:
        raise ValidationError(diags)
    family = {}
    for v in q.vertices:
        sub = Quiver((v,), tuple(x for x in q.arrows if x.name in loops and x.source == v))
        omega = tuple(r for r in a.relations if next(iter(r.starts)) == v)
        family[v] = BoundPathAlgebra(sub, omega)
    g = GbpAlgebra(gamma, family, (), name=a.name)
    diags = validate_gbp(g, nmax)
    if diags:
        raise ValidationError(diags)
    return g


# ---------- exhaustive search ----------

@dataclass
class SearchResult:
    partition: VertexPartition
    rgs: tuple[int, ...]
    labelling: Labelling
    gbp: GbpAlgebra
    trivial: bool
    equivalent_to: tuple[int, ...] = ()  # indices of earlier equivalent results


@dataclass
class SearchReport:
    input_name: str | None
    vertex_order: tuple[str, ...]
    partitions_examined: int = 0
    coherent_partitions: int = 0
    results: list[SearchResult] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    @property
    def simplifiable(self) -> bool:
        return any(not r.trivial for r in self.results)


def coherent_partitions(q: Quiver, order: tuple[str, ...] | None = None
                        ) -> Iterator[tuple[tuple[int, ...], VertexPartition, int]]:
    """Restricted-growth enumeration with prefix pruning on the coherence clauses.

    Yields (rgs, partition, skipped) where ``skipped`` counts the partitions
    pruned since the previous yield, so yielded + skipped totals Bell(n).
    The final remainder is yielded with partition ``None``.
    """
    order = tuple(sorted(q.vertices)) if order is None else order
    n = len(order)
    scc = {}
    for comp in strongly_connected_components(q):
        for v in comp:
            scc[v] = comp
    nontrivial = {v for v in q.vertices
                  if len(scc[v]) > 1}
    a = []
    skipped = 0

    def consistent(i: int, b: int) -> bool:
        v = order[i]
        if v in nontrivial:
            for j in range(i):
                if order[j] in scc[v] and a[j] != b:
                    return False
        for j in range(i):
            u = order[j]
            if a[j] == b:
                for k in range(i):
                    w = order[k]
                    if a[k] != b and (q.count(u, w) != q.count(v, w) or q.count(w, u) != q.count(w, v)):
                        return False
            else:
                for k in range(j + 1, i):
                    if a[k] == a[j]:
                        x = order[k]
                        if q.count(u, v) != q.count(x, v) or q.count(v, u) != q.count(v, x):
                            return False
        return True

    def rec(i: int, blocks: int):
        nonlocal skipped
        if i == n:
            yield tuple(a), VertexPartition.from_rgs(order, a), skipped
            skipped = 0
            return
        for b in range(blocks + 1):
            nb = max(blocks, b + 1)
            if consistent(i, b):
                a.append(b)
                yield from rec(i + 1, nb)
                a.pop()
            else:
                skipped += completions(n - i - 1, nb)

    yield from rec(0, 0)
    if skipped:
        yield None, None, skipped


def search_simplifications(a: BoundPathAlgebra, labelling_cap: int = DEFAULT_LABELLING_CAP,
                           max_vertices: int = DEFAULT_MAX_VERTICES,
                           all_labellings: bool = False, strict: bool = False,
                           nmax: int = DEFAULT_NMAX, verify: bool = True) -> SearchReport:
    """Run the partition pipeline over every set partition of the vertices.

    By default each coherent partition stops at its first compatible
    labelling (canonical one first); ``all_labellings`` keeps them all.
    Every result is compared against both trivial simplifications.
    """
    q = a.quiver
    if len(q.vertices) > max_vertices:
        raise CapExceeded(f"{len(q.vertices)} vertices exceed the search cap {max_vertices} "
                          f"(Bell number {bell(len(q.vertices))})")
    adm = check_admissible(a, nmax)
    if adm.status is not Status.ADMISSIBLE:
        raise ValidationError(f"input algebra is {adm.status.value}: {adm.reason}")
    order = tuple(sorted(q.vertices))
    report = SearchReport(a.name, order)
    trivial = [trivial_gbp_single(a)]
    if is_acyclic(q):
        trivial.append(trivial_gbp_gabriel(a))

    for rgs, p, skipped in coherent_partitions(q, order):
        report.partitions_examined += skipped
        if p is None:
            continue
        report.partitions_examined += 1
        if not is_coherent(q, p):
            continue
        report.coherent_partitions += 1
        total = count_labellings(q, p)
        if total > labelling_cap:
            report.diagnostics.append(f"partition {p.spec()}: labelling cap {labelling_cap} "
                                      f"reached ({total} labellings)")
        for z in itertools.islice(iter_labellings(q, p), labelling_cap):
            if not is_compatible(a.relations, z, strict=strict, nmax=nmax):
                continue
            g = build_simplification(a, z, nmax=nmax, strict=strict, verify=verify)
            is_trivial = any(gbp_equivalent(g, t, max_vertices, nmax) for t in trivial)
            report.results.append(SearchResult(p, rgs, z, g, is_trivial))
            if not all_labellings:
                break
    report.results.sort(key=lambda r: r.rgs)
    if len(report.results) <= PAIRWISE_LIMIT:
        _mark_equivalent(report.results, max_vertices, nmax)
    else:
        report.diagnostics.append(f"{len(report.results)} results: pairwise equivalence "
                                  f"skipped (limit {PAIRWISE_LIMIT})")
    return report


def _mark_equivalent(results: list[SearchResult], max_vertices: int, nmax: int) -> None:
    """Record, for each result, the earlier results whose gbps are equivalent to it."""
    for j, r in enumerate(results):
        same = []
        for i, prev in enumerate(results[:j]):
            a, b = prev.gbp.gamma, r.gbp.gamma
            if (len(a.vertices), len(a.arrows)) != (len(b.vertices), len(b.arrows)):
                continue
            if gbp_equivalent(prev.gbp, r.gbp, max_vertices, nmax):
                same.append(i)
        results[j] = replace(r, equivalent_to=tuple(same))
