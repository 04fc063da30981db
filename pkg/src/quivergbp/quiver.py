"""Finite quivers, paths, vertex partitions and quotient constructions."""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Sequence

from .errors import CapExceeded

DEFAULT_ISO_VERTEX_CAP = 12


class Arrow(NamedTuple):
    name: str
    source: str
    target: str


@dataclass(frozen=True)
class Path:
    """A path over a quiver.

    A trivial path has ``arrows == ()`` and ``start == end``.  Composite paths
    keep their endpoints so that composition never needs the ambient quiver.
    """

    start: str
    end: str
    arrows: tuple[str, ...] = ()

    @classmethod
    def trivial(cls, vertex: str) -> Path:
        return cls(vertex, vertex, ())

    @property
    def length(self) -> int:
        return len(self.arrows)

    @property
    def is_trivial(self) -> bool:
        return not self.arrows

    def sort_key(self) -> tuple:
        return (len(self.arrows), self.arrows, self.start, self.end)

    def __lt__(self, other: Path) -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        if not self.arrows:
            return f"e_{self.start}"
        return "*".join(self.arrows)


def compose(p: Path, r: Path) -> Path | None:
    """Juxtapose ``p`` then ``r``; ``None`` is the zero of the path algebra."""
    if p.end != r.start:
        return None
    return Path(p.start, r.end, p.arrows + r.arrows)


@dataclass(frozen=True)
class Quiver:
    vertices: tuple[str, ...]
    arrows: tuple[Arrow, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(str(v) for v in self.vertices))
        object.__setattr__(
            self, "arrows", tuple(Arrow(str(a), str(s), str(t)) for a, s, t in self.arrows)
        )
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError(f"duplicate vertex ids in {self.vertices}")
        names = [a.name for a in self.arrows]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate arrow ids: {dup}")
        vs = set(self.vertices)
        for a in self.arrows:
            if a.source not in vs or a.target not in vs:
                raise ValueError(f"arrow {a.name} has an undeclared endpoint")

    @classmethod
    def build(cls, vertices: Iterable, arrows: Iterable[Sequence] = ()) -> Quiver:
        return cls(tuple(vertices), tuple(Arrow(*a) for a in arrows))

    @cached_property
    def _arrow_index(self) -> dict[str, Arrow]:
        return {a.name: a for a in self.arrows}

    @cached_property
    def _between(self) -> dict[tuple[str, str], tuple[str, ...]]:
        table = defaultdict(list)
        for a in self.arrows:
            table[a.source, a.target].append(a.name)
        return {k: tuple(v) for k, v in table.items()}

    @cached_property
    def _out(self) -> dict[str, tuple[Arrow, ...]]:
        table = {v: [] for v in self.vertices}
        for a in sorted(self.arrows):
            table[a.source].append(a)
        return {k: tuple(v) for k, v in table.items()}

    @cached_property
    def _in(self) -> dict[str, tuple[Arrow, ...]]:
        table = {v: [] for v in self.vertices}
        for a in sorted(self.arrows):
            table[a.target].append(a)
        return {k: tuple(v) for k, v in table.items()}

    def arrow(self, name: str) -> Arrow:
        return self._arrow_index[name]

    def has_arrow(self, name: str) -> bool:
        return name in self._arrow_index

    def arrows_between(self, x: str, y: str) -> tuple[str, ...]:
        """Q(x, y) in declaration order."""
        return self._between.get((x, y), ())

    def count(self, x: str, y: str) -> int:
        """[x, y]_Q."""
        return len(self.arrows_between(x, y))

    def out_arrows(self, v: str) -> tuple[Arrow, ...]:
        return self._out[v]

    def in_arrows(self, v: str) -> tuple[Arrow, ...]:
        return self._in[v]

    def arrow_path(self, name: str) -> Path:
        a = self.arrow(name)
        return Path(a.source, a.target, (a.name,))

    def path(self, *names: str) -> Path:
        """Path from a sequence of arrow ids; raises if they do not compose."""
        if not names:
            raise ValueError("use Path.trivial for length-0 paths")
        first = self.arrow(names[0])
        end = first.target
        for n in names[1:]:
            a = self.arrow(n)
            if a.source != end:
                raise ValueError(f"arrows {' '.join(names)} do not compose at {n}")
            end = a.target
        return Path(first.source, end, tuple(names))

    def subquiver(self, vertices: Iterable[str]) -> Quiver:
        """Full subquiver on the given vertices."""
        keep = set(vertices)
        return Quiver(
            tuple(v for v in self.vertices if v in keep),
            tuple(a for a in self.arrows if a.source in keep and a.target in keep),
        )

    def same_as(self, other: Quiver) -> bool:
        """Equality ignoring declaration order."""
        return set(self.vertices) == set(other.vertices) and set(self.arrows) == set(other.arrows)

    def loops(self) -> tuple[Arrow, ...]:
        return tuple(a for a in self.arrows if a.source == a.target)


def is_acyclic(q: Quiver) -> bool:
    return topological_order(q) is not None


def topological_order(q: Quiver) -> list[str] | None:
    """Kahn's algorithm; ``None`` if the quiver has an oriented cycle."""
    indeg = {v: 0 for v in q.vertices}
    for a in q.arrows:
        indeg[a.target] += 1
    ready = sorted(v for v, d in indeg.items() if d == 0)
    order = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        for a in q.out_arrows(v):
            indeg[a.target] -= 1
            if indeg[a.target] == 0:
                ready.append(a.target)
        ready.sort()
    return order if len(order) == len(q.vertices) else None


def longest_path_length(q: Quiver) -> int:
    order = topological_order(q)
    if order is None:
        raise ValueError("longest path is unbounded on a cyclic quiver")
    best = {v: 0 for v in q.vertices}
    for v in order:
        for a in q.out_arrows(v):
            best[a.target] = max(best[a.target], best[v] + 1)
    return max(best.values(), default=0)


def strongly_connected_components(q: Quiver) -> list[frozenset[str]]:
    reach = {v: _reachable(q, v) for v in q.vertices}
    seen = set()
    comps = []
    for v in q.vertices:
        if v in seen:
            continue
        comp = frozenset(w for w in reach[v] if v in reach[w]) | {v}
        seen |= comp
        comps.append(comp)
    return comps


def _reachable(q: Quiver, v: str) -> set[str]:
    """Vertices reachable from v by a path of length >= 1."""
    out = set()
    stack = [a.target for a in q.out_arrows(v)]
    while stack:
        w = stack.pop()
        if w in out:
            continue
        out.add(w)
        stack.extend(a.target for a in q.out_arrows(w))
    return out


def cycle_arrows(q: Quiver) -> list[Arrow]:
    """Arrows lying on some oriented cycle (loops included)."""
    comp_of = {}
    for comp in strongly_connected_components(q):
        for v in comp:
            comp_of[v] = comp
    return [a for a in q.arrows if comp_of[a.source] is comp_of[a.target]
            and (a.source == a.target or len(comp_of[a.source]) > 1)]


def iter_paths(q: Quiver, max_len: int, start: str | None = None) -> Iterator[Path]:
    """Depth-first generation of all paths of length <= max_len (unordered)."""
    starts = q.vertices if start is None else (start,)
    for v in starts:
        stack = [Path.trivial(v)]
        while stack:
            p = stack.pop()
            yield p
            if p.length < max_len:
                for a in q.out_arrows(p.end):
                    stack.append(Path(p.start, a.target, p.arrows + (a.name,)))


def enumerate_paths(q: Quiver, max_len: int, cap: int | None = None) -> list[Path]:
    """All paths of length <= max_len, ordered by length then arrow ids."""
    if max_len < 0:
        raise ValueError("max_len must be non-negative")
    out = []
    for p in iter_paths(q, max_len):
        out.append(p)
        if cap is not None and len(out) > cap:
            raise CapExceeded(f"more than {cap} paths of length <= {max_len}")
    out.sort(key=Path.sort_key)
    return out


def paths_between(q: Quiver, u: str, v: str, max_len: int) -> list[Path]:
    return sorted((p for p in iter_paths(q, max_len, start=u) if p.end == v), key=Path.sort_key)


def long_path_between(q: Quiver, u: str, v: str, min_len: int) -> Path | None:
    """Shortest path u ~> v of length >= min_len, or None when there is none.

    Breadth-first over states (vertex, min(length, min_len)); ties broken by
    arrow id so the answer is deterministic.
    """
    start = (u, 0)
    parent = {start: None}
    frontier = [start]
    while frontier:
        nxt = []
        for state in frontier:
            w, ln = state
            if w == v and ln >= min_len:
                arrows = []
                while parent[state] is not None:
                    state, name = parent[state]
                    arrows.append(name)
                return Path(u, v, tuple(reversed(arrows)))
            for a in q.out_arrows(w):
                s2 = (a.target, min(ln + 1, min_len))
                if s2 not in parent:
                    parent[s2] = (state, a.name)
                    nxt.append(s2)
        frontier = nxt
    return None


@dataclass(frozen=True)
class VertexPartition:
    """An equivalence relation on vertices, stored as canonically ordered blocks."""

    blocks: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(sorted(str(v) for v in b)) for b in self.blocks)
        if any(not b for b in blocks):
            raise ValueError("partition blocks must be nonempty")
        flat = [v for b in blocks for v in b]
        if len(set(flat)) != len(flat):
            raise ValueError("partition blocks overlap")
        object.__setattr__(self, "blocks", tuple(sorted(blocks)))

    @classmethod
    def identity(cls, vertices: Iterable[str]) -> VertexPartition:
        return cls(tuple((v,) for v in vertices))

    @classmethod
    def total(cls, vertices: Iterable[str]) -> VertexPartition:
        return cls((tuple(vertices),))

    @classmethod
    def parse(cls, spec: str) -> VertexPartition:
        """``"1,2|3|4,5,6"`` -> blocks {1,2}, {3}, {4,5,6}."""
        blocks = []
        for chunk in spec.split("|"):
            members = [m.strip() for m in chunk.split(",") if m.strip()]
            if not members:
                raise ValueError(f"empty block in partition spec {spec!r}")
            blocks.append(tuple(members))
        return cls(tuple(blocks))

    @classmethod
    def from_rgs(cls, vertices: Sequence[str], rgs: Sequence[int]) -> VertexPartition:
        groups = defaultdict(list)
        for v, b in zip(vertices, rgs):
            groups[b].append(v)
        return cls(tuple(tuple(groups[b]) for b in sorted(groups)))

    @cached_property
    def _block_of(self) -> dict[str, tuple[str, ...]]:
        return {v: b for b in self.blocks for v in b}

    @property
    def vertices(self) -> frozenset[str]:
        return frozenset(self._block_of)

    def block_of(self, v: str) -> tuple[str, ...]:
        return self._block_of[v]

    def same(self, x: str, y: str) -> bool:
        return self._block_of[x] is self._block_of[y]

    def name_of(self, v: str) -> str:
        return block_name(self._block_of[v])

    def covers(self, q: Quiver) -> bool:
        return self.vertices == frozenset(q.vertices)

    def rgs(self, order: Sequence[str]) -> tuple[int, ...]:
        """Restricted-growth string relative to a vertex order."""
        label = {}
        out = []
        for v in order:
            b = self._block_of[v]
            if b not in label:
                label[b] = len(label)
            out.append(label[b])
        return tuple(out)

    def spec(self) -> str:
        return "|".join(",".join(b) for b in self.blocks)

    def __str__(self) -> str:
        return "{" + "}{".join(",".join(b) for b in self.blocks) + "}"


def block_name(block: Sequence[str]) -> str:
    return ".".join(block)


def _require_partition(q: Quiver, p: VertexPartition) -> None:
    if not p.covers(q):
        raise ValueError(f"partition {p} does not cover the vertices of the quiver")


def reduced_quiver(q: Quiver, p: VertexPartition) -> Quiver:
    """Drop every arrow whose endpoints are identified."""
    _require_partition(q, p)
    return Quiver(q.vertices, tuple(a for a in q.arrows if not p.same(a.source, a.target)))


def quotient_quiver(q: Quiver, p: VertexPartition) -> Quiver:
    """Vertices are blocks; [a, b] = max of [x, y] over representatives."""
    _require_partition(q, p)
    names = [block_name(b) for b in p.blocks]
    if len(set(names)) != len(names):
        raise ValueError(f"block names collide for partition {p}")
    arrows = []
    for ba in p.blocks:
        for bb in p.blocks:
            n = max(q.count(x, y) for x in ba for y in bb)
            src, dst = block_name(ba), block_name(bb)
            arrows.extend(Arrow(f"{src}__{dst}__{k}", src, dst) for k in range(n))
    return Quiver(tuple(names), tuple(arrows))


class QuiverIso(NamedTuple):
    vertex_map: dict[str, str]
    arrow_map: dict[str, str]


def _signature(q: Quiver, v: str) -> tuple:
    return (
        tuple(sorted(q.count(v, w) for w in q.vertices if w != v)),
        tuple(sorted(q.count(w, v) for w in q.vertices if w != v)),
        q.count(v, v),
    )


def iter_isomorphisms(a: Quiver, b: Quiver, max_vertices: int = DEFAULT_ISO_VERTEX_CAP,
                      all_arrow_maps: bool = True) -> Iterator[QuiverIso]:
    """Backtracking search over vertex bijections preserving every [x, y].

    For each vertex bijection, arrow bijections range over all matchings of
    parallel arrows (or just the order-preserving one when
    ``all_arrow_maps`` is false).
    """
    if len(a.vertices) > max_vertices or len(b.vertices) > max_vertices:
        raise CapExceeded(f"isomorphism search is capped at {max_vertices} vertices")
    if len(a.vertices) != len(b.vertices) or len(a.arrows) != len(b.arrows):
        return
    sig_b = defaultdict(list)
    for v in b.vertices:
        sig_b[_signature(b, v)].append(v)
    candidates = {}
    for v in a.vertices:
        cands = sig_b.get(_signature(a, v))
        if not cands:
            return
        candidates[v] = cands
    order = sorted(a.vertices, key=lambda v: len(candidates[v]))

    def extend(i, vmap, used):
        if i == len(order):
            yield dict(vmap)
            return
        v = order[i]
        for w in candidates[v]:
            if w in used:
                continue
            ok = all(a.count(v, u) == b.count(w, vmap[u]) and a.count(u, v) == b.count(vmap[u], w)
                     for u in order[:i])
            if ok:
                vmap[v] = w
                used.add(w)
                yield from extend(i + 1, vmap, used)
                del vmap[v]
                used.discard(w)

    for vmap in extend(0, {}, set()):
        classes = [(a.arrows_between(x, y), b.arrows_between(vmap[x], vmap[y]))
                   for x in a.vertices for y in a.vertices if a.count(x, y)]
        if all_arrow_maps:
            choices = [itertools.permutations(dst) for _, dst in classes]
        else:
            choices = [[dst] for _, dst in classes]
        for combo in itertools.product(*choices):
            amap = {}
            for (src, _), dst in zip(classes, combo):
                amap.update(zip(src, dst))
            yield QuiverIso(vmap, amap)


def quiver_isomorphic(a: Quiver, b: Quiver,
                      max_vertices: int = DEFAULT_ISO_VERTEX_CAP) -> QuiverIso | None:
    return next(iter_isomorphisms(a, b, max_vertices, all_arrow_maps=False), None)


def relabel_quiver(q: Quiver, iso: QuiverIso) -> Quiver:
    return Quiver(
        tuple(iso.vertex_map[v] for v in q.vertices),
        tuple(Arrow(iso.arrow_map[a.name], iso.vertex_map[a.source], iso.vertex_map[a.target])
              for a in q.arrows),
    )


def relabel_path(p: Path, iso: QuiverIso) -> Path:
    return Path(iso.vertex_map[p.start], iso.vertex_map[p.end],
                tuple(iso.arrow_map[x] for x in p.arrows))
