"""Generalized bound path algebras and their expansion to bound quiver presentations.

A gbp-algebra is stored as (gamma, per-vertex bound path algebras, relations
over gamma) and is represented, for every computation, by its expanded
presentation over the quiver gamma[Sigma_1, ..., Sigma_n].
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

from .algebra import (
    DEFAULT_NMAX,
    DEFAULT_PATH_CAP,
    BoundPathAlgebra,
    LinComb,
    Status,
    canonical_relations,
    check_admissible,
    field_algebra,
    ideals_equal,
    is_relation,
    nilpotency_bound,
)
from .errors import ValidationError
from .quiver import (
    DEFAULT_ISO_VERTEX_CAP,
    Arrow,
    Path,
    Quiver,
    QuiverIso,
    enumerate_paths,
    is_acyclic,
    iter_isomorphisms,
    long_path_between,
    longest_path_length,
    relabel_path,
)


@dataclass(frozen=True)
class GbpAlgebra:
    gamma: Quiver
    family: tuple[tuple[str, BoundPathAlgebra], ...]
    relations: tuple[LinComb, ...] = ()
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        fam = self.family
        if isinstance(fam, Mapping):
            fam = fam.items()
        fam = dict(fam)
        order = {v: i for i, v in enumerate(self.gamma.vertices)}
        object.__setattr__(
            self, "family",
            tuple(sorted(fam.items(), key=lambda kv: (order.get(kv[0], len(order)), kv[0]))))
        object.__setattr__(self, "relations", canonical_relations(self.relations))

    def algebra_at(self, v: str) -> BoundPathAlgebra:
        return dict(self.family)[v]

    @property
    def family_map(self) -> dict[str, BoundPathAlgebra]:
        return dict(self.family)


def validate_gbp(g: GbpAlgebra, nmax: int = DEFAULT_NMAX) -> list[str]:
    """Every violated invariant, as readable diagnostics; empty means valid."""
    diags = []
    if not is_acyclic(g.gamma):
        diags.append("gamma not acyclic")
    fam = g.family_map
    for v in g.gamma.vertices:
        if v not in fam:
            diags.append(f"no algebra assigned to gamma vertex {v}")
    for v in fam:
        if v not in g.gamma.vertices:
            diags.append(f"algebra assigned to unknown gamma vertex {v}")
    for r in g.relations:
        if not is_relation(r):
            diags.append(f"{r} is not a relation")
        for p in r.paths:
            try:
                if p.is_trivial or g.gamma.path(*p.arrows) != p:
                    diags.append(f"{p} is not a path of gamma")
            except (KeyError, ValueError):
                diags.append(f"{p} is not a path of gamma")
    for v, a in g.family:
        adm = check_admissible(a, nmax)
        if adm.status is not Status.ADMISSIBLE:
            diags.append(f"algebra at {v} is {adm.status.value}: {adm.reason}")
    return diags


def _require_valid(g: GbpAlgebra, nmax: int) -> None:
    diags = validate_gbp(g, nmax)
    if diags:
        raise ValidationError(diags)


class CopyOrigin(NamedTuple):
    """Expanded arrow copying gamma arrow ``gamma_arrow`` between local vertices."""

    gamma_arrow: str
    source: str
    target: str


class InternalOrigin(NamedTuple):
    gamma_vertex: str
    arrow: str


@dataclass
class ExpandedPresentation:
    algebra: BoundPathAlgebra
    vertex_origin: dict[str, tuple[str, str]]
    arrow_origin: dict[str, CopyOrigin | InternalOrigin]

    @property
    def quiver(self) -> Quiver:
        return self.algebra.quiver


def internal_path_choices(a: BoundPathAlgebra, nmax: int = DEFAULT_NMAX) -> list[Path]:
    """Finite stand-in for "every path of the quiver of ``a``".

    All paths of length < n (n the nilpotency witness), which is every path
    when the quiver is acyclic.  On a cyclic quiver one path of length >= n is
    added per endpoint pair that admits one; all such paths lie in the ideal,
    so any of them generates the same elements modulo (R).
    """
    n = nilpotency_bound(a, nmax)
    if n is None:
        raise ValidationError(f"algebra {a.name or ''} has no nilpotency witness <= {nmax}")
    q = a.quiver
    out = enumerate_paths(q, n - 1)
    if not is_acyclic(q):
        for u in q.vertices:
            for w in q.vertices:
                p = long_path_between(q, u, w, n)
                if p is not None:
                    out.append(p)
    return out


class _Expansion:
    """Naming scheme and path lifting for gamma[Sigma_1, ..., Sigma_n]."""

    def __init__(self, g: GbpAlgebra):
        self.g = g
        self.fam = g.family_map
        self.vertex_origin: dict[str, tuple[str, str]] = {}
        self.arrow_origin: dict[str, CopyOrigin | InternalOrigin] = {}
        self._vname: dict[tuple[str, str], str] = {}
        self._copy: dict[tuple[str, str, str], str] = {}
        vertices, arrows = [], []
        for gv in g.gamma.vertices:
            sigma = self.fam[gv].quiver
            single = len(sigma.vertices) == 1
            for lv in sigma.vertices:
                name = gv if single else f"{gv}.{lv}"
                self._vname[gv, lv] = name
                self.vertex_origin[name] = (gv, lv)
                vertices.append(name)
            for a in sigma.arrows:
                name = f"{gv}.{a.name}"
                self.arrow_origin[name] = InternalOrigin(gv, a.name)
                arrows.append(Arrow(name, self._vname[gv, a.source], self._vname[gv, a.target]))
        for l in g.gamma.arrows:
            src = self.fam[l.source].quiver.vertices
            dst = self.fam[l.target].quiver.vertices
            for p in src:
                for q in dst:
                    name = l.name if len(src) == len(dst) == 1 else f"{l.name}__{p}__{q}"
                    self._copy[l.name, p, q] = name
                    self.arrow_origin[name] = CopyOrigin(l.name, p, q)
                    arrows.append(Arrow(name, self._vname[l.source, p], self._vname[l.target, q]))
        self.quiver = Quiver(tuple(vertices), tuple(arrows))

    def vertex(self, gv: str, lv: str) -> str:
        return self._vname[gv, lv]

    def copy_arrow(self, gamma_arrow: str, p: str, q: str) -> str:
        return self._copy[gamma_arrow, p, q]

    def lift(self, gv: str, path: Path) -> Path:
        return Path(self._vname[gv, path.start], self._vname[gv, path.end],
                    tuple(f"{gv}.{a}" for a in path.arrows))

    def internal_relations(self) -> list[LinComb]:
        out = []
        for gv, a in self.g.family:
            out.extend(r.map_paths(lambda p, gv=gv: self.lift(gv, p)) for r in a.relations)
        return out

    def induced_relations(self, nmax: int) -> list[LinComb]:
        gamma = self.g.gamma
        choices = {gv: internal_path_choices(a, nmax) for gv, a in self.g.family}
        out = []
        for rel in self.g.relations:
            (s,), (t,) = rel.starts, rel.ends
            for p in self.fam[s].quiver.vertices:
                for q in self.fam[t].quiver.vertices:
                    per_term = []
                    for path, coef in rel.items():
                        targets = [gamma.arrow(b).target for b in path.arrows[:-1]]
                        routes = itertools.product(*(choices[v] for v in targets))
                        per_term.append([(coef, self._route(path, targets, route, p, q))
                                         for route in routes])
                    for combo in itertools.product(*per_term):
                        out.append(LinComb([(path, coef) for coef, path in combo]))
        return list(canonical_relations(out))

    def _route(self, path: Path, targets: list[str], route: tuple[Path, ...],
               p: str, q: str) -> Path:
        arrows = []
        cur = p
        for beta, gv, gam in zip(path.arrows, targets, route):
            arrows.append(self.copy_arrow(beta, cur, gam.start))
            arrows.extend(self.lift(gv, gam).arrows)
            cur = gam.end
        arrows.append(self.copy_arrow(path.arrows[-1], cur, q))
        return self.quiver.path(*arrows)


def expanded_quiver(g: GbpAlgebra, nmax: int = DEFAULT_NMAX) -> ExpandedPresentation:
    """The expanded quiver only (no relations), with origin maps."""
    _require_valid(g, nmax)
    ex = _Expansion(g)
    return ExpandedPresentation(BoundPathAlgebra(ex.quiver, (), g.name),
                                ex.vertex_origin, ex.arrow_origin)


def induced_relations(g: GbpAlgebra, nmax: int = DEFAULT_NMAX) -> list[LinComb]:
    """The relations induced by the gamma relations over the expanded quiver."""
    _require_valid(g, nmax)
    return _Expansion(g).induced_relations(nmax)


def expand(g: GbpAlgebra, nmax: int = DEFAULT_NMAX,
           cap: int = DEFAULT_PATH_CAP) -> ExpandedPresentation:
    """Bound quiver presentation: internal relations plus induced relations.

    The result's admissibility is checked; failing that check is a bug.
    """
    _require_valid(g, nmax)
    ex = _Expansion(g)
    rels = ex.internal_relations() + ex.induced_relations(nmax)
    algebra = BoundPathAlgebra(ex.quiver, tuple(rels), g.name)
    local = max(nilpotency_bound(a, nmax) for _, a in g.family)
    bound = max(nmax, (longest_path_length(g.gamma) + 1) * local)
    adm = check_admissible(algebra, bound, cap)
    if adm.status is not Status.ADMISSIBLE:
        raise RuntimeError(f"expanded presentation not admissible ({adm.status.value}): {adm.reason}")
    return ExpandedPresentation(algebra, ex.vertex_origin, ex.arrow_origin)


def trivial_gbp_single(a: BoundPathAlgebra, vertex: str = "1") -> GbpAlgebra:
    """One vertex, no arrows, carrying the whole algebra."""
    return GbpAlgebra(Quiver((vertex,)), ((vertex, a),), (), name=a.name)


def trivial_gbp_gabriel(a: BoundPathAlgebra) -> GbpAlgebra:
    """The algebra's own quiver with k at every vertex and its relations on top."""
    if not is_acyclic(a.quiver):
        raise ValidationError("gamma must be acyclic: the quiver has an oriented cycle")
    return GbpAlgebra(a.quiver, tuple((v, field_algebra()) for v in a.quiver.vertices),
                      a.relations, name=a.name)


def relabel_lincomb(c: LinComb, iso: QuiverIso) -> LinComb:
    return c.map_paths(lambda p: relabel_path(p, iso))


def presentations_match(a: BoundPathAlgebra, b: BoundPathAlgebra,
                        max_vertices: int = DEFAULT_ISO_VERTEX_CAP,
                        nmax: int = DEFAULT_NMAX) -> QuiverIso | None:
    """A quiver isomorphism carrying (R_a) onto (R_b), if one exists."""
    for iso in iter_isomorphisms(a.quiver, b.quiver, max_vertices):
        moved = BoundPathAlgebra(b.quiver, tuple(relabel_lincomb(r, iso) for r in a.relations))
        if ideals_equal(moved, b, nmax):
            return iso
    return None


def gbp_equivalent(g: GbpAlgebra, h: GbpAlgebra, max_vertices: int = DEFAULT_ISO_VERTEX_CAP,
                   nmax: int = DEFAULT_NMAX) -> bool:
    """Equivalence witnessed by relabelling.

    Looks for a gamma isomorphism phi such that each vertex algebra matches
    the one at phi(v) up to quiver relabelling and ideal equality, and phi
    carries (I_g) onto (I_h).  Algebra isomorphisms that are not relabellings
    are not searched for, so False means "no relabelling witness".
    """
    fam_g, fam_h = g.family_map, h.family_map
    memo: dict[tuple[str, str], bool] = {}

    def vertex_ok(v, w):
        if (v, w) not in memo:
            memo[v, w] = presentations_match(fam_g[v], fam_h[w], max_vertices, nmax) is not None
        return memo[v, w]

    target = BoundPathAlgebra(h.gamma, h.relations)
    for iso in iter_isomorphisms(g.gamma, h.gamma, max_vertices):
        if not all(vertex_ok(v, iso.vertex_map[v]) for v in g.gamma.vertices):
            continue
        moved = BoundPathAlgebra(h.gamma, tuple(relabel_lincomb(r, iso) for r in g.relations))
        if ideals_equal(moved, target, nmax):
            return True
    return False
