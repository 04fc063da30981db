"""Exact linear combinations of paths, bound path algebras and the ideal oracle.

Scalars are :class:`fractions.Fraction`.  Ideal membership and dimensions are
decided by Gaussian elimination on the finite-dimensional truncation
kQ / J^n, split by (start, end) vertex pair since every two-sided ideal
generated by relations respects that splitting.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple

from .errors import CapExceeded, InconclusiveAdmissibility, QuiverMismatch
from .quiver import (
    Path,
    Quiver,
    compose,
    enumerate_paths,
    is_acyclic,
    iter_paths,
    longest_path_length,
)

DEFAULT_NMAX = 32
DEFAULT_PATH_CAP = 200_000


class LinComb:
    """Finite Path -> Fraction map with zero coefficients removed."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Path, object] | Iterable[tuple[Path, object]] = ()):
        acc: dict[Path, Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for p, c in items:
            acc[p] = acc.get(p, 0) + Fraction(c)
        self._terms = {p: c for p, c in acc.items() if c}
        self._hash = None

    @classmethod
    def of(cls, path: Path, coef=1) -> LinComb:
        return cls({path: coef})

    @property
    def terms(self) -> dict[Path, Fraction]:
        return dict(self._terms)

    def items(self) -> list[tuple[Path, Fraction]]:
        return sorted(self._terms.items(), key=lambda kv: kv[0].sort_key())

    @property
    def paths(self) -> list[Path]:
        return sorted(self._terms, key=Path.sort_key)

    def coefficient(self, p: Path) -> Fraction:
        return self._terms.get(p, Fraction(0))

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        return isinstance(other, LinComb) and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __add__(self, other: LinComb) -> LinComb:
        return LinComb(list(self._terms.items()) + list(other._terms.items()))

    def __neg__(self) -> LinComb:
        return LinComb({p: -c for p, c in self._terms.items()})

    def __sub__(self, other: LinComb) -> LinComb:
        return self + (-other)

    def __mul__(self, scalar) -> LinComb:
        s = Fraction(scalar)
        return LinComb({p: c * s for p, c in self._terms.items()})

    __rmul__ = __mul__

    def left(self, p: Path) -> LinComb:
        """p * self."""
        out = {}
        for t, c in self._terms.items():
            r = compose(p, t)
            if r is not None:
                out[r] = c
        return LinComb(out)

    def right(self, q: Path) -> LinComb:
        """self * q."""
        out = {}
        for t, c in self._terms.items():
            r = compose(t, q)
            if r is not None:
                out[r] = c
        return LinComb(out)

    def map_paths(self, fn) -> LinComb:
        return LinComb([(fn(p), c) for p, c in self._terms.items()])

    def normalized(self) -> LinComb:
        """Scale so the first term (by length, then arrow ids) has coefficient 1."""
        if not self._terms:
            return self
        first = self.items()[0][1]
        if first == 1:
            return self
        return self * (1 / first)

    @property
    def min_length(self) -> int:
        return min(p.length for p in self._terms)

    @property
    def max_length(self) -> int:
        return max(p.length for p in self._terms)

    @property
    def starts(self) -> set[str]:
        return {p.start for p in self._terms}

    @property
    def ends(self) -> set[str]:
        return {p.end for p in self._terms}

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for i, (p, c) in enumerate(self.items()):
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            body = str(p) if mag == 1 else f"{mag}*{p}"
            if i == 0:
                parts.append(body if sign == "+" else f"-{body}")
            else:
                parts.append(f"{sign} {body}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"LinComb({str(self)!r})"


def is_relation(c: LinComb) -> bool:
    """Every term has length >= 2 and all terms share start and end."""
    return bool(c) and c.min_length >= 2 and len(c.starts) == 1 and len(c.ends) == 1


def canonical_relations(rels: Iterable[LinComb]) -> tuple[LinComb, ...]:
    out = []
    seen = set()
    for r in rels:
        n = r.normalized()
        if n and n not in seen:
            seen.add(n)
            out.append(n)
    return tuple(out)


@dataclass(frozen=True)
class BoundPathAlgebra:
    """kQ/(R) for a finite relation list R, kept in canonical normalized form."""

    quiver: Quiver
    relations: tuple[LinComb, ...] = ()
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        rels = canonical_relations(self.relations)
        for r in rels:
            for p in r.paths:
                _check_path(self.quiver, p)
        object.__setattr__(self, "relations", rels)

    def with_relations(self, rels: Iterable[LinComb]) -> BoundPathAlgebra:
        return BoundPathAlgebra(self.quiver, tuple(rels), self.name)


def _check_path(q: Quiver, p: Path) -> None:
    if p.is_trivial:
        if p.start not in q.vertices:
            raise ValueError(f"unknown vertex {p.start}")
        return
    for n in p.arrows:
        if not q.has_arrow(n):
            raise ValueError(f"unknown arrow {n}")
    if q.path(*p.arrows) != p:
        raise ValueError(f"path {p} has inconsistent endpoints")


def field_algebra(vertex: str = "1") -> BoundPathAlgebra:
    """The base field k as a one-vertex quiver."""
    return BoundPathAlgebra(Quiver((vertex,)), (), name="k")


# ---------- exact elimination ----------

class _RowSpace:
    """Reduced row echelon span of sparse vectors indexed by paths.

    Pivot columns appear only in their own row, so one pass over a vector's
    pivot entries fully reduces it.
    """

    def __init__(self):
        self.rows: dict[Path, dict[Path, Fraction]] = {}

    def reduce(self, vec: Mapping[Path, Fraction]) -> dict[Path, Fraction]:
        out = dict(vec)
        for piv in [p for p in out if p in self.rows]:
            c = out.get(piv)
            if not c:
                continue
            for p, v in self.rows[piv].items():
                nv = out.get(p, 0) - c * v
                if nv:
                    out[p] = nv
                else:
                    out.pop(p, None)
        return out

    def add(self, vec: Mapping[Path, Fraction]) -> bool:
        r = self.reduce(vec)
        if not r:
            return False
        piv = max(r, key=Path.sort_key)
        inv = 1 / r[piv]
        r = {p: c * inv for p, c in r.items()}
        for row in self.rows.values():
            c = row.get(piv)
            if c:
                for p, v in r.items():
                    nv = row.get(p, 0) - c * v
                    if nv:
                        row[p] = nv
                    else:
                        row.pop(p, None)
        self.rows[piv] = r
        return True

    def __len__(self):
        return len(self.rows)


class IdealSpan(NamedTuple):
    bound: int
    truncated: bool
    blocks: dict[tuple[str, str], _RowSpace]
    paths: list[Path]

    def rank(self) -> int:
        return sum(len(b) for b in self.blocks.values())

    def contains(self, x: LinComb) -> bool:
        comps = defaultdict(dict)
        for p, c in x.terms.items():
            if self.truncated and p.length >= self.bound:
                continue
            comps[p.start, p.end][p] = c
        for key, vec in comps.items():
            space = self.blocks.get(key)
            if space is None or space.reduce(vec):
                return False
        return True

    def pivots(self) -> set[Path]:
        return {p for b in self.blocks.values() for p in b.rows}


@lru_cache(maxsize=512)
def ideal_span(a: BoundPathAlgebra, bound: int, truncated: bool = True,
               cap: int = DEFAULT_PATH_CAP) -> IdealSpan:
    """Span of {p r q} over r in R.

    truncated: keep products whose shortest term has length < bound and drop
    terms of length >= bound (i.e. work in kQ/J^bound).
    untruncated: keep only products all of whose terms have length <= bound,
    unmodified; this is an honest subspace of (R) inside kQ.
    """
    max_len = bound - 1 if truncated else bound
    paths = enumerate_paths(a.quiver, max_len, cap=cap)
    by_end = defaultdict(list)
    by_start = defaultdict(list)
    for p in paths:
        by_end[p.end].append(p)
        by_start[p.start].append(p)
    blocks = defaultdict(_RowSpace)
    for r in a.relations:
        (s,), (t,) = r.starts, r.ends
        used = r.min_length if truncated else r.max_length
        for p in by_end[s]:
            if p.length + used > max_len:
                break
            for q in by_start[t]:
                if p.length + used + q.length > max_len:
                    break
                vec = {}
                for term, c in r.terms.items():
                    w = Path(p.start, q.end, p.arrows + term.arrows + q.arrows)
                    if w.length <= max_len:
                        vec[w] = c
                if vec:
                    blocks[p.start, q.end].add(vec)
    return IdealSpan(bound, truncated, dict(blocks), paths)


# ---------- admissibility and the oracle ----------

class Status(enum.Enum):
    ADMISSIBLE = "admissible"
    NOT_ADMISSIBLE = "not-admissible"
    INCONCLUSIVE = "inconclusive"


class Admissibility(NamedTuple):
    status: Status
    bound: int | None = None
    reason: str = ""

    def __bool__(self):
        return self.status is Status.ADMISSIBLE


def _paths_of_length(q: Quiver, n: int, cap: int) -> list[Path]:
    out = []
    for p in iter_paths(q, n):
        if p.length == n:
            out.append(p)
            if len(out) > cap:
                raise CapExceeded(f"more than {cap} paths of length {n}")
    return out


@lru_cache(maxsize=512)
def nilpotency_bound(a: BoundPathAlgebra, nmax: int = DEFAULT_NMAX,
                     cap: int = DEFAULT_PATH_CAP) -> int | None:
    """Smallest n <= nmax with J^n inside (R), or None.

    Acyclic quivers answer directly.  On cyclic quivers a witness is searched
    for in the untruncated spans V_M (exact subspaces of (R)), growing M; once
    some n0 is certified, the truncation at n0 is exact and is used to test
    smaller n.  Hitting the path cap counts as not found.
    """
    q = a.quiver
    if is_acyclic(q):
        return max(2, longest_path_length(q) + 1)
    if not a.relations:
        return None
    witness = None
    try:
        for m in range(2, nmax + 1):
            span = ideal_span(a, m, truncated=False, cap=cap)
            for n in range(2, m + 1):
                if all(span.contains(LinComb.of(p)) for p in _paths_of_length(q, n, cap)):
                    witness = n
                    break
            if witness is not None:
                break
    except CapExceeded:
        return None
    if witness is None:
        return None
    exact = ideal_span(a, witness, truncated=True, cap=cap)
    for n in range(2, witness):
        if all(exact.contains(LinComb.of(p)) for p in _paths_of_length(q, n, cap)):
            return n
    return witness


def check_admissible(a: BoundPathAlgebra, nmax: int = DEFAULT_NMAX,
                     cap: int = DEFAULT_PATH_CAP) -> Admissibility:
    for r in a.relations:
        if not is_relation(r):
            return Admissibility(Status.NOT_ADMISSIBLE, None, f"{r} is not a relation")
    n = nilpotency_bound(a, nmax, cap)
    if n is None:
        return Admissibility(Status.INCONCLUSIVE, None,
                             f"no n <= {nmax} with J^n contained in the ideal")
    return Admissibility(Status.ADMISSIBLE, n)


def _witness(a: BoundPathAlgebra, nmax: int, cap: int) -> int:
    adm = check_admissible(a, nmax, cap)
    if adm.status is not Status.ADMISSIBLE:
        raise InconclusiveAdmissibility(f"{a.name or 'algebra'}: {adm.status.value}: {adm.reason}")
    return adm.bound


def ideal_membership(x: LinComb, a: BoundPathAlgebra, n: int | None = None,
                     cap: int = DEFAULT_PATH_CAP) -> bool:
    """Decide x in (R) + J^n; exact for x in (R) once J^n lies in (R).

    With ``n=None`` the admissibility witness is used.
    """
    if n is None:
        n = _witness(a, DEFAULT_NMAX, cap)
    return ideal_span(a, n, True, cap).contains(x)


def dimension(a: BoundPathAlgebra, nmax: int = DEFAULT_NMAX, cap: int = DEFAULT_PATH_CAP) -> int:
    n = _witness(a, nmax, cap)
    span = ideal_span(a, n, True, cap)
    return len(span.paths) - span.rank()


def quotient_basis(a: BoundPathAlgebra, nmax: int = DEFAULT_NMAX,
                   cap: int = DEFAULT_PATH_CAP) -> list[Path]:
    """Paths whose classes form a basis of kQ/(R) (the non-pivot paths)."""
    n = _witness(a, nmax, cap)
    span = ideal_span(a, n, True, cap)
    piv = span.pivots()
    return [p for p in span.paths if p not in piv]


def ideals_equal(a: BoundPathAlgebra, b: BoundPathAlgebra, nmax: int = DEFAULT_NMAX,
                 cap: int = DEFAULT_PATH_CAP) -> bool:
    """(R_a) == (R_b) by mutual generator membership, dimension cross-checked."""
    if not a.quiver.same_as(b.quiver):
        raise QuiverMismatch("ideals_equal needs presentations over the same quiver")
    na = _witness(a, nmax, cap)
    nb = _witness(b, nmax, cap)
    span_a = ideal_span(a, na, True, cap)
    span_b = ideal_span(b, nb, True, cap)
    equal = all(span_b.contains(r) for r in a.relations) and all(
        span_a.contains(r) for r in b.relations)
    if equal and dimension(a, nmax, cap) != dimension(b, nmax, cap):
        raise AssertionError("mutually contained ideals with different quotient dimensions")
    return equal
