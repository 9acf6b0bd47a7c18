"""Symmetric tensor fields with polynomial components over R^{p,q}.

Indices are 1-based axis labels stored as sorted tuples, so a rank-j field
keeps exactly C(j+m-1, m-1) components.  The metric is diagonal with p
entries +1 followed by q entries -1; component polynomials are written in
the plain coordinates x^a, and every lowered index x_a is expanded as
g_aa * x^a.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping

from .exactalg import Poly, grlex_key

SymMultiIndex = tuple  # non-decreasing tuple of axis labels in 1..m


@dataclass(frozen=True)
class Signature:
    """Metric signature (p pluses, q minuses); dimension m = p + q."""

    p: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0 or self.p + self.q < 1:
            raise ValueError(f"invalid signature ({self.p}, {self.q})")

    @property
    def m(self) -> int:
        return self.p + self.q

    def g(self, axis: int) -> int:
        """Diagonal metric entry for a 1-based axis (g^aa = g_aa = +-1)."""
        if not 1 <= axis <= self.m:
            raise ValueError(f"axis {axis} out of range 1..{self.m}")
        return 1 if axis <= self.p else -1

    def metric_diag(self) -> tuple[int, ...]:
        return tuple(self.g(a) for a in range(1, self.m + 1))


def enumerate_indices(j: int, m: int) -> list[SymMultiIndex]:
    """All sorted rank-j multi-indices over axes 1..m, lexicographically."""
    if j < 0 or m < 1:
        raise ValueError(f"invalid rank {j} or dimension {m}")
    return list(itertools.combinations_with_replacement(range(1, m + 1), j))


def index_content(idx: SymMultiIndex, m: int) -> tuple[int, ...]:
    """Multiplicity vector of an index: how often each axis appears."""
    content = [0] * m
    for a in idx:
        content[a - 1] += 1
    return tuple(content)


def x_squared(sig: Signature) -> Poly:
    """The invariant x^2 = g_ab x^a x^b = sum_a g_aa (x^a)^2."""
    m = sig.m
    terms = {}
    for a in range(1, m + 1):
        exps = tuple(2 if i == a - 1 else 0 for i in range(m))
        terms[exps] = Fraction(sig.g(a))
    return Poly(m, terms)


class SymTensorField:
    """Rank-j symmetric tensor field, components keyed by sorted multi-index."""

    __slots__ = ("rank", "signature", "components")

    def __init__(
        self,
        rank: int,
        signature: Signature,
        components: Mapping[SymMultiIndex, Poly] | None = None,
    ):
        if rank < 0:
            raise ValueError(f"rank must be >= 0, got {rank}")
        self.rank = rank
        self.signature = signature
        m = signature.m
        clean: dict[SymMultiIndex, Poly] = {}
        if components:
            for idx, poly in components.items():
                idx = tuple(idx)
                if len(idx) != rank:
                    raise ValueError(f"index {idx} does not have rank {rank}")
                if tuple(sorted(idx)) != idx:
                    raise ValueError(f"index {idx} is not sorted")
                if any(not 1 <= a <= m for a in idx):
                    raise ValueError(f"index {idx} out of axis range 1..{m}")
                if not isinstance(poly, Poly):
                    poly = Poly.constant(m, poly)
                if poly.dim != m:
                    raise ValueError("component dimension does not match signature")
                if poly:
                    clean[idx] = poly
        self.components = clean

    @property
    def dim(self) -> int:
        return self.signature.m

    def component(self, idx: Iterable[int]) -> Poly:
        key = tuple(sorted(idx))
        got = self.components.get(key)
        return got if got is not None else Poly.zero(self.dim)

    def is_zero(self) -> bool:
        return not self.components

    def __add__(self, other: "SymTensorField") -> "SymTensorField":
        if not isinstance(other, SymTensorField):
            return NotImplemented
        if self.rank != other.rank or self.signature != other.signature:
            raise ValueError("rank/signature mismatch")
        comps = dict(self.components)
        for idx, poly in other.components.items():
            acc = comps.get(idx)
            comps[idx] = poly if acc is None else acc + poly
        return SymTensorField(self.rank, self.signature, comps)

    def __sub__(self, other: "SymTensorField") -> "SymTensorField":
        return self + other.scale(-1)

    def scale(self, c) -> "SymTensorField":
        return SymTensorField(
            self.rank,
            self.signature,
            {idx: poly.scale(c) for idx, poly in self.components.items()},
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymTensorField):
            return NotImplemented
        return (
            self.rank == other.rank
            and self.signature == other.signature
            and self.components == other.components
        )

    def __repr__(self) -> str:
        body = ", ".join(
            f"{idx}: {poly!r}" for idx, poly in sorted(self.components.items())
        )
        return f"SymTensorField(rank={self.rank}, {{{body}}})"

    def max_degree(self) -> int:
        """Largest total degree over all components; -1 if zero."""
        if not self.components:
            return -1
        return max(poly.degree() for poly in self.components.values())

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "signature": [self.signature.p, self.signature.q],
            "components": [
                {"index": list(idx), "poly": self.components[idx].to_json()}
                for idx in sorted(self.components)
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SymTensorField":
        sig = Signature(*data["signature"])
        comps = {
            tuple(entry["index"]): Poly.from_json(entry["poly"], sig.m)
            for entry in data["components"]
        }
        return cls(data["rank"], sig, comps)


def symmetrize(
    components: Mapping[tuple, Poly], j: int, signature: Signature
) -> SymTensorField:
    """Collapse arbitrarily-ordered index storage into a symmetric field.

    The component at a sorted index I is the sum of the input values over all
    distinct orderings of I; absent orderings contribute zero.  On data that
    is already stored by sorted index the map is the identity.
    """
    m = signature.m
    out: dict[SymMultiIndex, Poly] = {}
    for key in components:
        if len(tuple(key)) != j:
            raise ValueError(f"index {key} does not have rank {j}")
    for idx in enumerate_indices(j, m):
        total = Poly.zero(m)
        for perm in set(itertools.permutations(idx)):
            got = components.get(perm)
            if got is not None:
                if not isinstance(got, Poly):
                    got = Poly.constant(m, got)
                total = total + got
        if total:
            out[idx] = total
    return SymTensorField(j, signature, out)


def trace(F: SymTensorField, pair: tuple[int, int] = (0, 1)) -> SymTensorField:
    """Metric contraction over one pair of index positions (rank drops by 2).

    For symmetric storage the result does not depend on which positions are
    chosen; the pair argument is validated only.
    """
    j = F.rank
    if j < 2:
        raise ValueError(f"trace needs rank >= 2, got {j}")
    p1, p2 = pair
    if not (0 <= p1 < p2 < j):
        raise ValueError(f"invalid position pair {pair} for rank {j}")
    sig = F.signature
    out: dict[SymMultiIndex, Poly] = {}
    for idx in enumerate_indices(j - 2, sig.m):
        total = Poly.zero(sig.m)
        for a in range(1, sig.m + 1):
            contracted = F.components.get(tuple(sorted(idx + (a, a))))
            if contracted is not None:
                total = total + contracted.scale(sig.g(a))
        if total:
            out[idx] = total
    return SymTensorField(j - 2, sig, out)


def metric_outer(T: SymTensorField) -> SymTensorField:
    """Symmetrized outer product g (x) T, rank j+2.

    Component at K sums g^aa * T[K minus {a,a}] over the distinct unordered
    position pairs of K carrying equal axes, weighted by the pair count.
    """
    sig = T.signature
    j = T.rank
    out: dict[SymMultiIndex, Poly] = {}
    for idx, poly in T.components.items():
        for a in range(1, sig.m + 1):
            key = tuple(sorted(idx + (a, a)))
            weight = comb(key.count(a), 2) * sig.g(a)
            term = poly.scale(weight)
            acc = out.get(key)
            out[key] = term if acc is None else acc + term
    return SymTensorField(j + 2, sig, out)


# Projection data per (rank, signature): the matrix of metric_outer on
# coefficient tensors and the inverse of (trace o metric_outer).
_PROJECTION_CACHE: dict[tuple[int, Signature], tuple] = {}


def _invert(matrix: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(matrix)
    aug = [list(row) + [Fraction(int(i == k)) for i in range(n)] for k, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col]), None)
        if pivot is None:
            raise ValueError("trace-removal system is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _projection_data(rank: int, sig: Signature):
    key = (rank, sig)
    cached = _PROJECTION_CACHE.get(key)
    if cached is not None:
        return cached
    m = sig.m
    idx_j = enumerate_indices(rank, m)
    idx_t = enumerate_indices(rank - 2, m)
    pos_j = {idx: n for n, idx in enumerate(idx_j)}
    # outer[k][t] = coefficient of unit t-tensor in metric_outer, at index k
    outer = [[Fraction(0)] * len(idx_t) for _ in idx_j]
    for tn, tidx in enumerate(idx_t):
        for a in range(1, m + 1):
            kidx = tuple(sorted(tidx + (a, a)))
            outer[pos_j[kidx]][tn] += comb(kidx.count(a), 2) * sig.g(a)
    # tr[t][k] = trace matrix on rank-j coefficient tensors
    tr = [[Fraction(0)] * len(idx_j) for _ in idx_t]
    for tn, tidx in enumerate(idx_t):
        for a in range(1, m + 1):
            kidx = tuple(sorted(tidx + (a, a)))
            tr[tn][pos_j[kidx]] += sig.g(a)
    composed = [
        [
            sum((tr[r][k] * outer[k][c] for k in range(len(idx_j))), Fraction(0))
            for c in range(len(idx_t))
        ]
        for r in range(len(idx_t))
    ]
    data = (idx_j, idx_t, outer, tr, _invert(composed))
    _PROJECTION_CACHE[key] = data
    return data


def traceless_project(F: SymTensorField) -> SymTensorField:
    """Traceless part of F: subtract a sym(g (x) T) making every trace vanish.

    The correction T is the unique solution of trace(F - metric_outer(T)) = 0,
    solved exactly per monomial on coefficient tensors.  Rank 0 and 1 fields
    are returned unchanged.
    """
    if F.rank < 2:
        return F
    sig = F.signature
    idx_j, idx_t, outer, tr, inv = _projection_data(F.rank, sig)
    monomials = set()
    for poly in F.components.values():
        monomials.update(poly.terms)
    out: dict[SymMultiIndex, dict] = {idx: {} for idx in idx_j}
    for mono in monomials:
        f_vec = [F.components[idx].terms[mono]
                 if idx in F.components and mono in F.components[idx].terms
                 else Fraction(0)
                 for idx in idx_j]
        rhs = [
            sum((row[k] * f_vec[k] for k in range(len(idx_j)) if f_vec[k]), Fraction(0))
            for row in tr
        ]
        t_vec = [
            sum((inv[r][c] * rhs[c] for c in range(len(idx_t)) if rhs[c]), Fraction(0))
            for r in range(len(idx_t))
        ]
        for k, idx in enumerate(idx_j):
            corrected = f_vec[k] - sum(
                (outer[k][c] * t_vec[c] for c in range(len(idx_t)) if t_vec[c]),
                Fraction(0),
            )
            if corrected:
                out[idx][mono] = corrected
    comps = {
        idx: Poly(sig.m, terms) for idx, terms in out.items() if terms
    }
    return SymTensorField(F.rank, sig, comps)


def contract_x(F: SymTensorField) -> SymTensorField:
    """Contract one index with the lowered coordinate: sum_b F[..b] * g_bb x^b."""
    if F.rank < 1:
        raise ValueError("contract_x needs rank >= 1")
    sig = F.signature
    m = sig.m
    out: dict[SymMultiIndex, Poly] = {}
    for idx in enumerate_indices(F.rank - 1, m):
        total = Poly.zero(m)
        for b in range(1, m + 1):
            poly = F.components.get(tuple(sorted(idx + (b,))))
            if poly is not None:
                total = total + poly * Poly.variable(b, m).scale(sig.g(b))
        if total:
            out[idx] = total
    return SymTensorField(F.rank - 1, sig, out)


@dataclass
class Basis:
    """Ordered list of fields solving one defining system."""

    kind: str  # "ordinary" | "conformal"
    j: int
    s: int
    signature: Signature
    elements: list[SymTensorField] = field(default_factory=list)
    degree_bound: int = 0

    def __post_init__(self):
        if self.kind not in ("ordinary", "conformal"):
            raise ValueError(f"unknown kind {self.kind!r}")

    def __len__(self) -> int:
        return len(self.elements)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "j": self.j,
            "s": self.s,
            "signature": [self.signature.p, self.signature.q],
            "degree_bound": self.degree_bound,
            "count": len(self.elements),
            "elements": [el.to_json() for el in self.elements],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Basis":
        basis = cls(
            kind=data["kind"],
            j=data["j"],
            s=data["s"],
            signature=Signature(*data["signature"]),
            elements=[SymTensorField.from_json(el) for el in data["elements"]],
            degree_bound=data["degree_bound"],
        )
        if data.get("count", len(basis.elements)) != len(basis.elements):
            raise ValueError("basis count does not match element list")
        return basis
