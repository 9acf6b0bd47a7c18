"""Defining residuals and prolonged algebraic systems for Killing-type fields.

A rank-j field F is a Killing tensor of order s when the symmetrized s-fold
derivative tensor vanishes; the conformal variant additionally requires F to
be traceless and only asks for the traceless part of that residual to vanish.
Differentiating the defining system k more times yields, at each point, a
linear algebraic system on the order-(k+s) derivative components; its shape
is what the counting helpers below report.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .exactalg import Poly
from .tensors import (
    Signature,
    SymMultiIndex,
    SymTensorField,
    enumerate_indices,
    trace,
    traceless_project,
)


def _split_multiplicity(K: SymMultiIndex, D: SymMultiIndex) -> int:
    """Number of ways to pick positions of K realizing the sub-multiset D."""
    mult = 1
    for a in set(D):
        mult *= comb(K.count(a), D.count(a))
    return mult


def _derive(poly: Poly, D: SymMultiIndex) -> Poly:
    for axis in D:
        if poly.is_zero():
            break
        poly = poly.diff(axis)
    return poly


def killing_residual(F: SymTensorField, s: int) -> SymTensorField:
    """Symmetrized s-fold derivative of F, a rank j+s field.

    The component at K sums, over the distinct size-s derivative sub-multisets
    D of K, the position-count weight times the D-derivative of F at K - D.
    The result is zero exactly when F is a rank-j, order-s Killing tensor.
    """
    if s < 1:
        raise ValueError(f"order must be >= 1, got {s}")
    sig = F.signature
    out: dict[SymMultiIndex, Poly] = {}
    for idx, poly in F.components.items():
        for D in enumerate_indices(s, sig.m):
            derived = _derive(poly, D)
            if derived.is_zero():
                continue
            K = tuple(sorted(idx + D))
            term = derived.scale(_split_multiplicity(K, D))
            acc = out.get(K)
            out[K] = term if acc is None else acc + term
    return SymTensorField(F.rank + s, sig, out)


def conformal_residual(F: SymTensorField, s: int) -> SymTensorField:
    """Traceless part of the order-s residual; requires F itself traceless."""
    if F.rank >= 2 and not trace(F).is_zero():
        raise ValueError("candidate field is not traceless")
    return traceless_project(killing_residual(F, s))


def count_eq_unknowns(j: int, k: int, s: int, m: int) -> tuple[int, int]:
    """(N_e, N_u) of the k-fold prolonged order-s system in dimension m."""
    if min(j, k, m - 1) < 0 or s < 1:
        raise ValueError(f"invalid (j={j}, k={k}, s={s}, m={m})")
    n_e = comb(j + s + m - 1, m - 1) * comb(k + m - 1, m - 1)
    n_u = comb(j + m - 1, m - 1) * comb(k + s + m - 1, m - 1)
    return n_e, n_u


@dataclass
class ProlongedSystem:
    """Sparse exact matrix of the k-fold differentiated defining system.

    Rows are labeled (K, B): equation index K of rank j+s and extra
    derivative multi-index B of rank k.  Columns are labeled (I, C): base
    index I of rank j and derivative multi-index C of rank k+s, ordered
    graded-lex on (derivative, base).  Entries are integer position counts.
    """

    j: int
    k: int
    s: int
    signature: Signature
    row_labels: list[tuple[SymMultiIndex, SymMultiIndex]]
    col_labels: list[tuple[SymMultiIndex, SymMultiIndex]]
    entries: dict[tuple[int, int], int]

    @property
    def n_rows(self) -> int:
        return len(self.row_labels)

    @property
    def n_cols(self) -> int:
        return len(self.col_labels)

    def dense(self) -> list[list[Fraction]]:
        mat = [[Fraction(0)] * self.n_cols for _ in range(self.n_rows)]
        for (r, c), v in self.entries.items():
            mat[r][c] = Fraction(v)
        return mat

    def to_json(self) -> dict:
        triplets = [
            [r, c, str(v), "1"]
            for (r, c), v in sorted(self.entries.items())
        ]
        return {"rows": self.n_rows, "cols": self.n_cols, "entries": triplets}

    @classmethod
    def from_json(cls, data: dict, j: int, k: int, s: int, sig: Signature) -> "ProlongedSystem":
        system = prolong(j, k, s, sig)
        if data["rows"] != system.n_rows or data["cols"] != system.n_cols:
            raise ValueError("matrix shape does not match (j, k, s, signature)")
        system.entries = {
            (r, c): int(Fraction(int(num), int(den)))
            for r, c, num, den in data["entries"]
        }
        return system


def prolong(j: int, k: int, s: int, signature: Signature) -> ProlongedSystem:
    """Assemble the prolonged linear system for (j, k, s) over the signature.

    Row (K, B) states that the symmetrized derivative split of K, further
    differentiated by B, vanishes; the unknown hit by the split D = K - I is
    the derivative component (I, sort(D + B)) with the position-count weight.
    """
    if j < 0 or k < 0:
        raise ValueError(f"invalid (j={j}, k={k})")
    if s < 1:
        raise ValueError(f"order must be >= 1, got {s}")
    m = signature.m
    eq_indices = enumerate_indices(j + s, m)
    extra_indices = enumerate_indices(k, m)
    row_labels = [
        (K, B)
        for B in extra_indices
        for K in eq_indices
    ]
    col_labels = [
        (I, C)
        for C in enumerate_indices(k + s, m)
        for I in enumerate_indices(j, m)
    ]
    row_pos = {label: r for r, label in enumerate(row_labels)}
    col_pos = {label: c for c, label in enumerate(col_labels)}
    entries: dict[tuple[int, int], int] = {}
    for K in eq_indices:
        for D in enumerate_indices(s, m):
            if any(D.count(a) > K.count(a) for a in set(D)):
                continue
            I = list(K)
            for a in D:
                I.remove(a)
            I = tuple(I)
            weight = _split_multiplicity(K, D)
            for B in extra_indices:
                C = tuple(sorted(D + B))
                key = (row_pos[(K, B)], col_pos[(I, C)])
                entries[key] = entries.get(key, 0) + weight
    system = ProlongedSystem(j, k, s, signature, row_labels, col_labels, entries)
    n_e, n_u = count_eq_unknowns(j, k, s, m)
    assert (system.n_rows, system.n_cols) == (n_e, n_u)
    return system


@dataclass(frozen=True)
class DefiningSystem:
    """Which residual a candidate field must annihilate."""

    kind: str  # "ordinary" | "conformal"
    j: int
    s: int
    signature: Signature

    def __post_init__(self):
        if self.kind not in ("ordinary", "conformal"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.s < 1 or self.j < 0:
            raise ValueError(f"invalid (j={self.j}, s={self.s})")

    def residual(self, F: SymTensorField) -> SymTensorField:
        if F.rank != self.j or F.signature != self.signature:
            raise ValueError("field does not match the defining system")
        if self.kind == "ordinary":
            return killing_residual(F, self.s)
        return conformal_residual(F, self.s)
