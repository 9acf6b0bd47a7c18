"""Exact nullspace solver for degree-bounded Killing-type ansatz systems.

A candidate field is expanded as unknown rational coefficients on
(component index, monomial) pairs; the defining residual is linear in those
unknowns, so a complete basis is the nullspace of an integer matrix.  The
matrix splits into small independent blocks: the ordinary residual conserves
the per-axis count of index entries plus exponents, and the traceless variant
still conserves its total and parity.  Elimination is fraction-free (integer
Bareiss with smallest-magnitude pivoting), and every emitted basis is put
into reduced echelon form over a graded-lex unknown order, so output is
deterministic down to the byte.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import comb, lcm

from .equations import ProlongedSystem, _split_multiplicity, prolong, count_eq_unknowns
from .exactalg import Poly, grlex_key
from .tensors import (
    Basis,
    Signature,
    SymMultiIndex,
    SymTensorField,
    enumerate_indices,
    index_content,
    _projection_data,
)

# ---------------------------------------------------------------------------
# sparse exact elimination
# ---------------------------------------------------------------------------


def _echelon_int(rows: list[dict[int, int]]) -> tuple[list[tuple[int, dict[int, int]]], int]:
    """Fraction-free forward elimination on sparse integer rows.

    Returns the pivot rows as (pivot column, row) pairs in elimination order.
    Pivots are chosen per column by smallest absolute value (ties by input
    order), and every surviving row is updated with the two-term Bareiss rule
    so all intermediate entries stay integral.
    """
    active = [dict(r) for r in rows if r]
    pivots: list[tuple[int, dict[int, int]]] = []
    prev = 1
    if not active:
        return pivots, 0
    todo = sorted({c for r in active for c in r})
    for col in todo:
        best = None
        for i, row in enumerate(active):
            v = row.get(col)
            if v and (best is None or abs(v) < abs(active[best][col])):
                best = i
        if best is None:
            continue
        pivot_row = active.pop(best)
        pv = pivot_row[col]
        survivors = []
        for row in active:
            rv = row.get(col, 0)
            new: dict[int, int] = {}
            if rv:
                for c in row.keys() | pivot_row.keys():
                    val = pv * row.get(c, 0) - rv * pivot_row.get(c, 0)
                    if val:
                        q, rem = divmod(val, prev)
                        assert rem == 0
                        new[c] = q
            else:
                for c, v in row.items():
                    q, rem = divmod(pv * v, prev)
                    assert rem == 0
                    new[c] = q
            if new:
                survivors.append(new)
        active = survivors
        prev = pv
        pivots.append((col, pivot_row))
    return pivots, len(pivots)


def _clear_row(row: dict, keymap=None) -> dict[int, int]:
    """Scale a sparse rational row to integers (keys optionally remapped)."""
    denom = lcm(*(Fraction(v).denominator for v in row.values())) if row else 1
    out = {}
    for k, v in row.items():
        v = Fraction(v) * denom
        assert v.denominator == 1
        if v:
            out[keymap[k] if keymap else k] = v.numerator
    return out


def _nullspace_sparse(rows: list[dict[int, int]], n_cols: int) -> list[dict[int, Fraction]]:
    """Canonical nullspace basis (reduced echelon rows over column order)."""
    pivots, _ = _echelon_int(rows)
    pivot_cols = [c for c, _ in pivots]
    pivot_set = set(pivot_cols)
    free_cols = [c for c in range(n_cols) if c not in pivot_set]
    basis: list[dict[int, Fraction]] = []
    for f in free_cols:
        vec: dict[int, Fraction] = {f: Fraction(1)}
        for col, row in reversed(pivots):
            acc = Fraction(0)
            for c, v in row.items():
                if c != col and c in vec:
                    acc += v * vec[c]
            if acc:
                vec[col] = -acc / row[col]
        basis.append(vec)
    return _rref(basis)


def _rref(vectors: list[dict[int, Fraction]]) -> list[dict[int, Fraction]]:
    """Reduced echelon form of a list of sparse vectors (rows), leading 1s."""
    work = [dict(v) for v in vectors if v]
    done: list[tuple[int, dict[int, Fraction]]] = []
    while work:
        lead = min(min(v) for v in work)
        best = next(i for i, v in enumerate(work) if min(v) == lead)
        row = work.pop(best)
        inv = 1 / row[lead]
        row = {c: v * inv for c, v in row.items()}
        reduced = []
        for v in work:
            f = v.get(lead)
            if f:
                v = {c: val - f * row.get(c, Fraction(0)) for c, val in (v | {c: v.get(c, Fraction(0)) for c in row}).items()}
                v = {c: val for c, val in v.items() if val}
            if v:
                reduced.append(v)
        work = reduced
        for lead0, row0 in done:
            f = row0.get(lead)
            if f:
                for c, val in row.items():
                    row0[c] = row0.get(c, Fraction(0)) - f * val
                    if not row0[c]:
                        del row0[c]
        done.append((lead, row))
    done.sort(key=lambda t: t[0])
    return [row for _, row in done]


def nullspace(matrix: list[list]) -> list[list[Fraction]]:
    """Reduced basis of the right nullspace of a dense exact matrix."""
    if not matrix:
        return []
    n_cols = len(matrix[0])
    rows = []
    for row in matrix:
        if len(row) != n_cols:
            raise ValueError("ragged matrix")
        rows.append(_clear_row({c: v for c, v in enumerate(row) if Fraction(v)}))
    sparse = _nullspace_sparse(rows, n_cols)
    return [[vec.get(c, Fraction(0)) for c in range(n_cols)] for vec in sparse]


def matrix_rank(matrix: list[list]) -> int:
    """Exact rank of a dense rational matrix."""
    rows = [
        _clear_row({c: v for c, v in enumerate(row) if Fraction(v)})
        for row in matrix
    ]
    _, rank = _echelon_int(rows)
    return rank


# ---------------------------------------------------------------------------
# generic span utilities over sparse vectors with orderable labels
# ---------------------------------------------------------------------------


def _labeled_to_int_rows(vectors: list[dict]) -> list[dict[int, int]]:
    labels = sorted({k for v in vectors for k in v})
    pos = {k: i for i, k in enumerate(labels)}
    return [_clear_row(v, pos) for v in vectors]


def span_dim(vectors: list[dict]) -> int:
    """Dimension of the rational span of sparse labeled vectors."""
    _, rank = _echelon_int(_labeled_to_int_rows(vectors))
    return rank


def same_span(avecs: list[dict], bvecs: list[dict]) -> bool:
    ra = span_dim(avecs)
    rb = span_dim(bvecs)
    return ra == rb == span_dim(avecs + bvecs)


def independent_subset(vectors: list[dict]) -> list[int]:
    """Indices of a maximal independent subset, greedy in input order."""
    labels = sorted({k for v in vectors for k in v})
    pos = {k: i for i, k in enumerate(labels)}
    echelon: dict[int, dict[int, Fraction]] = {}
    kept: list[int] = []
    for n, vec in enumerate(vectors):
        row = {pos[k]: Fraction(v) for k, v in vec.items() if Fraction(v)}
        while row:
            lead = min(row)
            hit = echelon.get(lead)
            if hit is None:
                inv = 1 / row[lead]
                echelon[lead] = {c: v * inv for c, v in row.items()}
                kept.append(n)
                break
            f = row[lead]
            for c, v in hit.items():
                row[c] = row.get(c, Fraction(0)) - f * v
                if not row[c]:
                    del row[c]
    return kept


def in_rational_span(vectors: list[dict], target: dict) -> list[Fraction] | None:
    """Exact coordinates of target in span(vectors), or None if outside."""
    labels = sorted({k for v in vectors for k in v} | set(target))
    pos = {k: i for i, k in enumerate(labels)}
    # Solve by elimination on the transposed system with an extra rhs column.
    rhs_col = len(vectors)
    rows = []
    for lab, i in pos.items():
        row = {}
        for n, vec in enumerate(vectors):
            v = Fraction(vec.get(lab, 0))
            if v:
                row[n] = v
        v = Fraction(target.get(lab, 0))
        if v:
            row[rhs_col] = v
        if row:
            rows.append(_clear_row(row))
    pivots, _ = _echelon_int(rows)
    # Inconsistent iff some pivot lands on the rhs column.
    if any(col == rhs_col for col, _ in pivots):
        return None
    coeffs = {c: Fraction(0) for c in range(len(vectors))}
    known: dict[int, Fraction] = {rhs_col: Fraction(-1)}
    # Back-substitute the homogeneous system (coeffs, -1) in the nullspace.
    for col, row in reversed(pivots):
        acc = Fraction(0)
        for c, v in row.items():
            if c != col:
                acc += v * known.get(c, Fraction(0))
        known[col] = -acc / row[col]
    for c in coeffs:
        coeffs[c] = known.get(c, Fraction(0))
    result = [coeffs[c] for c in range(len(vectors))]
    # Free columns default to zero; verify the combination reproduces target.
    recon: dict = {}
    for n, vec in enumerate(vectors):
        if result[n]:
            for k, v in vec.items():
                recon[k] = recon.get(k, Fraction(0)) + result[n] * Fraction(v)
    for k in set(recon) | set(target):
        if recon.get(k, Fraction(0)) != Fraction(target.get(k, 0)):
            return None
    return result


# ---------------------------------------------------------------------------
# ansatz assembly
# ---------------------------------------------------------------------------


def monomials_upto(m: int, degree: int) -> list[tuple[int, ...]]:
    """All exponent tuples of total degree <= degree, graded-lex order."""
    out = [
        exps
        for exps in itertools.product(range(degree + 1), repeat=m)
        if sum(exps) <= degree
    ]
    out.sort(key=grlex_key)
    return out


def unknown_labels(j: int, m: int, max_degree: int) -> list[tuple[SymMultiIndex, tuple]]:
    """Ansatz unknowns (index, monomial), graded-lex on monomial then index."""
    return [
        (I, mono)
        for mono in monomials_upto(m, max_degree)
        for I in enumerate_indices(j, m)
    ]


def field_vector(F: SymTensorField, labels_pos: dict) -> dict:
    """Coordinates of a field in the ansatz unknown basis."""
    vec = {}
    for idx, poly in F.components.items():
        for mono, c in poly.terms.items():
            key = (idx, mono)
            if key not in labels_pos:
                raise ValueError(f"component {key} outside the ansatz degree bound")
            vec[labels_pos[key]] = c
    return vec


def fields_to_vectors(fields: list[SymTensorField], j: int, m: int, max_degree: int) -> list[dict]:
    labels = unknown_labels(j, m, max_degree)
    pos = {lab: i for i, lab in enumerate(labels)}
    return [field_vector(F, pos) for F in fields]


@dataclass
class AnsatzSpec:
    """Degree-bounded polynomial ansatz for one defining system."""

    kind: str
    j: int
    s: int
    signature: Signature
    max_degree: int | None = None

    def __post_init__(self):
        if self.kind not in ("ordinary", "conformal"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.j < 0 or self.s < 1:
            raise ValueError(f"invalid (j={self.j}, s={self.s})")

    def resolved_degree(self) -> int:
        if self.max_degree is not None:
            if self.max_degree < 0:
                raise ValueError("max_degree must be >= 0")
            return self.max_degree
        if self.kind == "ordinary":
            return self.j + self.s - 1
        if self.signature.m <= 2:
            raise ValueError(
                "conformal fields in dimension <= 2 form an infinite family; "
                "an explicit max_degree is required"
            )
        return 2 * (self.j + self.s - 1)


def _falling(e: int, d: int) -> int:
    out = 1
    for i in range(d):
        out *= e - i
    return out


def _derive_monomial(mono: tuple, D: SymMultiIndex) -> tuple[tuple, int] | None:
    """(shifted monomial, integer factor) for the D-derivative of x^mono."""
    exps = list(mono)
    factor = 1
    for a in D:
        i = a - 1
        if exps[i] == 0:
            return None
        factor *= exps[i]
        exps[i] -= 1
    return tuple(exps), factor


def _residual_rows(spec: AnsatzSpec, max_degree: int, labels_pos: dict):
    """Rows of the order-s residual, keyed (residual index, monomial)."""
    m = spec.signature.m
    s = spec.s
    rows: dict[tuple, dict[int, Fraction]] = {}
    derivs = enumerate_indices(s, m)
    for (I, mono), u in labels_pos.items():
        for D in derivs:
            hit = _derive_monomial(mono, D)
            if hit is None:
                continue
            beta, factor = hit
            K = tuple(sorted(I + D))
            coeff = Fraction(factor * _split_multiplicity(K, D))
            row = rows.setdefault((K, beta), {})
            row[u] = row.get(u, Fraction(0)) + coeff
    return rows


def _conformal_rows(spec: AnsatzSpec, max_degree: int, labels_pos: dict):
    """Traceless-residual rows plus trace-side-constraint rows."""
    sig = spec.signature
    m = sig.m
    raw = _residual_rows(spec, max_degree, labels_pos)
    rank = spec.j + spec.s
    rows: dict[tuple, dict[int, Fraction]] = {}
    if rank >= 2 and m >= 2:
        idx_j, idx_t, outer, tr, inv = _projection_data(rank, sig)
        nj, nt = len(idx_j), len(idx_t)
        # projection = 1 - outer . inv . tr on rank-(j+s) coefficient tensors
        invtr = [
            [
                sum((inv[r][t] * tr[t][k2] for t in range(nt)), Fraction(0))
                for k2 in range(nj)
            ]
            for r in range(nt)
        ]
        proj = [
            [
                (Fraction(1) if k == k2 else Fraction(0))
                - sum((outer[k][r] * invtr[r][k2] for r in range(nt)), Fraction(0))
                for k2 in range(nj)
            ]
            for k in range(nj)
        ]
        pos_j = {idx: n for n, idx in enumerate(idx_j)}
        by_beta: dict[tuple, dict[int, dict[int, Fraction]]] = {}
        for (K, beta), row in raw.items():
            by_beta.setdefault(beta, {})[pos_j[K]] = row
        for beta, krows in by_beta.items():
            for k in range(nj):
                out_row: dict[int, Fraction] = {}
                for k2, row in krows.items():
                    f = proj[k][k2]
                    if not f:
                        continue
                    for u, v in row.items():
                        acc = out_row.get(u, Fraction(0)) + f * v
                        if acc:
                            out_row[u] = acc
                        elif u in out_row:
                            del out_row[u]
                if out_row:
                    rows[(idx_j[k], beta)] = out_row
    elif rank >= 2 and m == 1:
        pass  # every rank >= 2 tensor in one dimension is pure trace
    else:
        rows.update(raw)
    if spec.j >= 2:
        for T0 in enumerate_indices(spec.j - 2, m):
            for mono in monomials_upto(m, max_degree):
                row: dict[int, Fraction] = {}
                for a in range(1, m + 1):
                    key = (tuple(sorted(T0 + (a, a))), mono)
                    u = labels_pos[key]
                    row[u] = row.get(u, Fraction(0)) + sig.g(a)
                rows[("trace", T0, mono)] = {u: v for u, v in row.items() if v}
    return rows


def _content_key(label, spec: AnsatzSpec):
    I, mono = label
    m = spec.signature.m
    content = list(index_content(I, m))
    for i, e in enumerate(mono):
        content[i] += e
    if spec.kind == "ordinary":
        return tuple(content)
    return (sum(content), tuple(c % 2 for c in content))


def _thread_count() -> int:
    raw = os.environ.get("KTK_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _solve_blocks(labels, rows, key_of) -> list[dict[int, Fraction]]:
    """Nullspace of a block-diagonal system, canonical per block.

    key_of maps an unknown id to its block; every row must stay inside one
    block, which is asserted.  Returns reduced vectors in global coordinates,
    ordered by leading unknown.
    """
    blocks: dict[object, list[int]] = {}
    for u in range(len(labels)):
        blocks.setdefault(key_of(u), []).append(u)
    row_groups: dict[object, list[dict[int, Fraction]]] = {k: [] for k in blocks}
    for row in rows.values():
        if not row:
            continue
        keys = {key_of(u) for u in row}
        assert len(keys) == 1, "row crosses block boundary"
        row_groups[keys.pop()].append(row)

    def solve_one(key):
        cols = blocks[key]
        local = {u: i for i, u in enumerate(cols)}
        int_rows = [_clear_row(row, local) for row in row_groups[key]]
        vecs = _nullspace_sparse(int_rows, len(cols))
        return [{cols[c]: v for c, v in vec.items()} for vec in vecs]

    ordered = sorted(blocks, key=lambda k: (str(type(k)), k))
    threads = _thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            solved = list(pool.map(solve_one, ordered))
    else:
        solved = [solve_one(k) for k in ordered]
    out = [vec for group in solved for vec in group]
    out.sort(key=lambda vec: min(vec))
    return out


def solve_basis(spec: AnsatzSpec) -> Basis:
    """Complete basis of degree-bounded solutions of the defining system."""
    max_degree = spec.resolved_degree()
    m = spec.signature.m
    labels = unknown_labels(spec.j, m, max_degree)
    labels_pos = {lab: i for i, lab in enumerate(labels)}
    if spec.kind == "ordinary":
        rows = _residual_rows(spec, max_degree, labels_pos)
    else:
        rows = _conformal_rows(spec, max_degree, labels_pos)
    vectors = _solve_blocks(labels, rows, lambda u: _content_key(labels[u], spec))
    elements = []
    for vec in vectors:
        comps: dict[SymMultiIndex, dict] = {}
        for u, c in vec.items():
            I, mono = labels[u]
            comps.setdefault(I, {})[mono] = c
        elements.append(
            SymTensorField(
                spec.j,
                spec.signature,
                {I: Poly(m, terms) for I, terms in comps.items()},
            )
        )
    return Basis(
        kind=spec.kind,
        j=spec.j,
        s=spec.s,
        signature=spec.signature,
        elements=elements,
        degree_bound=max_degree,
    )


def saturation_check(spec: AnsatzSpec) -> bool:
    """True iff raising the degree bound by two leaves the dimension fixed."""
    base = spec.resolved_degree()
    dim0 = len(solve_basis(AnsatzSpec(spec.kind, spec.j, spec.s, spec.signature, base)))
    dim1 = len(
        solve_basis(AnsatzSpec(spec.kind, spec.j, spec.s, spec.signature, base + 2))
    )
    return dim0 == dim1


# ---------------------------------------------------------------------------
# prolonged-system rank checks
# ---------------------------------------------------------------------------


@dataclass
class RankReport:
    j: int
    k: int
    s: int
    signature: Signature
    n_e: int
    n_u: int
    rank: int
    full_row_rank: bool

    def to_json(self) -> dict:
        return {
            "j": self.j,
            "k": self.k,
            "s": self.s,
            "signature": [self.signature.p, self.signature.q],
            "N_e": self.n_e,
            "N_u": self.n_u,
            "rank": self.rank,
            "full_row_rank": self.full_row_rank,
        }


def system_rank(system: ProlongedSystem) -> int:
    """Exact rank of a prolonged system via its conserved-content blocks."""
    m = system.signature.m

    def label_key(label):
        first, second = label
        content = list(index_content(first, m))
        for a in second:
            content[a - 1] += 1
        return tuple(content)

    by_block: dict[tuple, dict[int, dict[int, int]]] = {}
    col_keys = [label_key(lab) for lab in system.col_labels]
    for (r, c), v in system.entries.items():
        by_block.setdefault(col_keys[c], {}).setdefault(r, {})[c] = v
    total = 0
    for key in sorted(by_block):
        rows = list(by_block[key].values())
        _, rank = _echelon_int(rows)
        total += rank
    return total


def full_rank_check(j: int, k: int, s: int, signature: Signature) -> RankReport:
    """Rank of the (j, k, s) prolonged system; full row rank means no slack."""
    system = prolong(j, k, s, signature)
    n_e, n_u = count_eq_unknowns(j, k, s, signature.m)
    rank = system_rank(system)
    return RankReport(
        j=j,
        k=k,
        s=s,
        signature=signature,
        n_e=n_e,
        n_u=n_u,
        rank=rank,
        full_row_rank=rank == n_e,
    )


# ---------------------------------------------------------------------------
# basis verification
# ---------------------------------------------------------------------------


def verify_basis(basis: Basis) -> list[str]:
    """Re-check residuals and independence; returns problem descriptions."""
    from .equations import DefiningSystem

    problems = []
    system = DefiningSystem(basis.kind, basis.j, basis.s, basis.signature)
    for n, el in enumerate(basis.elements):
        if el.rank != basis.j or el.signature != basis.signature:
            problems.append(f"element {n}: rank/signature mismatch")
            continue
        try:
            res = system.residual(el)
        except ValueError as exc:
            problems.append(f"element {n}: {exc}")
            continue
        if not res.is_zero():
            bad = sorted(res.components)[0]
            problems.append(
                f"element {n}: nonzero residual at index {bad}"
            )
    degrees = [el.max_degree() for el in basis.elements]
    bound = max([basis.degree_bound] + degrees)
    if basis.elements:
        vecs = fields_to_vectors(
            basis.elements, basis.j, basis.signature.m, bound
        )
        if span_dim(vecs) != len(basis.elements):
            problems.append("elements are linearly dependent")
    return problems
