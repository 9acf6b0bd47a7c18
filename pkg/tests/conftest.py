"""Shared helpers: signatures, random field generators, cached solution families."""

import random
from fractions import Fraction
from functools import lru_cache

from ktk import (
    Poly,
    Signature,
    SymTensorField,
    build_order_s_basis,
    conformal_residual,
    enumerate_indices,
    killing_residual,
)

EUCLID = {m: Signature(m, 0) for m in (1, 2, 3, 4)}

SIGS_BY_M = {
    1: [Signature(1, 0), Signature(0, 1)],
    2: [Signature(2, 0), Signature(1, 1)],
    3: [Signature(3, 0), Signature(2, 1)],
    4: [Signature(4, 0), Signature(3, 1), Signature(2, 2), Signature(1, 3)],
}

M4_SIGS = SIGS_BY_M[4]


def random_poly(rng: random.Random, dim: int, degree: int) -> Poly:
    """Sparse polynomial with small rational coefficients."""
    terms = {}
    n_terms = rng.randint(1, 4)
    for _ in range(n_terms):
        exps = [0] * dim
        for _ in range(rng.randint(0, degree)):
            exps[rng.randrange(dim)] += 1
        num = rng.randint(-4, 4)
        den = rng.choice([1, 1, 2, 3])
        if num:
            terms[tuple(exps)] = terms.get(tuple(exps), Fraction(0)) + Fraction(num, den)
    p = Poly.zero(dim)
    for exps, c in terms.items():
        if c:
            p = p + Poly.monomial(exps, c)
    return p


def random_field(rng: random.Random, rank: int, sig: Signature, degree: int) -> SymTensorField:
    comps = {}
    for idx in enumerate_indices(rank, sig.m):
        if rng.random() < 0.8:
            comps[idx] = random_poly(rng, sig.m, degree)
    return SymTensorField(rank, sig, comps)


@lru_cache(maxsize=None)
def solution_family(kind: str, j: int, s: int, p: int, q: int):
    return build_order_s_basis(kind, j, s, Signature(p, q))


def random_solution(rng: random.Random, kind: str, j: int, s: int, sig: Signature) -> SymTensorField:
    """Random rational combination of a complete solution family, never zero."""
    basis = solution_family(kind, j, s, sig.p, sig.q)
    out = SymTensorField(j, sig, {})
    for el in basis.elements:
        c = rng.randint(-3, 3)
        if c:
            out = out + el.scale(Fraction(c, rng.choice([1, 1, 2])))
    if out.is_zero():
        out = basis.elements[rng.randrange(len(basis.elements))]
    return out


def residual_of(kind: str, F: SymTensorField, s: int) -> SymTensorField:
    if kind == "ordinary":
        return killing_residual(F, s)
    return conformal_residual(F, s)
