"""Differential operators with polynomial coefficients, normal-ordered.

A term x^alpha d^beta maps to the operator x^alpha * del^beta with all
coordinate factors to the left of all derivatives; composition rewrites
d * x = x * d + 1 into that form.  Symmetry operators of the wave operator
are assembled from symmetric tensor fields by nested anticommutators, and
the symmetry condition [Q, L] = alpha * L is decided by exact division of
the commutator's symbol by the principal quadratic form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

from .exactalg import Poly, _as_fraction, grlex_key
from .tensors import Signature, SymTensorField


def _term_key(key: tuple) -> tuple:
    x_exps, d_exps = key
    return (grlex_key(d_exps), grlex_key(x_exps))


class WeylOp:
    """Normal-ordered polynomial-coefficient differential operator."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms=None):
        if dim < 1:
            raise ValueError(f"dimension must be >= 1, got {dim}")
        self.dim = dim
        clean: dict[tuple, Fraction] = {}
        if terms:
            for (x_exps, d_exps), c in terms.items():
                x_exps, d_exps = tuple(x_exps), tuple(d_exps)
                if len(x_exps) != dim or len(d_exps) != dim:
                    raise ValueError("exponent tuple length does not match dimension")
                c = _as_fraction(c)
                if c:
                    clean[(x_exps, d_exps)] = c
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, dim: int) -> "WeylOp":
        return cls(dim)

    @classmethod
    def constant(cls, dim: int, c) -> "WeylOp":
        z = (0,) * dim
        return cls(dim, {(z, z): c})

    @classmethod
    def x(cls, axis: int, dim: int) -> "WeylOp":
        z = (0,) * dim
        e = tuple(1 if i == axis - 1 else 0 for i in range(dim))
        return cls(dim, {(e, z): 1})

    @classmethod
    def d(cls, axis: int, dim: int) -> "WeylOp":
        z = (0,) * dim
        e = tuple(1 if i == axis - 1 else 0 for i in range(dim))
        return cls(dim, {(z, e): 1})

    @classmethod
    def from_poly(cls, poly: Poly) -> "WeylOp":
        z = (0,) * poly.dim
        return cls(poly.dim, {(exps, z): c for exps, c in poly.terms.items()})

    # -- ring structure ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: "WeylOp") -> "WeylOp":
        if not isinstance(other, WeylOp):
            return NotImplemented
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        out = dict(self.terms)
        for key, c in other.terms.items():
            acc = out.get(key, Fraction(0)) + c
            if acc:
                out[key] = acc
            elif key in out:
                del out[key]
        res = WeylOp.__new__(WeylOp)
        res.dim = self.dim
        res.terms = out
        return res

    def __neg__(self) -> "WeylOp":
        return self.scale(-1)

    def __sub__(self, other: "WeylOp") -> "WeylOp":
        return self + (-other)

    def scale(self, c) -> "WeylOp":
        c = _as_fraction(c)
        res = WeylOp.__new__(WeylOp)
        res.dim = self.dim
        res.terms = {k: v * c for k, v in self.terms.items()} if c else {}
        return res

    def __mul__(self, other) -> "WeylOp":
        if isinstance(other, WeylOp):
            return weyl_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other) -> "WeylOp":
        return self.scale(other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeylOp):
            return NotImplemented
        return self.dim == other.dim and self.terms == other.terms

    def order(self) -> int:
        """Maximal total derivative degree; -1 for the zero operator."""
        if not self.terms:
            return -1
        return max(sum(d) for _, d in self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "WeylOp(0)"
        bits = []
        for (x_exps, d_exps) in sorted(self.terms, key=_term_key):
            c = self.terms[(x_exps, d_exps)]
            factors = [str(c)] if c != 1 or (not any(x_exps) and not any(d_exps)) else []
            for i, e in enumerate(x_exps):
                if e:
                    factors.append(f"x{i+1}" + (f"^{e}" if e > 1 else ""))
            for i, e in enumerate(d_exps):
                if e:
                    factors.append(f"d{i+1}" + (f"^{e}" if e > 1 else ""))
            bits.append("*".join(factors))
        return "WeylOp(" + " + ".join(bits) + ")"

    # -- serialization -----------------------------------------------------

    def to_json(self) -> list:
        out = []
        for (x_exps, d_exps) in sorted(self.terms, key=_term_key):
            c = self.terms[(x_exps, d_exps)]
            out.append(
                {
                    "x_exps": list(x_exps),
                    "d_exps": list(d_exps),
                    "num": str(c.numerator),
                    "den": str(c.denominator),
                }
            )
        return out

    @classmethod
    def from_json(cls, data: list, dim: int | None = None) -> "WeylOp":
        terms = {}
        for entry in data:
            key = (tuple(entry["x_exps"]), tuple(entry["d_exps"]))
            if dim is None:
                dim = len(key[0])
            terms[key] = Fraction(int(entry["num"]), int(entry["den"]))
        if dim is None:
            raise ValueError("cannot infer dimension from an empty term list")
        return cls(dim, terms)


def _falling(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= n - i
    return out


def weyl_mul(A: WeylOp, B: WeylOp) -> WeylOp:
    """Composition A o B in normal order.

    Each exchange of d^beta past x^gamma follows
    d^b x^g = sum_nu C(b,nu) g!/(g-nu)! x^(g-nu) d^(b-nu), per axis.
    """
    if A.dim != B.dim:
        raise ValueError("dimension mismatch")
    dim = A.dim
    out: dict[tuple, Fraction] = {}
    for (xa, da), ca in A.terms.items():
        for (xb, db), cb in B.terms.items():
            base = ca * cb
            ranges = [range(min(da[i], xb[i]) + 1) for i in range(dim)]
            for nu in itertools.product(*ranges):
                coeff = base
                for i in range(dim):
                    if nu[i]:
                        coeff *= comb(da[i], nu[i]) * _falling(xb[i], nu[i])
                key = (
                    tuple(xa[i] + xb[i] - nu[i] for i in range(dim)),
                    tuple(da[i] + db[i] - nu[i] for i in range(dim)),
                )
                acc = out.get(key, Fraction(0)) + coeff
                if acc:
                    out[key] = acc
                elif key in out:
                    del out[key]
    res = WeylOp.__new__(WeylOp)
    res.dim = dim
    res.terms = out
    return res


def commutator(A: WeylOp, B: WeylOp) -> WeylOp:
    return weyl_mul(A, B) - weyl_mul(B, A)


def anticommutator(A: WeylOp, B: WeylOp) -> WeylOp:
    return weyl_mul(A, B) + weyl_mul(B, A)


# ---------------------------------------------------------------------------
# the wave operator and symmetry construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KGFOperator:
    """Wave operator sum_a g^aa d_a^2 - kappa^2 in signature (p, q)."""

    signature: Signature
    kappa_squared: Fraction = Fraction(0)

    def principal(self) -> WeylOp:
        m = self.signature.m
        terms = {}
        for a in range(1, m + 1):
            d2 = tuple(2 if i == a - 1 else 0 for i in range(m))
            terms[((0,) * m, d2)] = Fraction(self.signature.g(a))
        return WeylOp(m, terms)

    def as_weyl(self) -> WeylOp:
        op = self.principal()
        k2 = _as_fraction(self.kappa_squared)
        if k2:
            op = op - WeylOp.constant(self.signature.m, k2)
        return op


def kgf(signature: Signature, kappa_squared=0) -> KGFOperator:
    return KGFOperator(signature, _as_fraction(kappa_squared))


def build_symmetry_operator(F: SymTensorField) -> WeylOp:
    """Nested anticommutators of a rank-j field with one derivative per index.

    Each derivative slot carries the inverse-metric sign (the derivative with
    respect to the lowered coordinate), which is what makes the result
    commute with the wave operator when F solves the order-1 system; sorted
    multi-indices enter with their multinomial multiplicity.  Rank 0 returns
    multiplication by the scalar component; the leading symbol is
    2^j * F^(a1..aj) matched with those derivatives.
    """
    sig = F.signature
    m = sig.m
    total = WeylOp.zero(m)
    for idx, poly in sorted(F.components.items()):
        counts = [idx.count(a) for a in set(idx)]
        mult = factorial(len(idx))
        for c in counts:
            mult //= factorial(c)
        op = WeylOp.from_poly(poly)
        for a in idx:
            op = anticommutator(op, WeylOp.d(a, m).scale(sig.g(a)))
        total = total + op.scale(mult)
    return total


def divide_by_principal(C: WeylOp, signature: Signature) -> tuple[WeylOp, WeylOp]:
    """Write C = alpha o box + remainder by exact symbol division.

    The principal symbol Q(xi) = sum g^aa xi_a^2 has constant coefficients,
    so composing on the right multiplies normal symbols; division eliminates
    every term with xi_1 degree >= 2, and the remainder is zero exactly when
    C lies in the left ideal generated by the principal part.
    """
    m = signature.m
    if C.dim != m:
        raise ValueError("dimension mismatch")
    g1 = Fraction(signature.g(1))
    work = dict(C.terms)
    alpha: dict[tuple, Fraction] = {}
    box = KGFOperator(signature).principal()
    while True:
        candidates = [k for k in work if k[1][0] >= 2]
        if not candidates:
            break
        x_exps, d_exps = max(candidates, key=_term_key)
        c = work[(x_exps, d_exps)] / g1
        q_d = (d_exps[0] - 2,) + d_exps[1:]
        alpha[(x_exps, q_d)] = alpha.get((x_exps, q_d), Fraction(0)) + c
        for a in range(1, m + 1):
            shift = tuple(
                q_d[i] + (2 if i == a - 1 else 0) for i in range(m)
            )
            key = (x_exps, shift)
            acc = work.get(key, Fraction(0)) - c * signature.g(a)
            if acc:
                work[key] = acc
            elif key in work:
                del work[key]
    return WeylOp(m, alpha), WeylOp(m, work)


@dataclass
class SymmetryReport:
    is_symmetry: bool
    alpha: WeylOp
    remainder: WeylOp


def check_symmetry(Q: WeylOp, L: KGFOperator) -> SymmetryReport:
    """Decide [Q, L] = alpha o L via the principal part.

    The mass term is a constant, so [Q, L] = [Q, box]; Q is a symmetry when
    that commutator is a left multiple of the principal part (alpha = 0 for
    operators built from the non-conformal families).
    """
    com = commutator(Q, L.as_weyl())
    alpha, remainder = divide_by_principal(com, L.signature)
    return SymmetryReport(
        is_symmetry=remainder.is_zero(), alpha=alpha, remainder=remainder
    )


def conformal_symmetry_operator(F: SymTensorField) -> WeylOp:
    """Symmetry operator of the massless equation from a traceless solution.

    The nested-anticommutator part alone fails the symmetry condition for
    genuinely conformal fields (a special-conformal vector needs its weight
    term), so the missing lower-order part is found by an exact linear solve:
    unknown terms of derivative order < rank are adjusted until the
    commutator with the principal part divides exactly.
    """
    from .solver import in_rational_span

    sig = F.signature
    m = sig.m
    box = KGFOperator(sig).principal()
    lead = build_symmetry_operator(F)
    _, rem = divide_by_principal(commutator(box, lead), sig)
    if rem.is_zero():
        return lead
    max_x = max(F.max_degree(), 0)
    d_monos = [
        d
        for deg in range(max(F.rank, 1))
        for d in itertools.product(range(deg + 1), repeat=m)
        if sum(d) == deg
    ]
    x_monos = [
        x
        for deg in range(max_x + 1)
        for x in itertools.product(range(deg + 1), repeat=m)
        if sum(x) == deg
    ]
    columns = []
    keys = []
    for d_exps in d_monos:
        for x_exps in x_monos:
            unit = WeylOp(m, {(x_exps, d_exps): 1})
            _, r = divide_by_principal(commutator(box, unit), sig)
            columns.append(dict(r.terms))
            keys.append((x_exps, d_exps))
    target = {k: -v for k, v in rem.terms.items()}
    coeffs = in_rational_span(columns, target)
    if coeffs is None:
        raise ValueError("field does not extend to a symmetry operator")
    correction = WeylOp(
        m, {keys[i]: c for i, c in enumerate(coeffs) if c}
    )
    return lead + correction


def lie_closure_check(generators: list[WeylOp]) -> bool:
    """True iff all pairwise commutators stay in the rational span."""
    from .solver import in_rational_span

    vecs = [dict(g.terms) for g in generators]
    for i in range(len(generators)):
        for k in range(i + 1, len(generators)):
            com = commutator(generators[i], generators[k])
            if com.is_zero():
                continue
            if in_rational_span(vecs, dict(com.terms)) is None:
                return False
    return True
