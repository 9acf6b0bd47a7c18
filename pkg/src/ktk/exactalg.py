"""Exact rational scalars and sparse multivariate polynomials.

Coefficients are `fractions.Fraction` (arbitrary precision, always reduced,
positive denominator), monomials are dense exponent tuples of length m, and
polynomials are sparse term maps that never store a zero coefficient.  The
canonical term order used everywhere (iteration, JSON output) is graded
lexicographic: first by total degree, then by exponent tuple.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping

Rational = Fraction

Monomial = tuple  # exponent tuple of length m


def grlex_key(exps: Monomial) -> tuple:
    return (sum(exps), exps)


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"not an exact rational: {c!r}")


class Poly:
    """Sparse polynomial in x_1..x_m with rational coefficients.

    Example:
        >>> x1, x2 = Poly.variable(1, 2), Poly.variable(2, 2)
        >>> ((x1 + x2) * (x1 - x2)).terms == {(2, 0): Fraction(1), (0, 2): Fraction(-1)}
        True
    """

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping[Monomial, Fraction] | None = None):
        if dim < 1:
            raise ValueError(f"dimension must be >= 1, got {dim}")
        self.dim = dim
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for exps, c in terms.items():
                exps = tuple(exps)
                if len(exps) != dim:
                    raise ValueError(f"monomial {exps} does not have dimension {dim}")
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                c = _as_fraction(c)
                if c:
                    clean[exps] = clean.get(exps, Fraction(0)) + c
                    if not clean[exps]:
                        del clean[exps]
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, dim: int) -> "Poly":
        return cls(dim)

    @classmethod
    def constant(cls, dim: int, c) -> "Poly":
        return cls(dim, {(0,) * dim: _as_fraction(c)})

    @classmethod
    def variable(cls, axis: int, dim: int) -> "Poly":
        """x_axis, with axis in 1..dim."""
        if not 1 <= axis <= dim:
            raise ValueError(f"axis {axis} out of range 1..{dim}")
        exps = tuple(1 if i == axis - 1 else 0 for i in range(dim))
        return cls(dim, {exps: Fraction(1)})

    @classmethod
    def monomial(cls, exps: Iterable[int], c=1) -> "Poly":
        exps = tuple(exps)
        return cls(len(exps), {exps: _as_fraction(c)})

    # -- ring operations ---------------------------------------------------

    def _check_dim(self, other: "Poly") -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "Poly") -> "Poly":
        if not isinstance(other, Poly):
            return NotImplemented
        self._check_dim(other)
        terms = dict(self.terms)
        for exps, c in other.terms.items():
            acc = terms.get(exps, Fraction(0)) + c
            if acc:
                terms[exps] = acc
            else:
                terms.pop(exps, None)
        out = Poly.__new__(Poly)
        out.dim = self.dim
        out.terms = terms
        return out

    def __neg__(self) -> "Poly":
        out = Poly.__new__(Poly)
        out.dim = self.dim
        out.terms = {e: -c for e, c in self.terms.items()}
        return out

    def __sub__(self, other: "Poly") -> "Poly":
        if not isinstance(other, Poly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return self.scale(other)
        self._check_dim(other)
        terms: dict[Monomial, Fraction] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                exps = tuple(a + b for a, b in zip(ea, eb))
                acc = terms.get(exps, Fraction(0)) + ca * cb
                if acc:
                    terms[exps] = acc
                else:
                    del terms[exps]
        out = Poly.__new__(Poly)
        out.dim = self.dim
        out.terms = terms
        return out

    def __rmul__(self, other) -> "Poly":
        return self.scale(other)

    def scale(self, c) -> "Poly":
        c = _as_fraction(c)
        out = Poly.__new__(Poly)
        out.dim = self.dim
        out.terms = {e: v * c for e, v in self.terms.items()} if c else {}
        return out

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power")
        result = Poly.constant(self.dim, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def diff(self, axis: int) -> "Poly":
        """Partial derivative with respect to x_axis (axis in 1..dim)."""
        if not 1 <= axis <= self.dim:
            raise ValueError(f"axis {axis} out of range 1..{self.dim}")
        i = axis - 1
        terms: dict[Monomial, Fraction] = {}
        for exps, c in self.terms.items():
            e = exps[i]
            if e:
                lowered = exps[:i] + (e - 1,) + exps[i + 1 :]
                acc = terms.get(lowered, Fraction(0)) + c * e
                if acc:
                    terms[lowered] = acc
                else:
                    del terms[lowered]
        out = Poly.__new__(Poly)
        out.dim = self.dim
        out.terms = terms
        return out

    # -- predicates / accessors --------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def coefficient(self, exps: Iterable[int]) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def eval(self, point: Iterable) -> Fraction:
        """Evaluate at a rational point of length dim."""
        pt = [_as_fraction(v) for v in point]
        if len(pt) != self.dim:
            raise ValueError("point has wrong dimension")
        total = Fraction(0)
        for exps, c in self.terms.items():
            v = c
            for x, e in zip(pt, exps):
                if e:
                    v *= x**e
            total += v
        return total

    def sorted_terms(self) -> Iterator[tuple[Monomial, Fraction]]:
        for exps in sorted(self.terms, key=grlex_key):
            yield exps, self.terms[exps]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.dim == other.dim and self.terms == other.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __hash__(self):
        return hash((self.dim, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps, c in self.sorted_terms():
            mono = "*".join(
                f"x{i + 1}" + (f"^{e}" if e > 1 else "")
                for i, e in enumerate(exps)
                if e
            )
            if mono:
                parts.append(f"{c}*{mono}" if c != 1 else mono)
            else:
                parts.append(str(c))
        return " + ".join(parts)

    # -- serialization -----------------------------------------------------

    def to_json(self) -> list[dict]:
        return [
            {"exps": list(exps), "num": str(c.numerator), "den": str(c.denominator)}
            for exps, c in self.sorted_terms()
        ]

    @classmethod
    def from_json(cls, data: list[dict], dim: int | None = None) -> "Poly":
        if dim is None:
            if not data:
                raise ValueError("cannot infer dimension of a zero polynomial")
            dim = len(data[0]["exps"])
        terms = {
            tuple(t["exps"]): Fraction(int(t["num"]), int(t["den"])) for t in data
        }
        return cls(dim, terms)


def poly_add(a: Poly, b: Poly) -> Poly:
    return a + b


def poly_mul(a: Poly, b: Poly) -> Poly:
    return a * b


def poly_diff(p: Poly, axis: int) -> Poly:
    return p.diff(axis)
