"""Finitely supported Fourier model of the deformed torus function algebra.

Elements are finite maps Z^n -> coefficients; the product twists coefficient
convolution by the skew bi-character chi(r, l) = exp(pi*i*<r, Theta l>).
Two arithmetic modes share one element type:

* exact   -- coefficients are GaussianRational; available whenever every
             occurring phase lands in Q(i), i.e. <r, Theta l> is a half
             integer on the supports involved (Theta = theta*J with
             theta in {0, 1/2, 1, ...} always qualifies);
* float   -- coefficients are python complex, any real Theta.

All operations are pure; elements are treated as immutable.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Tuple, Union

from .exactnum import GaussianRational

Index = Tuple[int, ...]
Coeff = Union[GaussianRational, complex]

_QUARTER_TURNS = {
    0: GaussianRational(1),
    1: GaussianRational(0, 1),
    2: GaussianRational(-1),
    3: GaussianRational(0, -1),
}


class RankMismatchError(ValueError):
    """Operands live on tori of different rank."""


class ExactPhaseError(ValueError):
    """The requested bi-character value is not a Gaussian rational."""


class SelfAdjointnessError(ValueError):
    """exp_element requires a self-adjoint exponent."""


@dataclass(frozen=True)
class SkewMatrix:
    """Skew-symmetric deformation matrix; entries Fraction (exact) or float."""

    n: int
    entries: Tuple[Tuple[Union[Fraction, float], ...], ...]

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("torus rank must be positive")
        if len(self.entries) != self.n or any(len(row) != self.n for row in self.entries):
            raise ValueError("entries must be an n-by-n array")
        for a in range(self.n):
            for b in range(self.n):
                if self.entries[a][b] != -self.entries[b][a]:
                    raise ValueError("deformation matrix must be skew-symmetric")

    @classmethod
    def standard_2d(cls, theta) -> "SkewMatrix":
        """[[0, theta], [-theta, 0]] with theta Fraction-like (exact) or float."""
        if isinstance(theta, float):
            return cls(2, ((0.0, theta), (-theta, 0.0)))
        th = Fraction(theta)
        return cls(2, ((Fraction(0), th), (-th, Fraction(0))))

    @classmethod
    def zero(cls, n: int) -> "SkewMatrix":
        z = Fraction(0)
        return cls(n, tuple(tuple(z for _ in range(n)) for _ in range(n)))

    def pairing(self, r: Index, l: Index):
        """<r, Theta l> = sum_{a,b} r_a Theta_ab l_b."""
        if len(r) != self.n or len(l) != self.n:
            raise RankMismatchError("multi-index length does not match torus rank")
        total = 0
        for a in range(self.n):
            if r[a] == 0:
                continue
            row = self.entries[a]
            total += r[a] * sum(row[b] * l[b] for b in range(self.n) if l[b] != 0)
        return total


def chi(theta: SkewMatrix, r: Index, l: Index, *, exact: bool = False) -> Coeff:
    """Bi-character value exp(pi*i*<r, Theta l>), of modulus one.

    In exact mode the pairing must be a half integer so the value is one of
    {1, i, -1, -i}; otherwise ExactPhaseError is raised.
    """
    q = theta.pairing(r, l)
    if exact:
        q = Fraction(q)
        twice = 2 * q
        if twice.denominator != 1:
            raise ExactPhaseError(
                f"phase exponent {q} is not a half integer; use floating mode"
            )
        return _QUARTER_TURNS[int(twice) % 4]
    return cmath.exp(1j * math.pi * float(q))


class FourierElement:
    """Finitely supported Fourier series over Z^n.

    mode is 'exact' (GaussianRational coefficients) or 'float' (complex).
    Zero coefficients are dropped on construction.
    """

    __slots__ = ("n", "coeffs", "mode")

    def __init__(self, n: int, coeffs: Dict[Index, Coeff], mode: str = "exact"):
        if mode not in ("exact", "float"):
            raise ValueError("mode must be 'exact' or 'float'")
        clean: Dict[Index, Coeff] = {}
        for idx, c in coeffs.items():
            idx = tuple(int(x) for x in idx)
            if len(idx) != n:
                raise RankMismatchError("multi-index length does not match torus rank")
            if mode == "exact":
                if isinstance(c, (int, Fraction)):
                    c = GaussianRational(c)
                if not isinstance(c, GaussianRational):
                    raise TypeError("exact mode requires GaussianRational coefficients")
                if c:
                    clean[idx] = c
            else:
                c = complex(c)
                if c != 0:
                    clean[idx] = c
        self.n = n
        self.coeffs = clean
        self.mode = mode

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, n: int, mode: str = "exact") -> "FourierElement":
        return cls(n, {}, mode)

    @classmethod
    def unit(cls, n: int, mode: str = "exact") -> "FourierElement":
        one = GaussianRational(1) if mode == "exact" else 1.0 + 0j
        return cls(n, {tuple(0 for _ in range(n)): one}, mode)

    @classmethod
    def generator(cls, n: int, axis: int, mode: str = "exact") -> "FourierElement":
        """The unitary generator e_axis (1-indexed), support {delta_axis}."""
        if not 1 <= axis <= n:
            raise ValueError("axis out of range")
        idx = tuple(1 if j == axis - 1 else 0 for j in range(n))
        one = GaussianRational(1) if mode == "exact" else 1.0 + 0j
        return cls(n, {idx: one}, mode)

    # -- linear structure --------------------------------------------------
    def _check_compatible(self, other: "FourierElement"):
        if self.n != other.n:
            raise RankMismatchError("torus ranks differ")
        if self.mode != other.mode:
            raise ValueError("mixed arithmetic modes")

    def __add__(self, other: "FourierElement") -> "FourierElement":
        self._check_compatible(other)
        out = dict(self.coeffs)
        zero = GaussianRational(0) if self.mode == "exact" else 0j
        for idx, c in other.coeffs.items():
            out[idx] = out.get(idx, zero) + c
        return FourierElement(self.n, out, self.mode)

    def __sub__(self, other: "FourierElement") -> "FourierElement":
        return self + other.scaled(-1)

    def scaled(self, factor) -> "FourierElement":
        if self.mode == "exact" and isinstance(factor, (int, Fraction)):
            factor = GaussianRational(factor)
        if self.mode == "float":
            factor = complex(factor)
        return FourierElement(
            self.n, {idx: factor * c for idx, c in self.coeffs.items()}, self.mode
        )

    def __eq__(self, other):
        if not isinstance(other, FourierElement):
            return NotImplemented
        return self.n == other.n and self.mode == other.mode and self.coeffs == other.coeffs

    def __repr__(self):
        return f"FourierElement(n={self.n}, {len(self.coeffs)} modes, mode={self.mode})"

    def support(self) -> Iterable[Index]:
        return self.coeffs.keys()

    def l1_norm(self) -> float:
        """Sum of coefficient moduli; submultiplicative for the twisted product."""
        if self.mode == "exact":
            return sum(abs(complex(c)) for c in self.coeffs.values())
        return sum(abs(c) for c in self.coeffs.values())


# -- the deformed product and friends --------------------------------------

def deformed_product(a: FourierElement, b: FourierElement, theta: SkewMatrix) -> FourierElement:
    """Twisted convolution: coefficient at k is sum_{r+s=k} chi(r,s) a_r b_s."""
    a._check_compatible(b)
    if theta.n != a.n:
        raise RankMismatchError("deformation matrix rank differs from elements")
    exact = a.mode == "exact"
    zero = GaussianRational(0) if exact else 0j
    out: Dict[Index, Coeff] = {}
    for r, ar in a.coeffs.items():
        for s, bs in b.coeffs.items():
            k = tuple(r[i] + s[i] for i in range(a.n))
            phase = chi(theta, r, s, exact=exact)
            out[k] = out.get(k, zero) + phase * ar * bs
    return FourierElement(a.n, out, a.mode)


def star(a: FourierElement) -> FourierElement:
    """Adjoint: coefficient at -r is the conjugate of the coefficient at r."""
    if a.mode == "exact":
        out = {tuple(-x for x in idx): c.conjugate() for idx, c in a.coeffs.items()}
    else:
        out = {tuple(-x for x in idx): c.conjugate() for idx, c in a.coeffs.items()}
    return FourierElement(a.n, out, a.mode)


def trace(a: FourierElement) -> Coeff:
    """Normalized torus trace = coefficient of the invariant mode 0."""
    zero_idx = tuple(0 for _ in range(a.n))
    if a.mode == "exact":
        return a.coeffs.get(zero_idx, GaussianRational(0))
    return a.coeffs.get(zero_idx, 0j)


def derivation(a: FourierElement, j: int) -> FourierElement:
    """Generator of the torus action along axis j (1-indexed).

    Floating mode multiplies the coefficient at r by 2*pi*i*r_j. Exact mode
    keeps coefficients in Q(i) by using the rescaled generator i*r_j (the
    2*pi is a fixed real scale that cancels from every law we assert).
    """
    if not 1 <= j <= a.n:
        raise ValueError("axis out of range")
    out: Dict[Index, Coeff] = {}
    if a.mode == "exact":
        for idx, c in a.coeffs.items():
            rj = idx[j - 1]
            if rj:
                out[idx] = GaussianRational(0, rj) * c
    else:
        for idx, c in a.coeffs.items():
            rj = idx[j - 1]
            if rj:
                out[idx] = 2j * math.pi * rj * c
    return FourierElement(a.n, out, a.mode)


def is_self_adjoint(a: FourierElement, tol: float = 0.0) -> bool:
    s = star(a)
    if a.mode == "exact":
        return s == a
    keys = set(a.coeffs) | set(s.coeffs)
    return all(abs(a.coeffs.get(k, 0j) - s.coeffs.get(k, 0j)) <= tol for k in keys)


def exp_element(h: FourierElement, theta: SkewMatrix, order: int) -> FourierElement:
    """Truncated twisted exponential sum_{m<=order} h^m / m!.

    Requires star(h) = h. The series tail is bounded in l1 norm by
    ||h||^(order+1)/(order+1)! because the l1 norm is submultiplicative.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if not is_self_adjoint(h, tol=1e-12 if h.mode == "float" else 0.0):
        raise SelfAdjointnessError("exponent must be self-adjoint")
    acc = FourierElement.unit(h.n, h.mode)
    term = FourierElement.unit(h.n, h.mode)
    for m in range(1, order + 1):
        term = deformed_product(term, h, theta)
        term = term.scaled(Fraction(1, m) if h.mode == "exact" else 1.0 / m)
        acc = acc + term
    return acc


# -- text fixtures ----------------------------------------------------------

def format_element(a: FourierElement) -> str:
    """Line format `r1,...,rn : re,im`, sorted by multi-index."""
    lines = []
    for idx in sorted(a.coeffs):
        c = a.coeffs[idx]
        if a.mode == "exact":
            re, im = str(c.re), str(c.im)
        else:
            re, im = repr(c.real), repr(c.imag)
        lines.append(f"{','.join(str(x) for x in idx)} : {re},{im}")
    return "\n".join(lines)


def parse_element(text: str, n: int, mode: str = "exact") -> FourierElement:
    coeffs: Dict[Index, Coeff] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        left, right = line.split(":")
        idx = tuple(int(x) for x in left.strip().split(","))
        re_s, im_s = (p.strip() for p in right.strip().split(","))
        if mode == "exact":
            coeffs[idx] = GaussianRational(Fraction(re_s), Fraction(im_s))
        else:
            coeffs[idx] = complex(float(re_s), float(im_s))
    return FourierElement(n, coeffs, mode)
