"""Rearrangement stage: sphere-averaged scalar words -> curvature functions.

After sphere averaging, every term of the b_2 symbol is a word in b0, k,
kinv with at most two curvature factors (GradK / HessK), a power of Xi2,
and either a metric contraction Ginv or the scalar atom SDelta.  This
module finishes the derivation:

  1. ``extract_signature`` reads off each word's radial-integral data:
     the b0 block exponents (p0, p1[, p2]) split by the curvature
     factors, the Xi2 power w, the net k-power, and the modular shifts
     each curvature factor acquires while the k-powers commute to the
     front (with Delta(rho) = kinv * rho * k one has rho k = k Delta(rho),
     so every k sitting to the right of a curvature factor applies Delta
     to it once; kinv applies the inverse).  A Delta power on the
     first/second factor becomes a monomial factor s^j1 / t^j2 on the
     integrand.
  2. ``integrate_dim2`` / ``integrate_dim_m`` produce the exact value of
     the radial integral as a ``SymbolicFunction``: closed-form partial
     fractions in dimension 2, the (d/du)^{m/2-2} formula at u = 0 for
     even dimensions >= 4.  Both fold in the term prefactor, the shift
     monomial s^j1 t^j2, and the 1/2 coming from the r -> r^2 change of
     radial variable.
  3. ``derive_curvature`` runs the whole pipeline for a named operator
     and aggregates the three channels -- the coefficient functions of
     (hess k) g^{-1} and (grad k grad k) g^{-1} and the constant on the
     scalar atom -- into a ``CurvatureReport``.

The two-parameter families integrated here are

    K_{(p,q)}(s, r)   = r^{p+q-2}   (r+1)^{-p} (s r+1)^{-q}
    H_{(p,q,l)}(s,t,r)= r^{p+q+l-2} (r+1)^{-p} (s r+1)^{-q} (s t r+1)^{-l}

with s the modular variable of the first curvature factor and t that of
the second.  Everything is exact rational / rational-plus-log arithmetic;
floats appear only in ``eval_function``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import mpmath as mp
import sympy as sp

from .symbol_engine import (
    NCExpression,
    NCMonomial,
    nc4tori_lower_symbols,
    resolvent_b,
    standard_p2,
)
from .cosphere_integrator import sphere_average

__all__ = [
    "SignatureError",
    "DivergentIntegralError",
    "TermSignature",
    "SymbolicFunction",
    "CurvatureReport",
    "extract_signature",
    "integrate_dim2",
    "integrate_dim_m",
    "family_integral_dim2",
    "family_value_dim_m",
    "scalar_profile",
    "operator_symbols",
    "derive_curvature",
    "eval_function",
    "OPERATORS",
]


class SignatureError(ValueError):
    """A scalar word does not match the recognized integral signatures."""


class DivergentIntegralError(ArithmeticError):
    """The log-divergent residues of a radial integral failed to cancel."""


S, T = sp.symbols("s t", positive=True)
_R = sp.Symbol("r", positive=True)
_U = sp.Symbol("u")

_BASIS = ("one", "log_s", "log_st")

OPERATORS = ("kdelta", "nc4tori")


# --------------------------------------------------------------------------
# exact function container


class SymbolicFunction:
    """Exact function of (s, t) on the basis {1, log s, log(st)}.

    parts maps each basis tag to a rational function of (s, t) with
    rational coefficients; the represented function is

        parts["one"] + parts["log_s"]*log(s) + parts["log_st"]*log(s*t).

    Equality is decided exactly (cancel of the cross-difference per tag).
    """

    __slots__ = ("parts", "_fns")

    def __init__(self, parts: Optional[Mapping[str, sp.Expr]] = None):
        cleaned: Dict[str, sp.Expr] = {}
        src = parts or {}
        for tag in _BASIS:
            expr = sp.sympify(src.get(tag, 0))
            cleaned[tag] = sp.cancel(sp.together(expr))
        self.parts = cleaned
        self._fns = None

    @classmethod
    def zero(cls) -> "SymbolicFunction":
        return cls()

    def __add__(self, other: "SymbolicFunction") -> "SymbolicFunction":
        return SymbolicFunction(
            {tag: self.parts[tag] + other.parts[tag] for tag in _BASIS}
        )

    def scaled(self, factor) -> "SymbolicFunction":
        f = sp.sympify(sp.Rational(factor) if isinstance(factor, Fraction) else factor)
        return SymbolicFunction({tag: f * self.parts[tag] for tag in _BASIS})

    def __neg__(self) -> "SymbolicFunction":
        return self.scaled(-1)

    def __sub__(self, other: "SymbolicFunction") -> "SymbolicFunction":
        return self + (-other)

    def is_zero(self) -> bool:
        return all(self.parts[tag] == 0 for tag in _BASIS)

    def __eq__(self, other):
        if not isinstance(other, SymbolicFunction):
            return NotImplemented
        return all(
            sp.cancel(sp.together(self.parts[tag] - other.parts[tag])) == 0
            for tag in _BASIS
        )

    def __hash__(self):
        return hash(tuple(self.parts[tag] for tag in _BASIS))

    def constant_value(self) -> Fraction:
        """The exact value when the function is a constant; error otherwise."""
        if self.parts["log_s"] != 0 or self.parts["log_st"] != 0:
            raise ValueError("function has log terms, not a constant")
        c = self.parts["one"]
        if c.free_symbols:
            raise ValueError("function depends on (s, t), not a constant")
        q = sp.Rational(c)
        return Fraction(int(q.p), int(q.q))

    def combined(self) -> sp.Expr:
        return (
            self.parts["one"]
            + self.parts["log_s"] * sp.log(S)
            + self.parts["log_st"] * sp.log(S * T)
        )

    def render(self) -> str:
        """Single-fraction infix form, e.g.
        ``(-2*s + (s + 1)*log(s) + 2) / (2*(s - 1)^3)``."""
        if self.is_zero():
            return "0"
        num, den = sp.fraction(sp.cancel(sp.together(self.combined())))
        num = sp.collect(sp.expand(num), [sp.log(S), sp.log(T), sp.log(S * T)])
        den = sp.factor(den)
        num_s = str(num).replace("**", "^")
        if den == 1:
            return num_s
        return f"({num_s}) / ({str(den).replace('**', '^')})"

    def parts_strings(self) -> Dict[str, str]:
        return {tag: str(self.parts[tag]).replace("**", "^") for tag in _BASIS}

    def __repr__(self):
        return f"SymbolicFunction({self.render()!r})"

    # numeric evaluation ----------------------------------------------------

    def _eval_mp(self, sv, tv):
        if self._fns is None:
            self._fns = tuple(
                sp.lambdify((S, T), self.parts[tag], modules="mpmath")
                for tag in _BASIS
            )
        f1, fs, fst = self._fns
        return f1(sv, tv) + fs(sv, tv) * mp.log(sv) + fst(sv, tv) * mp.log(sv * tv)


def eval_function(f: SymbolicFunction, s: float, t: float = 1.0) -> float:
    """Numeric value of f at (s, t); near the removable set {s=1, t=1,
    st=1} a 4-point polynomial limit along the ray (s(1+e), t(1+e)) is
    used instead of direct substitution."""
    if s <= 0 or t <= 0:
        raise ValueError("usage: eval_function requires s > 0 and t > 0")
    with mp.workdps(60):
        sv = mp.mpf(s)
        tv = mp.mpf(t)
        gap = min(abs(sv - 1), abs(tv - 1), abs(sv * tv - 1))
        if gap >= mp.mpf("1e-4"):
            return float(f._eval_mp(sv, tv))
        eps = [mp.mpf("1e-5") * mp.mpf(2) ** (-i) for i in range(4)]
        vals = [f._eval_mp(sv * (1 + e), tv * (1 + e)) for e in eps]
        # Neville tableau evaluated at e = 0
        for j in range(1, 4):
            for i in range(4 - j):
                vals[i] = (eps[i] * vals[i + 1] - eps[i + j] * vals[i]) / (
                    eps[i] - eps[i + j]
                )
        return float(vals[0])


# --------------------------------------------------------------------------
# signatures


@dataclass(frozen=True)
class TermSignature:
    """Radial-integral data of one post-sphere scalar word.

    b0_exponents are the b0 powers of the blocks cut by the curvature
    factors: (n,) for the scalar channel, (p, q) around one factor,
    (p, q, l) around two.  modular_shifts has one entry per curvature
    factor: the net Delta power it acquired (k minus kinv counted to its
    right).  k_total is the net k power of the word itself; r_power is
    the Xi2 exponent w, tied to the blocks by w = sum(b0_exponents) - 2.
    """

    prefactor: Fraction
    b0_exponents: Tuple[int, ...]
    r_power: int
    k_total: int
    modular_shifts: Tuple[int, ...]
    rho_factors: Tuple[str, ...]
    contraction: str  # "ginv" or "none"

    @property
    def channel(self) -> str:
        if self.rho_factors == ("HessK",):
            return "hess"
        if self.rho_factors == ("GradK", "GradK"):
            return "gradgrad"
        return "scalar"


_POST_SPHERE_SCALARS = {"Xi2"}
_RHO_KINDS = {"GradK", "HessK"}


def extract_signature(term: NCMonomial) -> TermSignature:
    """Classify one scalar word into a TermSignature.

    Raises SignatureError for anything outside the recognized table:
    non-real coefficient, leftover fiber atoms, more than two curvature
    factors, mixed factor kinds, mismatched metric contraction, or a
    broken w = sum(p_i) - 2 law.
    """
    coeff = term.coeff
    if coeff.im != 0:
        raise SignatureError("unsupported signature: coefficient is not real")
    blocks: List[int] = [0]
    rho_kinds: List[str] = []
    rho_slots: List[str] = []
    rho_pos: List[int] = []
    k_pos: List[int] = []
    kinv_pos: List[int] = []
    ginv_slots: Optional[Tuple[str, ...]] = None
    sdelta = 0
    w = 0
    for pos, atom in enumerate(term.word):
        kind = atom.kind
        if kind == "b0":
            blocks[-1] += 1
        elif kind == "k":
            k_pos.append(pos)
        elif kind == "kinv":
            kinv_pos.append(pos)
        elif kind in _RHO_KINDS:
            rho_kinds.append(kind)
            rho_slots.extend(atom.slots)
            rho_pos.append(pos)
            blocks.append(0)
        elif kind == "Xi2":
            w += 1
        elif kind == "Ginv":
            if ginv_slots is not None:
                raise SignatureError(
                    "unsupported signature: more than one metric contraction"
                )
            ginv_slots = atom.slots
        elif kind == "SDelta":
            sdelta += 1
        else:
            raise SignatureError(
                f"unsupported signature: atom {kind} has no radial family"
            )

    if len(rho_kinds) > 2:
        raise SignatureError("unsupported signature: more than two curvature factors")
    if rho_kinds and sdelta:
        raise SignatureError(
            "unsupported signature: scalar atom mixed with curvature factors"
        )
    if not rho_kinds:
        if sdelta != 1 or ginv_slots is not None:
            raise SignatureError(
                "unsupported signature: factor-free word is not a single "
                "scalar-atom term"
            )
        if len(blocks) != 1 or blocks[0] < 2:
            raise SignatureError(
                "unsupported signature: scalar-channel word needs a b0 block "
                "of exponent >= 2"
            )
    else:
        if rho_kinds not in (["HessK"], ["GradK", "GradK"]):
            raise SignatureError(
                f"unsupported signature: curvature factor pattern {rho_kinds}"
            )
        if sdelta:
            raise SignatureError(
                "unsupported signature: scalar atom mixed with curvature factors"
            )
        if ginv_slots is None:
            raise SignatureError(
                "unsupported signature: curvature factors lack a metric contraction"
            )
        if set(ginv_slots) != set(rho_slots) or len(rho_slots) != 2:
            raise SignatureError(
                "unsupported signature: metric contraction does not close the "
                "curvature-factor slots"
            )
        if blocks[0] < 1 or blocks[-1] < 1:
            raise SignatureError(
                "unsupported signature: word does not start and end in b0"
            )

    if w != sum(blocks) - 2:
        raise SignatureError(
            "unsupported signature: radial power "
            f"{w} breaks the w = sum(b0 exponents) - 2 law for blocks {tuple(blocks)}"
        )

    shifts = tuple(
        sum(1 for p in k_pos if p > rp) - sum(1 for p in kinv_pos if p > rp)
        for rp in rho_pos
    )
    return TermSignature(
        prefactor=Fraction(coeff.re),
        b0_exponents=tuple(blocks),
        r_power=w,
        k_total=len(k_pos) - len(kinv_pos),
        modular_shifts=shifts,
        rho_factors=tuple(rho_kinds),
        contraction="ginv" if ginv_slots is not None else "none",
    )


# --------------------------------------------------------------------------
# radial integration, dimension 2: exact partial fractions


def _pole_list(exponents: Sequence[int]) -> List[Tuple[sp.Expr, int]]:
    """(coefficient c, multiplicity) for each factor (c*r + 1)^-mult."""
    scales = (sp.Integer(1), S, S * T)
    out = []
    for c, mult in zip(scales, exponents):
        if mult < 0:
            raise SignatureError("unsupported signature: negative block exponent")
        if mult:
            out.append((c, mult))
    return out


def _radial_partial_fractions(exponents: Sequence[int]) -> SymbolicFunction:
    """Exact value of int_0^oo r^(P-2) * prod (c_i r+1)^(-m_i) dr, P = sum m_i.

    The poles -1/c_i are pairwise distinct once s, t are treated as
    transcendentals.  Simple-pole residues must sum to zero (the log R
    divergences cancel); the finite log parts land on log s and log(st).
    """
    poles = _pole_list(exponents)
    total = sum(m for _, m in poles)
    if total < 2:
        raise DivergentIntegralError(
            "divergent integral: block exponents sum below 2"
        )
    scale = sp.prod([c**m for c, m in poles])  # from (c r+1) = c (r + 1/c)
    roots = [(-1 / c, m) for c, m in poles]
    base = _R ** (total - 2) / scale
    for rho, m in roots:
        base = base / (_R - rho) ** m

    one_part = sp.Integer(0)
    simple: List[Tuple[sp.Expr, sp.Expr]] = []  # (root, residue of 1/(r - root))
    for i, (rho, m) in enumerate(roots):
        g = sp.cancel(base * (_R - rho) ** m)
        for j in range(m, 0, -1):
            coeff = sp.cancel(
                sp.diff(g, _R, m - j).subs(_R, rho) / factorial(m - j)
            )
            if j >= 2:
                # [ (r-rho)^(1-j)/(1-j) ]_0^oo = (-rho)^(1-j)/(j-1)
                one_part += coeff * (-rho) ** (1 - j) / (j - 1)
            else:
                simple.append((rho, coeff))

    residue_sum = sp.cancel(sum(c for _, c in simple))
    if residue_sum != 0:
        raise DivergentIntegralError(
            "divergent integral: simple-pole residues do not cancel "
            f"(sum {residue_sum})"
        )
    # finite part of sum c_i log(r - rho_i) from 0 to oo is -sum c_i log(-rho_i);
    # the roots are -1, -1/s, -1/(s t), so the logs land on log s and log(st).
    log_s_part = sp.Integer(0)
    log_st_part = sp.Integer(0)
    for rho, c in simple:
        arg = sp.cancel(-rho)
        if arg == 1:
            continue
        if arg == 1 / S:
            log_s_part += c
        elif arg == 1 / (S * T):
            log_st_part += c
        else:  # pragma: no cover - pole table is fixed above
            raise DivergentIntegralError(f"divergent integral: unexpected pole {rho}")
    return SymbolicFunction(
        {"one": one_part, "log_s": log_s_part, "log_st": log_st_part}
    )


def family_integral_dim2(exponents: Sequence[int]) -> SymbolicFunction:
    """int_0^oo K_(p,q) dr or int_0^oo H_(p,q,l) dr, exactly (no prefactor,
    no shift monomial, no measure 1/2)."""
    if len(exponents) not in (2, 3):
        raise SignatureError("family exponents must be (p, q) or (p, q, l)")
    return _radial_partial_fractions(tuple(exponents))


def _shift_monomial(shifts: Sequence[int]) -> sp.Expr:
    mono = sp.Integer(1)
    for var, j in zip((S, T), shifts):
        mono *= var**j
    return mono


def integrate_dim2(sig: TermSignature) -> SymbolicFunction:
    """Exact dim-2 radial integral of one signature, times its prefactor,
    shift monomial s^j1 t^j2, and the measure 1/2."""
    pre = sp.Rational(sig.prefactor) / 2 * _shift_monomial(sig.modular_shifts)
    if sig.channel == "scalar":
        # int_0^oo r^(n-2) (r+1)^(-n) dr = Beta(n-1, 1) = 1/(n-1)
        n = sig.b0_exponents[0]
        return SymbolicFunction({"one": pre * sp.Rational(1, n - 1)})
    return _radial_partial_fractions(sig.b0_exponents).scaled(pre)


# --------------------------------------------------------------------------
# radial integration, even dimension >= 4: u-derivative formula


def family_value_dim_m(exponents: Sequence[int], m: int) -> sp.Expr:
    """K~ or H~ at even dimension m >= 4:
    (d/du)^{m/2-2} at u=0 of (1-u)^-p (s-u)^-q [(s t-u)^-l]."""
    if m < 4 or m % 2:
        raise ValueError("usage: the u-derivative families need even m >= 4")
    if len(exponents) not in (1, 2, 3):
        raise SignatureError("family exponents must have 1, 2, or 3 entries")
    bases = (sp.Integer(1) - _U, S - _U, S * T - _U)
    expr = sp.Integer(1)
    for b, e in zip(bases, exponents):
        expr *= b ** (-e)
    return sp.cancel(sp.diff(expr, _U, m // 2 - 2).subs(_U, 0))


def integrate_dim_m(sig: TermSignature, m: int) -> SymbolicFunction:
    """Dim-m (even, >= 4) analogue of integrate_dim2: prefactor * s^j1 t^j2
    * 1/2 * the u-derivative family value."""
    if m < 4 or m % 2:
        raise ValueError("usage: integrate_dim_m needs even m >= 4")
    pre = sp.Rational(sig.prefactor) / 2 * _shift_monomial(sig.modular_shifts)
    if sig.channel == "scalar":
        # both poles pinned at 1: (1-u)^-(n-1) (s-u)^-1 at s = 1
        n = sig.b0_exponents[0]
        value = family_value_dim_m((n,), m)
    else:
        value = family_value_dim_m(sig.b0_exponents, m)
    return SymbolicFunction({"one": sp.cancel(pre * value)})


def scalar_profile(m: int) -> SymbolicFunction:
    """The scalar-channel profile F(s) = (1/2) * [K_(2,1) family](s):
    the modular function multiplying the scalar atom before the 2/(3m)
    weight.  F(1) = (m/2)!/4 for every even m."""
    if m == 2:
        return family_integral_dim2((2, 1)).scaled(sp.Rational(1, 2))
    return SymbolicFunction(
        {"one": family_value_dim_m((2, 1), m) / 2}
    )


# --------------------------------------------------------------------------
# full derivation


def operator_symbols(operator: str) -> Dict[str, NCExpression]:
    if operator == "kdelta":
        return {"p2": standard_p2()}
    if operator == "nc4tori":
        return nc4tori_lower_symbols()
    raise ValueError(f"usage: unknown operator {operator!r}; choose from {OPERATORS}")


_CHANNEL_OFFSET = {"hess": 0, "gradgrad": -1, "scalar": 1}


@dataclass(frozen=True)
class CurvatureReport:
    """Final derivation output for one (dimension, operator) pair.

    K multiplies k^(-m/2) (hess k) g^{-1}; G multiplies k^(-m/2-1)
    (grad k grad k) g^{-1}; c_scalar multiplies k^(-m/2+1) times the
    scalar atom.  The overall constants Vol(S^{m-1}) and (2 pi)^-m are
    recorded in ``normalization`` and never folded into the functions;
    the 1/2 from the radial change of variable r -> r^2 is folded in and
    listed descriptively.
    """

    dim: int
    operator: str
    K: SymbolicFunction
    G: SymbolicFunction
    c_scalar: Fraction
    k_powers: Tuple[Tuple[str, int], ...]
    normalization: Tuple[Tuple[str, str], ...]
    notes: Tuple[str, ...] = ()

    def k_power(self, channel: str) -> int:
        return dict(self.k_powers)[channel]

    def to_json(self) -> str:
        payload = {
            "dim": self.dim,
            "operator": self.operator,
            "normalization": dict(self.normalization),
            "k_powers": dict(self.k_powers),
            "K": {"render": self.K.render(), "parts": self.K.parts_strings()},
            "G": {"render": self.G.render(), "parts": self.G.parts_strings()},
            "c_scalar": str(self.c_scalar),
            "notes": list(self.notes),
        }
        return json.dumps(payload, indent=2)

    def to_text(self) -> str:
        lines = [
            "modular curvature report",
            f"  dim:       {self.dim}",
            f"  operator:  {self.operator}",
            "  normalization:",
        ]
        for name, value in self.normalization:
            lines.append(f"    {name} = {value}")
        lines.append(
            "  k powers:  "
            + ", ".join(f"{ch} {p}" for ch, p in self.k_powers)
        )
        lines.append(f"  K(s)    = {self.K.render()}")
        lines.append(f"  G(s,t)  = {self.G.render()}")
        lines.append(f"  c_scalar = {self.c_scalar}")
        for note in self.notes:
            lines.append(f"  note: {note}")
        return "\n".join(lines) + "\n"


def _normalization_record(m: int) -> Tuple[Tuple[str, str], ...]:
    half = m // 2
    vol_coeff = Fraction(2, factorial(half - 1))
    vol = f"{vol_coeff}*pi^{half}" if vol_coeff != 1 else f"pi^{half}"
    return (
        ("sphere_volume", vol),
        ("sphere_volume_coeff", str(vol_coeff)),
        ("sphere_volume_pi_power", str(half)),
        ("momentum_measure", f"(2*pi)^-{m}"),
        ("radial_measure_half", "1/2 (folded into K, G, c_scalar)"),
    )


def derive_curvature(m: int, operator: str) -> CurvatureReport:
    """Run resolvent -> sphere average -> signatures -> radial integrals
    and aggregate the three channels for the requested operator."""
    if m < 2 or m % 2:
        raise ValueError("usage: dimension must be an even integer >= 2")
    if operator not in OPERATORS:
        raise ValueError(
            f"usage: unknown operator {operator!r}; choose from {OPERATORS}"
        )
    if operator == "nc4tori" and m != 4:
        raise ValueError("usage: the nc4tori operator is defined only at dim 4")

    b2 = resolvent_b(2, operator_symbols(operator))
    averaged = sphere_average(b2, m)

    K = SymbolicFunction.zero()
    G = SymbolicFunction.zero()
    c_scalar = Fraction(0)
    for term in averaged.terms:
        sig = extract_signature(term)
        final_k = sig.k_total - sig.r_power - m // 2
        expected = _CHANNEL_OFFSET[sig.channel] - m // 2
        if final_k != expected:
            raise SignatureError(
                f"unsupported signature: channel {sig.channel} carries k power "
                f"{final_k}, expected {expected}"
            )
        value = integrate_dim2(sig) if m == 2 else integrate_dim_m(sig, m)
        if sig.channel == "hess":
            K = K + value
        elif sig.channel == "gradgrad":
            G = G + value
        else:
            c_scalar += value.constant_value()

    notes: List[str] = []
    if operator == "kdelta" and m == 2:
        notes.append(
            "G channel: the derived function is the negative of a commonly "
            "tabulated closed form for this operator; the derived sign is the "
            "one for which the dim-2 Gauss-Bonnet residual oracle vanishes, "
            "and the difference is recorded here rather than adjusted."
        )
    if operator == "nc4tori":
        notes.append(
            "K channel: the derivation yields "
            f"{K.render()}; reference tabulations of the same operator quote "
            "magnitude 1/(4*s) with the overall sign printed inconsistently "
            "(both +1/(4*s) and -1/(4*s) appear); the factor-3 and sign "
            "differences are recorded here rather than adjusted."
        )
        notes.append(
            "G channel: the derivation yields "
            f"{G.render()}; reference tabulations quote -1/(8*s^2*t); the "
            "factor-3 difference is recorded here rather than adjusted."
        )
        notes.append(
            "scalar channel: this operator lives over a flat base, so the "
            "scalar atom has no geometric source; c_scalar is the universal "
            "pipeline value for the abstract channel."
        )

    k_powers = (
        ("hess", -(m // 2)),
        ("gradgrad", -(m // 2) - 1),
        ("scalar", -(m // 2) + 1),
    )
    return CurvatureReport(
        dim=m,
        operator=operator,
        K=K,
        G=G,
        c_scalar=c_scalar,
        k_powers=k_powers,
        normalization=_normalization_record(m),
        notes=tuple(notes),
    )


def dim2_quadrature_decomposition(which: str) -> Tuple[
        Tuple[Tuple[int, ...], Fraction, Tuple[int, ...]], ...]:
    """The dim-2 one- or two-variable channel as raw quadrature pieces.

    Returns consolidated triples (block exponents, rational prefactor with
    the half measure folded in, modular shifts); the channel value at (s, t)
    is sum prefactor * s^j1 [* t^j2] * integral of the radial family.  This
    feeds the independent quadrature cross-check, bypassing the symbolic
    partial-fraction integration entirely.
    """
    if which not in ("K", "G"):
        raise ValueError("usage: which must be K or G")
    channel = "hess" if which == "K" else "gradgrad"
    averaged = sphere_average(resolvent_b(2, operator_symbols("kdelta")), 2)
    pieces: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], Fraction] = {}
    for term in averaged.terms:
        sig = extract_signature(term)
        if sig.channel != channel:
            continue
        key = (sig.b0_exponents, sig.modular_shifts)
        pieces[key] = pieces.get(key, Fraction(0)) + sig.prefactor / 2
    return tuple(sorted(
        (exps, coeff, shifts)
        for (exps, shifts), coeff in pieces.items()
        if coeff
    ))
