"""Polynomial displacement families and their text grammar.

A family is a list of real polynomials P_i(t) = sum_{n=e_i}^{d_i} a_n t^n
with zero constant term; e_i is the lowest vanishing order at 0 and d_i the
degree.  The family is relatively curved when the e_i are pairwise
distinct.  The text grammar accepts comma-separated polynomials in the
variable t with integer or rational coefficients, e.g. "t, t^2-2t^3" or
"1/2t^2, t^3".
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import FamilyParseError, PreconditionError

_TERM_RE = re.compile(r"^(?P<coef>\d+(?:/\d+)?)?(?:\*)?(?P<var>t(?:\^(?P<pow>\d+))?)?$")


@dataclass(frozen=True)
class Polynomial:
    """Polynomial with zero constant term, stored densely by power 1..degree."""

    coeffs: tuple[Fraction, ...]  # coeffs[i] multiplies t**(i+1)

    def __post_init__(self):
        coeffs = tuple(Fraction(c) for c in self.coeffs)
        while coeffs and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        if not coeffs:
            raise PreconditionError("poly-averages: the zero polynomial is not admissible")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "_floats", np.array([float(c) for c in coeffs]))

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    @property
    def lowest_order(self) -> int:
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return i + 1
        raise AssertionError("unreachable: zero polynomial rejected at construction")

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        acc = np.zeros(t.shape)
        for c in self._floats[::-1]:
            acc = acc * t + c
        out = acc * t
        return float(out) if out.ndim == 0 else out

    def ratio_to(self, other: "Polynomial") -> Fraction | None:
        """Exact constant r with self = r * other, or None."""
        if self.degree != other.degree:
            return None
        ratio = None
        for a, b in zip(self.coeffs, other.coeffs):
            if (a == 0) != (b == 0):
                return None
            if b != 0:
                r = a / b
                if ratio is None:
                    ratio = r
                elif r != ratio:
                    return None
        return ratio

    def __str__(self) -> str:
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            power = i + 1
            mag = abs(c)
            coef = "" if mag == 1 else f"{mag}"
            var = "t" if power == 1 else f"t^{power}"
            sign = "-" if c < 0 else ("+" if parts else "")
            parts.append(f"{sign}{coef}{var}")
        return "".join(parts)


@dataclass(frozen=True)
class PolynomialFamily:
    polys: tuple[Polynomial, ...]

    def __post_init__(self):
        polys = tuple(self.polys)
        if not polys:
            raise PreconditionError("poly-averages: a family needs at least one polynomial")
        object.__setattr__(self, "polys", polys)

    @property
    def m(self) -> int:
        return len(self.polys)

    @property
    def e(self) -> tuple[int, ...]:
        return tuple(p.lowest_order for p in self.polys)

    @property
    def d(self) -> tuple[int, ...]:
        return tuple(p.degree for p in self.polys)

    def relatively_curved(self) -> bool:
        orders = self.e
        return len(set(orders)) == len(orders)

    def drop(self, i: int) -> "PolynomialFamily":
        return PolynomialFamily(self.polys[:i] + self.polys[i + 1 :])

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        """Matrix P_i(t_q), shape (m, len(t))."""
        t = np.asarray(t, dtype=np.float64)
        return np.stack([p(t) for p in self.polys])

    def __str__(self) -> str:
        return ", ".join(str(p) for p in self.polys)

    @classmethod
    def parse(cls, text: str) -> "PolynomialFamily":
        return parse_family(text)


def parse_polynomial(text: str) -> Polynomial:
    compact = re.sub(r"\s+", "", text)
    if not compact:
        raise FamilyParseError("empty polynomial")
    chunks = re.findall(r"[+-]?[^+-]+", compact)
    if "".join(chunks) != compact:
        raise FamilyParseError(f"cannot tokenize polynomial {text!r}")
    powers: dict[int, Fraction] = {}
    for chunk in chunks:
        sign = Fraction(1)
        body = chunk
        if body and body[0] in "+-":
            sign = Fraction(-1) if body[0] == "-" else Fraction(1)
            body = body[1:]
        m = _TERM_RE.match(body)
        if not m or (m.group("coef") is None and m.group("var") is None):
            raise FamilyParseError(f"bad term {chunk!r} in polynomial {text!r}")
        coef_text = m.group("coef")
        coef = sign * (Fraction(coef_text) if coef_text else Fraction(1))
        if m.group("var") is None:
            if coef != 0:
                raise FamilyParseError(
                    f"constant term {chunk!r} not allowed: polynomials must vanish at 0"
                )
            continue
        power = int(m.group("pow") or 1)
        if power < 1:
            raise FamilyParseError(f"bad exponent in term {chunk!r}")
        powers[power] = powers.get(power, Fraction(0)) + coef
    if not powers or all(c == 0 for c in powers.values()):
        raise FamilyParseError(f"polynomial {text!r} is identically zero")
    degree = max(powers)
    coeffs = tuple(powers.get(p, Fraction(0)) for p in range(1, degree + 1))
    return Polynomial(coeffs)


def parse_family(text: str) -> PolynomialFamily:
    pieces = [p for p in text.split(",")]
    if any(not p.strip() for p in pieces):
        raise FamilyParseError(f"malformed family {text!r}: empty entry")
    return PolynomialFamily(tuple(parse_polynomial(p) for p in pieces))
