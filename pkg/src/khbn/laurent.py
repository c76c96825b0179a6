"""Exact Laurent polynomials in one variable q with integer coefficients."""

from __future__ import annotations

from typing import Dict, Iterable, Tuple

__all__ = ["Laurent", "ZERO", "ONE", "Q", "QINV"]


class Laurent:
    """Immutable Laurent polynomial, stored as {exponent: nonzero int}."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Dict[int, int] | Iterable[Tuple[int, int]] = ()):
        d: Dict[int, int] = {}
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        for e, c in items:
            c = d.get(e, 0) + c
            if c:
                d[e] = c
            elif e in d:
                del d[e]
        self.coeffs = d

    @staticmethod
    def term(coeff: int, exp: int) -> "Laurent":
        return Laurent({exp: coeff} if coeff else {})

    def __add__(self, other: "Laurent") -> "Laurent":
        d = dict(self.coeffs)
        for e, c in other.coeffs.items():
            c = d.get(e, 0) + c
            if c:
                d[e] = c
            else:
                del d[e]
        return Laurent(d)

    def __sub__(self, other: "Laurent") -> "Laurent":
        return self + other.scale(-1)

    def __mul__(self, other: "Laurent") -> "Laurent":
        d: Dict[int, int] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                c = d.get(e, 0) + c1 * c2
                if c:
                    d[e] = c
                elif e in d:
                    del d[e]
        return Laurent(d)

    def __pow__(self, n: int) -> "Laurent":
        if n < 0:
            raise ValueError("negative power of a general Laurent polynomial")
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def scale(self, c: int) -> "Laurent":
        return Laurent({e: c0 * c for e, c0 in self.coeffs.items()}) if c else ZERO

    def shift(self, delta: int) -> "Laurent":
        """Multiply by q**delta."""
        return Laurent({e + delta: c for e, c in self.coeffs.items()})

    def substitute_inverse(self) -> "Laurent":
        """q -> q**-1."""
        return Laurent({-e: c for e, c in self.coeffs.items()})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Laurent) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.coeffs.items())))

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __repr__(self) -> str:
        return f"Laurent({self})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for e in sorted(self.coeffs, reverse=True):
            c = self.coeffs[e]
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                var = "q" if e == 1 else f"q^{e}"
                body = var if mag == 1 else f"{mag}*{var}"
            parts.append(("-" if c < 0 else "+", body))
        sign0, body0 = parts[0]
        text = ("-" if sign0 == "-" else "") + body0
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def to_pairs(self) -> list[list[int]]:
        """JSON-friendly [[exp, coeff], ...] sorted by exponent."""
        return [[e, self.coeffs[e]] for e in sorted(self.coeffs)]


ZERO = Laurent()
ONE = Laurent({0: 1})
Q = Laurent({1: 1})
QINV = Laurent({-1: 1})
