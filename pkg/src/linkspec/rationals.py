"""Helpers for exact rational I/O.

Areas, monotonicity parameters and the constants derived from them are kept
as `fractions.Fraction` throughout; floats only appear at quadrature
boundaries.  These helpers parse and format the "p/q" wire format used by
the JSON schemas and the CLI.
"""

from __future__ import annotations

from fractions import Fraction


def parse_fraction(text) -> Fraction:
    """Parse "p/q", "p" or a JSON number into an exact Fraction.

    Floats are rejected unless they are exactly representable small decimals
    (we never want 1/3 to silently arrive as 0.3333...).
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        frac = Fraction(text).limit_denominator(10**9)
        if float(frac) != text:
            raise ValueError(f"float {text!r} is not an exact rational; pass 'p/q'")
        return frac
    if isinstance(text, str):
        return Fraction(text.strip())
    raise TypeError(f"cannot interpret {text!r} as a rational")


def format_fraction(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"
