"""Lossless JSON round-trips for the exact data the CLI reads and writes.

Rationals travel as "p/q" strings, complex numbers as [re, im] float pairs.
"""

from fractions import Fraction

from .errors import SchemaError


def frac_to_str(x):
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)


def parse_frac(x):
    if isinstance(x, bool):
        raise SchemaError(f"expected a rational, got {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as e:
            raise SchemaError(f"bad rational {x!r}: {e}") from None
    raise SchemaError(f"expected a rational 'p/q' string or integer, got {x!r}")


def parse_time(x):
    """A marked-point time: rational string/int, or [re, im] floats."""
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise SchemaError("complex time needs [re, im]")
        return complex(float(x[0]), float(x[1]))
    return parse_frac(x)


def time_to_json(t):
    if isinstance(t, complex):
        return [t.real, t.imag]
    return frac_to_str(t)


def complex_to_json(z):
    z = complex(z)
    return [z.real, z.imag]


def parse_complex(x):
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, str):
        return complex(float(Fraction(x)))
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    raise SchemaError(f"expected a complex [re, im], got {x!r}")


def vector_to_json(vec):
    """Sparse exact vector {index: Fraction} -> sorted list of pairs."""
    return [[i, frac_to_str(c)] for i, c in sorted(vec.items())]


def matrix_to_json(mat):
    """Dense exact matrix -> sparse [row, col, 'p/q'] triples."""
    out = []
    for r, row in enumerate(mat):
        for c, v in enumerate(row):
            if v:
                out.append([r, c, frac_to_str(v)])
    return out


def tensor_to_json(tensor):
    """CurrentTensor -> list of {factors: [[basis_index, degree], ...], coeff}."""
    out = []
    for key, c in sorted(tensor.terms.items()):
        out.append({"factors": [[i, d] for i, d in key], "coeff": frac_to_str(c)})
    return out


def element_to_json(vec):
    """Sparse algebra element {basis_index: Fraction} -> [[index, 'p/q'], ...]."""
    return [[i, frac_to_str(c)] for i, c in sorted(vec.items())]
