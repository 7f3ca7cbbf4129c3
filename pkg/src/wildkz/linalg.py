"""Exact linear algebra over the rationals.

Vectors are lists of Fraction, matrices are lists of row vectors.  Sizes stay
in the low hundreds, so plain Gaussian elimination with exact arithmetic is
fast enough; Fraction normalizes gcds on every operation, which keeps entry
growth under control.
"""

from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def fr(x) -> Fraction:
    """Coerce ints / strings like '3/4' to Fraction."""
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


class Echelon:
    """Row echelon form of a list of vectors, kept incrementally.

    Rows are stored reduced (each pivot is 1 and is the only nonzero entry of
    its column among stored rows), so membership tests are a single sweep.
    """

    def __init__(self, dim):
        self.dim = dim
        self.rows = []      # reduced rows
        self.pivots = []    # pivot column of each row, strictly increasing order not enforced

    @property
    def rank(self):
        return len(self.rows)

    def reduce(self, vec):
        """Return vec reduced modulo the current row span (fresh list)."""
        v = list(vec)
        for row, piv in zip(self.rows, self.pivots):
            c = v[piv]
            if c:
                for j, rj in enumerate(row):
                    if rj:
                        v[j] -= c * rj
        return v

    def add(self, vec):
        """Insert vec into the span; return True if the rank grew."""
        v = self.reduce(vec)
        piv = next((j for j, c in enumerate(v) if c), None)
        if piv is None:
            return False
        inv = ONE / v[piv]
        v = [c * inv for c in v]
        # back-substitute into existing rows
        for row in self.rows:
            c = row[piv]
            if c:
                for j, vj in enumerate(v):
                    if vj:
                        row[j] -= c * vj
        self.rows.append(v)
        self.pivots.append(piv)
        return True

    def contains(self, vec):
        return all(c == 0 for c in self.reduce(vec))


def rank(vectors, dim):
    ech = Echelon(dim)
    for v in vectors:
        ech.add(v)
    return ech.rank


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    out = [[ZERO] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for t in range(k):
            c = ai[t]
            if c:
                bt = b[t]
                for j in range(m):
                    if bt[j]:
                        oi[j] += c * bt[j]
    return out


def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_vec(a, v):
    out = []
    for row in a:
        s = ZERO
        for c, x in zip(row, v):
            if c and x:
                s += c * x
        out.append(s)
    return out


def identity(n):
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def is_zero_matrix(a):
    return all(all(c == 0 for c in row) for row in a)


def mat_inverse(a):
    """Inverse of a square rational matrix (raises ZeroDivisionError if singular)."""
    n = len(a)
    aug = [list(row) + ident_row for row, ident_row in zip(a, identity(n))]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = ONE / aug[col][col]
        aug[col] = [c * inv for c in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                c = aug[r][col]
                aug[r] = [x - c * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def determinant(a):
    """Exact determinant by fraction-free style elimination on a copy."""
    n = len(a)
    m = [list(row) for row in a]
    det = ONE
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return ZERO
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = ONE / m[col][col]
        for r in range(col + 1, n):
            if m[r][col]:
                c = m[r][col] * inv
                m[r] = [x - c * y for x, y in zip(m[r], m[col])]
    return det


class Quotient:
    """Quotient of Q^dim by the span of a list of relation vectors.

    Exposes projection onto quotient coordinates (the non-pivot ambient
    coordinates) and a section sending quotient coordinates back to ambient
    representatives; projection . section = identity.
    """

    def __init__(self, dim, relations):
        self.dim = dim
        self.ech = Echelon(dim)
        for r in relations:
            self.ech.add(r)
        pivset = set(self.ech.pivots)
        self.free = [j for j in range(dim) if j not in pivset]
        self.quotient_dim = len(self.free)

    @property
    def rank(self):
        return self.ech.rank

    def project(self, vec):
        red = self.ech.reduce(vec)
        return [red[j] for j in self.free]

    def section(self, qvec):
        v = [ZERO] * self.dim
        for j, c in zip(self.free, qvec):
            v[j] = c
        return v

    def contains(self, vec):
        return self.ech.contains(vec)

    def reduce_matrix(self, mat, check_invariant=True):
        """Matrix induced on the quotient by an ambient operator (rows act on columns).

        If check_invariant, verifies the operator maps the relation span into
        itself and raises ValueError otherwise (callers wrap the error type).
        """
        if check_invariant:
            for row in self.ech.rows:
                if not self.ech.contains(mat_vec(mat, row)):
                    raise ValueError("operator does not preserve relation span")
        cols = []
        for q in range(self.quotient_dim):
            e = [ZERO] * self.quotient_dim
            e[q] = ONE
            cols.append(self.project(mat_vec(mat, self.section(e))))
        # cols[q] is the image of the q-th quotient basis vector
        return [[cols[q][r] for q in range(self.quotient_dim)]
                for r in range(self.quotient_dim)]
