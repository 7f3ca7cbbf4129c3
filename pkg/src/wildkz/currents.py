"""Exact arithmetic in truncated currents g[z]/z^p and bounded Laurent slices.

A :class:`CurrentTensor` stores an element of the k-th tensor power of the
loop algebra sparsely: keys are k-tuples of (basis_index, z_degree), values
are rational coefficients.  The degree window is explicit data; operations
producing out-of-window degrees must either truncate (mode 'truncate', the
g_p quotient) or widen (mode 'widen', bounded Laurent slices).  Arity-1
tensors may carry a coefficient of the central element K, kept symbolic until
a module action evaluates it at the level.
"""

from fractions import Fraction

from .errors import WildKZError
from .linalg import ZERO, fr

TRUNCATE, WIDEN = "truncate", "widen"


class CurrentTensor:
    def __init__(self, arity, terms=None, window=(0, 0), central=ZERO):
        self.arity = arity
        self.window = (int(window[0]), int(window[1]))
        self.central = fr(central)
        self.terms = {}
        if terms:
            for key, c in terms.items():
                self._check_key(key)
                c = fr(c)
                if c:
                    self.terms[key] = c

    def _check_key(self, key):
        if len(key) != self.arity:
            raise WildKZError("term arity mismatch")
        lo, hi = self.window
        for _, deg in key:
            if deg < lo or deg > hi:
                raise WildKZError(f"degree {deg} outside window [{lo},{hi}]")

    def copy(self):
        return CurrentTensor(self.arity, dict(self.terms), self.window, self.central)

    def add_term(self, key, coeff):
        c = self.terms.get(key, ZERO) + coeff
        if c:
            self.terms[key] = c
        else:
            self.terms.pop(key, None)

    def __add__(self, other):
        if self.arity != other.arity:
            raise WildKZError("arity mismatch")
        lo = min(self.window[0], other.window[0])
        hi = max(self.window[1], other.window[1])
        out = CurrentTensor(self.arity, dict(self.terms), (lo, hi), self.central + other.central)
        for key, c in other.terms.items():
            out.add_term(key, c)
        return out

    def __sub__(self, other):
        return self + other.scale(Fraction(-1))

    def scale(self, c):
        c = fr(c)
        return CurrentTensor(self.arity,
                             {k: c * v for k, v in self.terms.items()},
                             self.window, c * self.central)

    def swap(self):
        """Exchange the two factors of an arity-2 tensor."""
        if self.arity != 2:
            raise WildKZError("swap needs arity 2")
        return CurrentTensor(2, {(k[1], k[0]): v for k, v in self.terms.items()},
                             self.window)

    def is_zero(self):
        return not self.terms and self.central == 0

    def __eq__(self, other):
        return (isinstance(other, CurrentTensor) and self.arity == other.arity
                and self.terms == other.terms and self.central == other.central)

    def __repr__(self):
        n = len(self.terms)
        return f"CurrentTensor(arity={self.arity}, {n} terms, window={self.window})"


def element(pairs, window=None, central=ZERO):
    """Arity-1 tensor from [(basis_index, degree, coeff), ...]."""
    degs = [d for _, d, _ in pairs] or [0]
    if window is None:
        window = (min(degs + [0]), max(degs + [0]))
    return CurrentTensor(1, {((i, d),): fr(c) for i, d, c in pairs}, window, central)


def truncated_bracket(algebra, x, y, p):
    """[X z^a, Y z^b] = [X,Y] z^{a+b} in g[z]/z^p; degrees >= p are discarded."""
    _require_arity1(x)
    _require_arity1(y)
    out = CurrentTensor(1, {}, (0, p - 1))
    for ((i, a),), cx in x.terms.items():
        for ((j, b),), cy in y.terms.items():
            d = a + b
            if d >= p:
                continue
            for k, c in algebra.bracket_indices(i, j).items():
                out.add_term(((k, d),), cx * cy * c)
    return out


def affine_bracket(algebra, x, y):
    """Bracket in the affine Lie algebra on bounded Laurent elements.

    [X z^a, Y z^b] = [X,Y] z^{a+b} + a (X|Y) delta_{a+b,0} K.  The central
    coefficient stays symbolic on the result.
    """
    _require_arity1(x)
    _require_arity1(y)
    lo = x.window[0] + y.window[0]
    hi = x.window[1] + y.window[1]
    out = CurrentTensor(1, {}, (min(lo, 0), max(hi, 0)))
    central = ZERO
    for ((i, a),), cx in x.terms.items():
        for ((j, b),), cy in y.terms.items():
            d = a + b
            for k, c in algebra.bracket_indices(i, j).items():
                out.add_term(((k, d),), cx * cy * c)
            if d == 0 and a != 0 and algebra.form_gram[i][j]:
                central += cx * cy * a * algebra.form_gram[i][j]
    out.central = central
    return out


def cocycle(algebra, x, y):
    """The affine 2-cocycle c(x, y) = (X|Y) Res(g df) on arity-1 tensors."""
    s = ZERO
    for ((i, a),), cx in x.terms.items():
        for ((j, b),), cy in y.terms.items():
            if a + b == 0 and algebra.form_gram[i][j]:
                s += cx * cy * a * algebra.form_gram[i][j]
    return s


def omega_ml(algebra, m, l):
    """The quadratic tensor sum_k X_k z^m (x) X^k z^l."""
    lo, hi = min(m, l, 0), max(m, l, 0)
    out = CurrentTensor(2, {}, (lo, hi))
    for k, dual in algebra.dual_pairs():
        for j, c in dual.items():
            out.add_term(((k, m), (j, l)), c)
    return out


def casimir_tensor(algebra):
    """The quadratic tensor at degrees (0, 0)."""
    return omega_ml(algebra, 0, 0)


class SlotEmbedding:
    """Placement of a 2-factor tensor into n tensor slots.

    i == j is flagged as a product in a single slot: the two factors multiply
    there (second factor applied first).
    """

    def __init__(self, i, j, n):
        if not (1 <= i <= n and 1 <= j <= n):
            raise WildKZError("slot out of range")
        self.source_arity = 2
        self.target_arity = n
        self.i, self.j, self.n = i, j, n

    @property
    def product_in_slot(self):
        return self.i == self.j


def embed(tensor, emb):
    """Symbolic n-slot operator for an arity-2 tensor placed in two slots.

    Returns a list of (coeff, ((slot, (basis_index, degree)), ...)) with
    factors in application order: the rightmost factor acts first, matching
    operator composition.
    """
    if tensor.arity != 2:
        raise WildKZError("embed needs an arity-2 tensor")
    if emb.source_arity != 2:
        raise WildKZError("embedding source arity must be 2")
    out = []
    for ((ka, da), (kb, db)), c in sorted(tensor.terms.items()):
        out.append((c, ((emb.i, (ka, da)), (emb.j, (kb, db)))))
    return out


def _require_arity1(x):
    if x.arity != 1:
        raise WildKZError("expected an arity-1 tensor")
