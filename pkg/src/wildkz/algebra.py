"""Simple Lie algebras in a fixed Cartan-Weyl basis with exact structure data.

Concrete structure constants are provided for type A only, realized by
elementary matrices of sl(n+1) with the trace form of the defining
representation (the minimal invariant form for type A).  All weight
combinatorics goes through :class:`wildkz.roots.RootSystem` and works for any
finite type.

Basis order (fixed once and for all, PBW normal forms depend on it):

    F_{a_1} .. F_{a_s}, H_{t_1} .. H_{t_r}, E_{a_1} .. E_{a_s}

with the positive roots a_1..a_s ordered by height then lexicographically.
"""

from fractions import Fraction

from .errors import WildKZError
from .linalg import ZERO, fr, mat_inverse
from .roots import RootSystem, cartan_matrix_a

F_KIND, H_KIND, E_KIND = "F", "H", "E"


class LieAlgebra:
    """A simple Lie algebra with exact rational structure constants.

    Elements are sparse dicts {basis_index: Fraction}.  The bracket table
    maps an index pair to such a dict.
    """

    def __init__(self, root_system, basis_matrices, name):
        self.name = name
        self.root_system = root_system
        self.rank = root_system.rank
        self.n_pos = len(root_system.positive_roots)
        self.dim = 2 * self.n_pos + self.rank
        self._matrices = basis_matrices
        self._brackets = {}
        self._build_structure()
        self.rho = root_system.rho_root_coords()
        self.dual_coxeter = self._compute_dual_coxeter()

    # --- basis bookkeeping -------------------------------------------------------

    def kind(self, idx):
        if idx < self.n_pos:
            return F_KIND
        if idx < self.n_pos + self.rank:
            return H_KIND
        return E_KIND

    def root_of(self, idx):
        """Positive root attached to an E- or F-basis element."""
        k = self.kind(idx)
        if k == F_KIND:
            return self.root_system.positive_roots[idx]
        if k == E_KIND:
            return self.root_system.positive_roots[idx - self.n_pos - self.rank]
        raise WildKZError("Cartan elements carry no root")

    def weight_shift(self, idx):
        """Root coordinates of the weight shift of ad(X_idx): +a for E, -a for F."""
        k = self.kind(idx)
        if k == H_KIND:
            return tuple([0] * self.rank)
        a = self.root_of(idx)
        return a if k == E_KIND else tuple(-c for c in a)

    def f_index(self, alpha):
        return self.root_system.root_index(alpha)

    def h_index(self, i):
        return self.n_pos + i

    def e_index(self, alpha):
        return self.n_pos + self.rank + self.root_system.root_index(alpha)

    def basis_label(self, idx):
        k = self.kind(idx)
        if k == H_KIND:
            return f"H{idx - self.n_pos + 1}"
        a = self.root_of(idx)
        return f"{k}[{','.join(str(c) for c in a)}]"

    # --- structure constants -----------------------------------------------------

    def _decompose(self, mat):
        """Express an exact traceless matrix in the Cartan-Weyl basis."""
        n = len(mat)
        out = {}
        for a in range(n):
            for b in range(n):
                if a == b or mat[a][b] == 0:
                    continue
                lo, hi = (a, b) if a < b else (b, a)
                root = tuple(1 if lo + 1 <= k + 1 <= hi else 0 for k in range(self.rank))
                idx = self.e_index(root) if a < b else self.f_index(root)
                out[idx] = out.get(idx, ZERO) + mat[a][b]
        # diagonal part on H_i = e_ii - e_{i+1,i+1}: coefficients are partial sums
        acc = ZERO
        for i in range(self.rank):
            acc += mat[i][i]
            if acc:
                out[self.h_index(i)] = acc
        return {k: v for k, v in out.items() if v}

    def _build_structure(self):
        mats = self._matrices
        n = len(mats[0])
        # trace form (X|Y) = tr(XY), computed exactly
        gram = []
        for a in mats:
            row = []
            for b in mats:
                s = ZERO
                for i in range(n):
                    for k in range(n):
                        if a[i][k] and b[k][i]:
                            s += a[i][k] * b[k][i]
                row.append(s)
            gram.append(row)
        self.form_gram = gram
        self.dual_basis_map = mat_inverse(gram)
        for i in range(self.dim):
            for j in range(self.dim):
                m = _commutator(mats[i], mats[j])
                dec = self._decompose(m)
                if dec:
                    self._brackets[(i, j)] = dec
        # coroots H_alpha = [E_alpha, F_alpha], stored as Cartan coordinates
        self.coroot_coords = []
        for a_idx, alpha in enumerate(self.root_system.positive_roots):
            dec = self._brackets.get((self.e_index(alpha), self.f_index(alpha)), {})
            coords = [ZERO] * self.rank
            for idx, c in dec.items():
                if self.kind(idx) != H_KIND:
                    raise WildKZError("sl2 triple failure")
                coords[idx - self.n_pos] = c
            self.coroot_coords.append(tuple(coords))

    def bracket_indices(self, i, j):
        """[X_i, X_j] as a sparse element dict."""
        return self._brackets.get((i, j), {})

    def bracket(self, x, y):
        """Bracket of two elements given as sparse dicts."""
        out = {}
        for i, ci in x.items():
            if not ci:
                continue
            for j, cj in y.items():
                if not cj:
                    continue
                for k, c in self.bracket_indices(i, j).items():
                    out[k] = out.get(k, ZERO) + ci * cj * c
        return {k: v for k, v in out.items() if v}

    def form(self, x, y):
        """(x | y) for sparse element dicts."""
        s = ZERO
        for i, ci in x.items():
            for j, cj in y.items():
                if self.form_gram[i][j]:
                    s += ci * cj * self.form_gram[i][j]
        return s

    def dual_element(self, k):
        """The form-dual X^k of the basis element X_k, as a sparse dict."""
        return {j: c for j, c in enumerate(self.dual_basis_map[k]) if c}

    def dual_pairs(self):
        """All (k, dual dict) pairs; sum_k X_k (x) X^k is the quadratic tensor."""
        return [(k, self.dual_element(k)) for k in range(self.dim)]

    # --- Cartan pairings -----------------------------------------------------------

    def pair_weight_with_coroot(self, hvalues, alpha_idx):
        """<mu, H_alpha> for mu given by values on the simple coroots."""
        coords = self.coroot_coords[alpha_idx]
        return sum(fr(v) * c for v, c in zip(hvalues, coords) if c)

    def cartan_dual_of(self, hvalues):
        """Element t in h with (t | H) = <mu, H>; Cartan coordinates, exact."""
        gram_h = [[self.form_gram[self.h_index(i)][self.h_index(j)]
                   for j in range(self.rank)] for i in range(self.rank)]
        inv = mat_inverse(gram_h)
        return tuple(sum(inv[i][j] * fr(hvalues[j]) for j in range(self.rank))
                     for i in range(self.rank))

    def weight_form(self, mu, nu, basis="root", basis_nu=None):
        return self.root_system.weight_form(mu, nu, basis=basis, basis_nu=basis_nu)

    def _compute_dual_coxeter(self):
        # ad_C X = 2 h^vee X on any basis element; use the first E-generator
        x = self.e_index(self.root_system.positive_roots[0])
        acc = {}
        for k, dual in self.dual_pairs():
            inner = self.bracket(dual, {x: Fraction(1)})
            outer = self.bracket({k: Fraction(1)}, inner)
            for idx, c in outer.items():
                acc[idx] = acc.get(idx, ZERO) + c
        acc = {k: v for k, v in acc.items() if v}
        if set(acc) != {x}:
            raise WildKZError("quadratic tensor is not ad-invariant")
        return acc[x] / 2

    def theta_image(self, theta, idx):
        """Image of a basis element under theta, as (index, sign).

        theta = 'dual' is -Id; 'contragredient' is the transposition swapping
        E_alpha and F_alpha and fixing the Cartan.
        """
        if theta == "dual":
            return idx, Fraction(-1)
        if theta == "contragredient":
            k = self.kind(idx)
            if k == H_KIND:
                return idx, Fraction(1)
            if k == F_KIND:
                return self.e_index(self.root_of(idx)), Fraction(1)
            return self.f_index(self.root_of(idx)), Fraction(1)
        raise WildKZError(f"unknown involution {theta!r}")


def _commutator(a, b):
    n = len(a)
    out = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            s = ZERO
            for k in range(n):
                if a[i][k] and b[k][j]:
                    s += a[i][k] * b[k][j]
                if b[i][k] and a[k][j]:
                    s -= b[i][k] * a[k][j]
            out[i][j] = s
    return out


def _unit(n, i, j):
    m = [[ZERO] * n for _ in range(n)]
    m[i][j] = Fraction(1)
    return m


def build_type_a(rank):
    """sl(rank+1) realized by elementary matrices, with the trace form.

    The root a_i + ... + a_j corresponds to e_i - e_{j+1}; its raising
    operator is the matrix unit E_{i,j+1} and the sl2 triple convention
    H_a = [E_a, F_a] holds on the nose.
    """
    if rank < 1:
        raise WildKZError("rank must be at least 1")
    rs = RootSystem(cartan_matrix_a(rank))
    n = rank + 1
    mats = []
    for alpha in rs.positive_roots:          # F part
        i = alpha.index(1)
        j = len(alpha) - 1 - alpha[::-1].index(1)
        mats.append(_unit(n, j + 1, i))
    for i in range(rank):                    # H part
        m = [[ZERO] * n for _ in range(n)]
        m[i][i] = Fraction(1)
        m[i + 1][i + 1] = Fraction(-1)
        mats.append(m)
    for alpha in rs.positive_roots:          # E part
        i = alpha.index(1)
        j = len(alpha) - 1 - alpha[::-1].index(1)
        mats.append(_unit(n, i, j + 1))
    return LieAlgebra(rs, mats, name=f"A{rank}")
