"""Root-system combinatorics for finite-type Cartan matrices.

Weights appear in two coordinate systems:

* ``root`` coordinates: coefficients on the simple roots (used for the
  positive root lattice Q+ and all enumerative work);
* ``fundamental`` coordinates: values on the simple coroots H_1..H_r
  (what a linear functional on the Cartan subalgebra naturally carries).

The two are related by the Cartan matrix: if ``n`` are root coordinates then
the fundamental coordinates are ``C n`` with ``C[i][j] = <alpha_j, H_i>``.

The invariant form on weights is normalized so the highest root has squared
length 2.
"""

from fractions import Fraction

from .errors import NotFiniteType, WildKZError
from .linalg import ZERO, determinant, fr, mat_inverse, mat_vec


def _symmetrizer(cartan):
    """Positive rationals d with d_i a_ij = d_j a_ji, or None if none exist."""
    n = len(cartan)
    d = [None] * n
    for start in range(n):
        if d[start] is not None:
            continue
        d[start] = Fraction(1)
        stack = [start]
        while stack:
            i = stack.pop()
            for j in range(n):
                if i == j or cartan[i][j] == 0:
                    continue
                if cartan[i][j] == 0 or cartan[j][i] == 0:
                    if cartan[i][j] != cartan[j][i]:
                        return None
                    continue
                want = d[i] * Fraction(cartan[i][j], cartan[j][i])
                if d[j] is None:
                    d[j] = want
                    stack.append(j)
                elif d[j] != want:
                    return None
    return d


def _check_cartan(cartan):
    n = len(cartan)
    for i, row in enumerate(cartan):
        if len(row) != n:
            raise NotFiniteType("Cartan matrix must be square")
        if row[i] != 2:
            raise NotFiniteType("diagonal entries must equal 2")
        for j, a in enumerate(row):
            if i != j and (a > 0 or a != int(a)):
                raise NotFiniteType("off-diagonal entries must be nonpositive integers")
            if i != j and (a == 0) != (cartan[j][i] == 0):
                raise NotFiniteType("zero pattern must be symmetric")
    d = _symmetrizer(cartan)
    if d is None:
        raise NotFiniteType("matrix is not symmetrizable")
    # finite type iff the symmetrized matrix is positive definite
    b = [[d[i] * fr(cartan[i][j]) for j in range(n)] for i in range(n)]
    for k in range(1, n + 1):
        if determinant([row[:k] for row in b[:k]]) <= 0:
            raise NotFiniteType("symmetrized Cartan matrix is not positive definite")
    return d


class RootSystem:
    """Positive roots, Cartan matrix and normalized invariant form.

    positive_roots are tuples of nonnegative integers (root coordinates),
    ordered by height then lexicographically.
    """

    def __init__(self, cartan_matrix):
        cartan = [[int(a) for a in row] for row in cartan_matrix]
        d = _check_cartan(cartan)
        self.rank = len(cartan)
        self.cartan_matrix = cartan
        self.simple_roots = [tuple(1 if j == i else 0 for j in range(self.rank))
                             for i in range(self.rank)]
        self.positive_roots = self._generate()
        self._root_index = {a: i for i, a in enumerate(self.positive_roots)}
        # unnormalized form on root coordinates: B[i][j] = d_i a_ij
        b = [[d[i] * fr(cartan[i][j]) for j in range(self.rank)] for i in range(self.rank)]
        theta = self.highest_root()
        norm2 = self._form_with(b, theta, theta)
        scale = Fraction(2) / norm2
        self.form_on_weights = [[scale * x for x in row] for row in b]
        self._cartan_inv = mat_inverse([[fr(a) for a in row] for row in cartan])

    def _generate(self):
        rank = self.rank
        cartan = self.cartan_matrix
        roots = set(self.simple_roots)
        frontier = set(self.simple_roots)
        guard = 0
        while frontier:
            guard += 1
            if guard > 10000:
                raise NotFiniteType("root generation did not terminate")
            new = set()
            for beta in frontier:
                for i in range(rank):
                    # <beta, H_i> = sum_j a_ij beta_j
                    pairing = sum(cartan[i][j] * beta[j] for j in range(rank))
                    down = 0
                    gamma = list(beta)
                    while True:
                        gamma[i] -= 1
                        if tuple(gamma) in roots:
                            down += 1
                        else:
                            break
                    # alpha_i-string through beta: beta+alpha_i is a root
                    # iff down - pairing > 0
                    if down - pairing > 0:
                        up = list(beta)
                        up[i] += 1
                        t = tuple(up)
                        if t not in roots:
                            new.add(t)
            roots |= new
            frontier = new
        ordered = sorted(roots, key=lambda a: (sum(a), a))
        return ordered

    def height(self, nu):
        return sum(nu)

    def highest_root(self):
        return self.positive_roots[-1]

    def root_index(self, alpha):
        return self._root_index[alpha]

    # --- coordinate conversions -------------------------------------------------

    def root_to_fundamental(self, nu):
        """<nu, H_i> for a weight given in root coordinates."""
        c = self.cartan_matrix
        return tuple(sum(fr(c[i][j]) * fr(nu[j]) for j in range(self.rank))
                     for i in range(self.rank))

    def fundamental_to_root(self, v):
        return tuple(mat_vec(self._cartan_inv, [fr(x) for x in v]))

    def coerce_root_coords(self, coords, basis):
        if basis == "root":
            return tuple(fr(x) for x in coords)
        if basis == "fundamental":
            return self.fundamental_to_root(coords)
        raise WildKZError(f"unknown weight basis {basis!r}")

    # --- invariant form ----------------------------------------------------------

    @staticmethod
    def _form_with(b, mu, nu):
        s = ZERO
        for i, x in enumerate(mu):
            if x:
                for j, y in enumerate(nu):
                    if y and b[i][j]:
                        s += fr(x) * b[i][j] * fr(y)
        return s

    def weight_form(self, mu, nu, basis="root", basis_nu=None):
        """(mu | nu) under the minimal-form duality.

        Both weights must come with declared coordinates; mixing declarations
        without saying so is rejected.
        """
        if basis_nu is None:
            basis_nu = basis
        if basis not in ("root", "fundamental") or basis_nu not in ("root", "fundamental"):
            raise WildKZError("weight coordinates must be declared 'root' or 'fundamental'")
        m = self.coerce_root_coords(mu, basis)
        n = self.coerce_root_coords(nu, basis_nu)
        return self._form_with(self.form_on_weights, m, n)

    def rho_root_coords(self):
        half = Fraction(1, 2)
        acc = [ZERO] * self.rank
        for a in self.positive_roots:
            for i, c in enumerate(a):
                acc[i] += half * c
        return tuple(acc)


def generate_positive_roots(cartan_matrix):
    """Closed set of positive roots of a finite-type Cartan matrix.

    Deterministic order: by height, then lexicographic in simple-root
    coordinates.  Non-finite-type input raises NotFiniteType.
    """
    return RootSystem(cartan_matrix)


def cartan_matrix_a(rank):
    return [[2 if i == j else (-1 if abs(i - j) == 1 else 0) for j in range(rank)]
            for i in range(rank)]
