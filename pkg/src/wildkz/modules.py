"""Singular highest-weight modules over truncated currents, realized exactly.

A depth-p module is generated by a cyclic vector w subject to

    (n+ part) X z^i w = 0,   H z^i w = <a_i, H z^i> w,   z^p g[[z]] w = 0,

with a_0 the tame part and a_1..a_{p-1} the wild part of the character.  The
PBW basis consists of ordered monomials in the lowering generators F_a z^i
(0 <= i < p) applied to w; a bounded Laurent slice additionally allows
factors of any basis element at negative degrees, up to a total
negative-degree budget.

Canonical monomial order: factors sorted by (z-degree ascending, basis index
ascending).  Straightening rewrites any generator application into this
order through the (affine) commutation relations; the recursion terminates
because every swap either shortens the monomial or moves the new factor
strictly closer to its slot.
"""

from fractions import Fraction

from .algebra import E_KIND, F_KIND, H_KIND
from .errors import CriticalLevel, TruncationExceeded, WildKZError
from .linalg import ZERO, fr


class SingularCharacter:
    """Depth, tame part, wild part and level of a singular module.

    lam and each wild[i] are tuples of values on the simple coroots
    H_1, ..., H_r (the i-th wild entry is a functional on h z^{i+1}).
    """

    def __init__(self, p, lam, wild=(), kappa=None):
        self.p = int(p)
        if self.p < 1:
            raise WildKZError("depth must be >= 1")
        self.lam = tuple(fr(c) for c in lam)
        self.wild = tuple(tuple(fr(c) for c in a) for a in wild)
        if len(self.wild) != self.p - 1:
            raise WildKZError(f"depth {self.p} needs {self.p - 1} wild coefficients")
        self.kappa = None if kappa is None else fr(kappa)

    def a(self, i):
        """The degree-i component a_i of the character (a_0 is the tame part)."""
        if i == 0:
            return self.lam
        return self.wild[i - 1]

    def require_noncritical(self, algebra):
        if self.kappa is None:
            raise CriticalLevel("no level set on character")
        if self.kappa == -algebra.dual_coxeter:
            raise CriticalLevel(f"level {self.kappa} is critical for {algebra.name}")
        return self.kappa

    def __repr__(self):
        return f"SingularCharacter(p={self.p}, lam={self.lam}, wild={self.wild}, kappa={self.kappa})"


class ModuleSlice:
    """Height- and degree-truncated realization of a singular module.

    basis holds canonical monomials (tuples of (degree, basis_index) factors,
    leftmost factor applied last); nu[i] gives the lowering of basis vector i
    in root coordinates.  neg_budget = 0 realizes the finite module; a
    positive budget realizes the bounded Laurent slice with factors of total
    negative degree up to the budget.
    """

    def __init__(self, algebra, character, height, neg_budget=0):
        self.algebra = algebra
        self.character = character
        self.p = character.p
        self.height = int(height)
        self.neg_budget = int(neg_budget)
        self._apply_cache = {}
        self._matrix_cache = {}
        self._enumerate_basis()

    # --- basis -------------------------------------------------------------------

    def _finite_generators(self):
        alg = self.algebra
        return [(d, i) for d in range(self.p) for i in range(alg.n_pos)]

    def _negative_generators(self):
        alg = self.algebra
        return [(d, i) for d in range(-self.neg_budget, 0) for i in range(alg.dim)]

    def _enumerate_basis(self):
        alg = self.algebra
        heights = [sum(a) for a in alg.root_system.positive_roots]

        fin = []

        def fin_search(gen_pos, budget, acc):
            fin.append(tuple(acc))
            gens = self._finite_generators()
            for g in range(gen_pos, len(gens)):
                d, i = gens[g]
                if heights[i] <= budget:
                    fin_search(g, budget - heights[i], acc + [gens[g]])

        fin_search(0, self.height, [])

        neg = [()]
        if self.neg_budget > 0:
            neg = []

            def neg_search(gen_pos, budget, acc):
                neg.append(tuple(acc))
                gens = self._negative_generators()
                for g in range(gen_pos, len(gens)):
                    d, i = gens[g]
                    if -d <= budget:
                        neg_search(g, budget + d, acc + [gens[g]])

            neg_search(0, self.neg_budget, [])

        monos = set()
        for nm in neg:
            for fm in fin:
                monos.add(tuple(sorted(nm + fm)))
        decorated = []
        for m in monos:
            decorated.append((self._nu_of(m), m))
        decorated.sort()
        self.basis = [m for _, m in decorated]
        self.nu = [nu for nu, _ in decorated]
        self.index = {m: i for i, m in enumerate(self.basis)}
        self.dim = len(self.basis)
        self._blocks = {}
        for i, nu in enumerate(self.nu):
            self._blocks.setdefault(nu, []).append(i)

    def _nu_of(self, mono):
        """Lowering of a monomial in root coordinates (F adds, E subtracts)."""
        alg = self.algebra
        acc = [0] * alg.rank
        for _, idx in mono:
            k = alg.kind(idx)
            if k == H_KIND:
                continue
            a = alg.root_of(idx)
            s = 1 if k == F_KIND else -1
            for t, c in enumerate(a):
                acc[t] += s * c
        return tuple(acc)

    def neg_degree(self, mono):
        return sum(-d for d, _ in mono if d < 0)

    def weight_decomposition(self):
        """Map lowering (root coordinates) -> basis indices, h-semisimply."""
        return dict(self._blocks)

    def weight_hvalues(self, i):
        """h-weight of basis vector i as values on the simple coroots."""
        alg = self.algebra
        shift = alg.root_system.root_to_fundamental(self.nu[i])
        return tuple(l - s for l, s in zip(self.character.lam, shift))

    def cyclic_index(self):
        return self.index[()]

    def monomial_label(self, mono):
        alg = self.algebra
        if not mono:
            return "w"
        parts = [f"{alg.basis_label(i)}z^{d}" if d else alg.basis_label(i)
                 for d, i in mono]
        return ".".join(parts) + ".w"

    # --- straightening -----------------------------------------------------------

    def _storable(self, gen):
        d, i = gen
        if d < 0:
            return self.neg_budget > 0
        return self.algebra.kind(i) == F_KIND and d < self.p

    def _bracket_gen(self, g1, g2):
        """[g1, g2] in the affine algebra: (graded terms, central scalar)."""
        d1, i1 = g1
        d2, i2 = g2
        d = d1 + d2
        terms = [((d, k), c) for k, c in self.algebra.bracket_indices(i1, i2).items()]
        central = ZERO
        if d == 0 and d1 != 0 and self.algebra.form_gram[i1][i2]:
            kappa = self.character.kappa
            if kappa is None:
                raise CriticalLevel("affine bracket on a module needs a level")
            central = fr(d1) * self.algebra.form_gram[i1][i2] * kappa
        return terms, central

    def apply_generator(self, gen, mono):
        """gen . (mono w) as a dict {canonical monomial: coefficient}.

        Results may involve monomials outside this slice; membership is the
        caller's concern (see act / generator_matrix).
        """
        key = (gen, mono)
        hit = self._apply_cache.get(key)
        if hit is not None:
            return hit
        d, i = gen
        alg = self.algebra
        out = {}
        if d >= self.p + self.neg_degree(mono):
            pass  # smoothness: z^{p + negdeg} kills the vector
        elif not mono:
            if d < 0:
                out = {((d, i),): Fraction(1)}
            else:
                k = alg.kind(i)
                if k == F_KIND:
                    if d < self.p:
                        out = {((d, i),): Fraction(1)}
                elif k == H_KIND:
                    val = self.character.a(d)[i - alg.n_pos]
                    if val:
                        out = {(): val}
                # E-type annihilates w
        else:
            head, tail = mono[0], mono[1:]
            if self._storable(gen) and gen <= head:
                out = {(gen,) + mono: Fraction(1)}
            else:
                out = {}
                for m2, c2 in self.apply_generator(gen, tail).items():
                    for m3, c3 in self.apply_generator(head, m2).items():
                        out[m3] = out.get(m3, ZERO) + c2 * c3
                terms, central = self._bracket_gen(gen, head)
                for g2, c2 in terms:
                    for m3, c3 in self.apply_generator(g2, tail).items():
                        out[m3] = out.get(m3, ZERO) + c2 * c3
                if central:
                    out[tail] = out.get(tail, ZERO) + central
                out = {m: c for m, c in out.items() if c}
        self._apply_cache[key] = out
        return out

    # --- actions on slice vectors --------------------------------------------------

    def generator_matrix(self, gen):
        """Sparse columns of gen on the slice: (cols, escaped flags).

        cols[c] maps row index -> coefficient for the in-slice part of
        gen . basis[c]; escaped[c] marks columns whose image leaves the slice.
        """
        hit = self._matrix_cache.get(gen)
        if hit is not None:
            return hit
        cols, escaped = [], []
        for mono in self.basis:
            img = self.apply_generator(gen, mono)
            col = {}
            esc = False
            for m, c in img.items():
                r = self.index.get(m)
                if r is None:
                    esc = True
                else:
                    col[r] = c
            cols.append(col)
            escaped.append(esc)
        self._matrix_cache[gen] = (cols, escaped)
        return cols, escaped

    def act(self, x, vec):
        """Apply an arity-1 current (or a bare (degree, index) pair) to a vector.

        vec is a dict {basis index: coefficient}.  Raises TruncationExceeded
        when the image of a populated basis vector leaves the slice.
        """
        from .currents import CurrentTensor
        if isinstance(x, tuple):
            central = ZERO
            items = [(x, Fraction(1))]
        elif isinstance(x, CurrentTensor):
            if x.arity != 1:
                raise WildKZError("module action needs an arity-1 current")
            items = [((d, i), c) for ((i, d),), c in x.terms.items()]
            central = x.central
        else:
            raise WildKZError(f"cannot act by {type(x).__name__}")
        out = {}
        for gen, coeff in items:
            cols, escaped = self.generator_matrix(gen)
            for c, vc in vec.items():
                if not vc:
                    continue
                if escaped[c]:
                    raise TruncationExceeded(
                        f"{gen} applied to {self.monomial_label(self.basis[c])} "
                        f"leaves the realized slice")
                for r, m in cols[c].items():
                    out[r] = out.get(r, ZERO) + coeff * vc * m
        if central:
            kappa = self.character.kappa
            if kappa is None:
                raise CriticalLevel("central action needs a level")
            for c, vc in vec.items():
                out[c] = out.get(c, ZERO) + central * kappa * vc
        return {r: c for r, c in out.items() if c}

    def coefficient_on(self, vec, mono):
        idx = self.index.get(mono)
        return vec.get(idx, ZERO) if idx is not None else ZERO


class DualModuleSlice:
    """Restricted dual of a module slice with the action twisted by theta.

    Basis functionals are dual to the primal basis monomials.  The action is
    <X psi, v> = <psi, theta(X) v>; a column is exact whenever no unrealized
    primal monomial can pair into it, which is a pure weight-height check.
    """

    def __init__(self, base, theta):
        if theta not in ("dual", "contragredient"):
            raise WildKZError("theta must be 'dual' or 'contragredient'")
        self.base = base
        self.theta = theta
        self.algebra = base.algebra
        self.character = base.character
        self.p = base.p
        self.basis = base.basis
        self.index = base.index
        self.nu = base.nu
        self.dim = base.dim
        self._matrix_cache = {}

    def theta_gen(self, gen):
        d, i = gen
        j, sign = self.algebra.theta_image(self.theta, i)
        return (d, j), sign

    def dual_cyclic_index(self):
        return self.base.cyclic_index()

    def weight_hvalues(self, i):
        w = self.base.weight_hvalues(i)
        if self.theta == "dual":
            return tuple(-c for c in w)
        return w

    def generator_matrix(self, gen):
        hit = self._matrix_cache.get(gen)
        if hit is not None:
            return hit
        tgen, sign = self.theta_gen(gen)
        pcols, _ = self.base.generator_matrix(tgen)
        cols = [dict() for _ in range(self.dim)]
        for c, col in enumerate(pcols):
            for r, m in col.items():
                cols[r][c] = sign * m
        # column r is lossy iff an unrealized monomial at nu_r - shift(theta(X))
        # could pair into the r-th functional
        alg = self.algebra
        shift = alg.weight_shift(tgen[1])
        escaped = []
        for r in range(self.dim):
            src = tuple(n + s for n, s in zip(self.nu[r], shift))
            esc = (min(src) >= 0
                   and sum(src) > self.base.height)
            escaped.append(esc)
        self._matrix_cache[gen] = (cols, escaped)
        return cols, escaped

    def act(self, gen, vec):
        cols, escaped = self.generator_matrix(gen)
        out = {}
        for c, vc in vec.items():
            if not vc:
                continue
            if escaped[c]:
                raise TruncationExceeded("dual action leaves the realized slice")
            for r, m in cols[c].items():
                out[r] = out.get(r, ZERO) + vc * m
        return {r: c for r, c in out.items() if c}


def build_finite_module(algebra, character, height):
    """Finite singular module truncated at the given root height."""
    return ModuleSlice(algebra, character, height, neg_budget=0)


def build_affine_slice(algebra, character, height, neg_budget):
    """Bounded Laurent slice: finite part plus negative degrees up to the budget."""
    return ModuleSlice(algebra, character, height, neg_budget=neg_budget)


def build_dual_module(slice_, theta):
    return DualModuleSlice(slice_, theta)


# --- Shapovalov pairing and the cyclic-generation obstruction ---------------------


def shapovalov_pairing(slice_):
    """Per-weight Gram matrices of the contragredient pairing.

    S(u, v) = <Phi(u), v> where Phi matches the cyclic vector with its dual;
    computed by transposing factors of u through the contragredient twist.
    Returns {nu: matrix} with rows/cols ordered like the weight block.
    """
    blocks = slice_.weight_decomposition()
    out = {}
    for nu, idxs in sorted(blocks.items()):
        mat = []
        for r in idxs:
            row = []
            for c in idxs:
                row.append(_pair(slice_, slice_.basis[r], {c: Fraction(1)}))
            mat.append(row)
        out[nu] = mat
    return out


def _pair(slice_, mono, vec):
    alg = slice_.algebra
    for d, i in mono:
        j, sign = alg.theta_image("contragredient", i)
        vec = slice_.act((d, j), vec)
        if sign != 1:
            vec = {r: sign * c for r, c in vec.items()}
        if not vec:
            return ZERO
    return slice_.coefficient_on(vec, ())


def obstruction_matrix(slice_, alpha_idx, mono=()):
    """The p x p matrix M_jk = <psi_hat, E_a z^j E_{-a} z^k w_hat>.

    psi_hat is the dual functional of the basis monomial w_hat (default: the
    cyclic vector); nondegeneracy of M is exactly solvability of the dual
    recursion extending psi past w_hat in the direction of the root.
    """
    alg = slice_.algebra
    p = slice_.p
    e = alg.e_index(alg.root_system.positive_roots[alpha_idx])
    f = alg.f_index(alg.root_system.positive_roots[alpha_idx])
    if mono not in slice_.index:
        raise WildKZError("base monomial not in slice")
    base = {slice_.index[mono]: Fraction(1)}
    mat = []
    for j in range(p):
        row = []
        for k in range(p):
            v = slice_.act((k, f), base)
            v = slice_.act((j, e), v)
            row.append(slice_.coefficient_on(v, mono))
        mat.append(row)
    return mat


def obstruction_determinant(slice_, alpha_idx, mono=()):
    from .linalg import determinant
    return determinant(obstruction_matrix(slice_, alpha_idx, mono))
