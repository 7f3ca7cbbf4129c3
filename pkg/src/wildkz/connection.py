"""Rational r-matrices and the universal depth-p connection.

The finite-distance coefficient is the g_p (x) g_p-valued rational function

    r_p(t) = sum_{m,l=0}^{p-1} (-1)^m C(m+l, l) t^{-1-m-l}  Omega_{ml},

the joint Taylor truncation of Omega / (t + w_i - w_j); at depth 1 it is
Omega / t.  The infinity coefficient

    s_p(t) = sum (m+l+1 <= p-1) C(m+l, l) t^l  Omega_{m, m+l+1}

truncates Omega w_j / (1 - w_j (t + w_i)).  The Hamiltonians

    H_i(t) = (kappa + h^vee)^{-1} [ sum_{j != i} r_p^{(ij)}(t_i - t_j)
                                    - s_p^{(i oo)}(t_i) ]

are the coinvariant reductions of the slot-wise Sugawara operator L_{-1}:
they reduce to the classical KZ form when every depth is 1, and the sign
split between the finite-distance and infinity terms is forced jointly by
that reduction and by flatness (checked exactly below; with the opposite
relative sign the curvature is nonzero once the depth at infinity
exceeds 2).
"""

from fractions import Fraction
from math import comb

from .blocks import BlockSpace
from .currents import CurrentTensor, omega_ml
from .errors import CoincidentTimes, CriticalLevel, WildKZError, ZeroTime
from .linalg import ZERO, fr, mat_mul, mat_sub


def r_coefficients(p, t):
    """{(m, l): coefficient of Omega_{ml} in r_p(t)}; exact for rational t."""
    t = fr(t)
    if t == 0:
        raise ZeroTime("r_p has a pole at t = 0")
    out = {}
    for m in range(p):
        for l in range(p):
            out[(m, l)] = Fraction((-1) ** m * comb(m + l, l)) / t ** (1 + m + l)
    return out


def s_coefficients(p, t):
    """{(m, n): coefficient of Omega_{mn} in s_p(t)} with n = m + l + 1 < p."""
    t = fr(t)
    out = {}
    for m in range(p):
        for l in range(p):
            n = m + l + 1
            if n <= p - 1:
                out[(m, n)] = Fraction(comb(m + l, l)) * t ** l
    return out


def r_matrix(algebra, p, t):
    out = CurrentTensor(2, {}, (0, p - 1))
    for (m, l), c in r_coefficients(p, t).items():
        for key, v in omega_ml(algebra, m, l).terms.items():
            out.add_term(key, c * v)
    return out


def s_matrix(algebra, p, t):
    out = CurrentTensor(2, {}, (0, p - 1))
    for (m, n), c in s_coefficients(p, t).items():
        for key, v in omega_ml(algebra, m, n).terms.items():
            out.add_term(key, c * v)
    return out


def skew_symmetry_residual(algebra, p, t):
    """r_p(t) + swap(r_p(-t)); identically zero."""
    return r_matrix(algebra, p, t) + r_matrix(algebra, p, -t).swap()


# --- classical Yang-Baxter equation -------------------------------------------------


def embedded_commutator(algebra, p, x, slots_x, y, slots_y, arity=3):
    """Commutator of two 2-slot embedded tensors sharing exactly one slot.

    Factors in distinct slots commute, so the bracket happens in the shared
    slot and the spectators ride along.  Returns an arity-`arity` tensor
    with the g_p truncation applied in the shared slot.
    """
    shared = set(slots_x) & set(slots_y)
    if len(shared) != 1:
        raise WildKZError("embedded commutator needs exactly one shared slot")
    s = shared.pop()
    out = CurrentTensor(arity, {}, (0, p - 1))
    sx = 0 if slots_x[0] == s else 1
    sy = 0 if slots_y[0] == s else 1
    ox_slot = slots_x[1 - sx]
    oy_slot = slots_y[1 - sy]
    for kx, cx in x.terms.items():
        fx_s, fx_o = kx[sx], kx[1 - sx]
        for ky, cy in y.terms.items():
            fy_s, fy_o = ky[sy], ky[1 - sy]
            d = fx_s[1] + fy_s[1]
            if d >= p:
                continue
            for kb, cb in algebra.bracket_indices(fx_s[0], fy_s[0]).items():
                key = [None] * arity
                key[s - 1] = (kb, d)
                key[ox_slot - 1] = fx_o
                key[oy_slot - 1] = fy_o
                if any(f is None for f in key):
                    raise WildKZError("slot assignment must cover all factors")
                out.add_term(tuple(key), cx * cy * cb)
    return out


def cybe_residual_from(algebra, p, r12, r13, r23):
    """CYBE left-hand side for given tensors in slots (1,2), (1,3), (2,3)."""
    acc = embedded_commutator(algebra, p, r12, (1, 2), r13, (1, 3))
    acc = acc + embedded_commutator(algebra, p, r13, (1, 3), r23, (2, 3))
    acc = acc + embedded_commutator(algebra, p, r12, (1, 2), r23, (2, 3))
    return acc


def cybe_residual(algebra, p, t1, t2, t3):
    """[r12, r13] + [r13, r23] + [r12, r23] at pairwise distinct times."""
    t1, t2, t3 = fr(t1), fr(t2), fr(t3)
    if len({t1, t2, t3}) != 3:
        raise CoincidentTimes("CYBE needs pairwise distinct times")
    r12 = r_matrix(algebra, p, t1 - t2)
    r13 = r_matrix(algebra, p, t1 - t3)
    r23 = r_matrix(algebra, p, t2 - t3)
    return cybe_residual_from(algebra, p, r12, r13, r23)


def cybe_sample_grid(p):
    """Deterministic (t1, t2, t3) samples exceeding the cleared degree bound.

    After clearing (t12 t13 t23)^(2p-1) the residual is polynomial in the
    two independent differences with per-variable degree below 3(2p); a full
    grid of side 6p+1 on (t12, t23) therefore certifies the identity.
    """
    side = 6 * p + 1
    pts = []
    for x in range(1, side + 1):
        for y in range(1, side + 1):
            pts.append((Fraction(0), Fraction(-x), Fraction(-x - y)))
    return pts


def g_equivariance_residual(algebra, m, l, x_idx, p=None):
    """sum_k [X_k, X] z^m (x) X^k z^l + X_k z^m (x) [X^k, X] z^l, as a tensor.

    Vanishes identically: this is the ad-invariance of the quadratic tensor
    transported to degrees (m, l), and is what makes the universal connection
    descend to g-coinvariants.
    """
    hi = max(m, l)
    if p is not None and (m >= p or l >= p):
        return CurrentTensor(2, {}, (0, max(p - 1, 0)))
    out = CurrentTensor(2, {}, (0, hi))
    for k, dual in algebra.dual_pairs():
        for j, cj in algebra.bracket_indices(k, x_idx).items():
            for d, cd in dual.items():
                out.add_term(((j, m), (d, l)), cj * cd)
        for d, cd in dual.items():
            for j, cj in algebra.bracket_indices(d, x_idx).items():
                out.add_term(((k, m), (j, l)), cd * cj)
    return out


def mixed_partial_residuals(p):
    """Exact residuals of d_i H'_j = d_j H'_i, coefficient by coefficient.

    The (m, l) coefficient of d_{t_j} r_p^{(ij)} must match the (l, m)
    coefficient of d_{t_i} r_p^{(ji)} after the slot swap; returns the list
    of nonzero differences (empty when the 1-form part of the curvature
    vanishes).
    """
    bad = []
    for m in range(p):
        for l in range(p):
            # d/dt_j [c_{ml} (t_i - t_j)^{-1-m-l}] = c_{ml} (1+m+l) t_ij^{-2-m-l}
            lhs = Fraction((-1) ** m * comb(m + l, l)) * (1 + m + l)
            # d/dt_i [c_{lm} (t_j - t_i)^{-1-m-l}] on Omega^{(ji)}_{lm} = Omega^{(ij)}_{ml}
            rhs = Fraction((-1) ** l * comb(m + l, m)) * (1 + m + l) * (-1) ** (m + l)
            if lhs != rhs:
                bad.append(((m, l), lhs - rhs))
    return bad


# --- Hamiltonians on tensor slices and blocks ----------------------------------------


class ConnectionContext:
    """Exact Hamiltonian matrices of a marked configuration on a chosen space.

    space is a TensorSlice over the finite slots (with the infinity-module
    slot last when the configuration carries one) or a BlockSpace over such
    a slice.  Matrices of the embedded quadratic tensors are cached; the
    time dependence enters only through scalar coefficients, so evaluation
    at new times is cheap.
    """

    def __init__(self, config, space):
        self.config = config
        self.space = space
        self.algebra = config.algebra
        if config.level is None:
            raise WildKZError("connection needs a level")
        kappa = config.level
        if kappa == -self.algebra.dual_coxeter:
            raise CriticalLevel("connection undefined at the critical level")
        self.prefactor = Fraction(1) / (kappa + self.algebra.dual_coxeter)
        self.n_finite = len(config.points)
        self.depths = config.depths
        ambient = space.ambient if isinstance(space, BlockSpace) else space
        self.has_infinity_slot = len(ambient.slots) == self.n_finite + 1
        self.r_infinity = (ambient.slots[-1].p if self.has_infinity_slot else 0)
        self._omega_cache = {}
        self._dyn_cache = {}

    def _ambient(self):
        return self.space.ambient if isinstance(self.space, BlockSpace) else self.space

    def _reduce(self, mat):
        if isinstance(self.space, BlockSpace):
            return self.space.reduce_operator(mat)
        return mat

    @property
    def dim(self):
        return self.space.dim

    def omega_matrix(self, i, j, m, l):
        """Matrix of Omega^{(ij)}_{ml} (slots 1-based) on the space."""
        key = (i, j, m, l)
        hit = self._omega_cache.get(key)
        if hit is not None:
            return hit
        ambient = self._ambient()
        terms = []
        for k, dual in self.algebra.dual_pairs():
            for d, cd in dual.items():
                terms.append((cd, ((i, (k, m)), (j, (d, l)))))
        cols = []
        for c in range(ambient.dim):
            img = ambient.apply_terms(terms, ambient.basis_state(c))
            cols.append(ambient.to_coords(img))
        mat = [[cols[c][r] for c in range(ambient.dim)] for r in range(ambient.dim)]
        mat = self._reduce(mat)
        self._omega_cache[key] = mat
        return mat

    def dynamical_matrix(self, i):
        """Matrix of the Cartan element dual to mu acting in slot i."""
        if self.config.mu is None:
            raise WildKZError("no dynamical coefficient mu configured")
        hit = self._dyn_cache.get(i)
        if hit is not None:
            return hit
        coords = self.algebra.cartan_dual_of(self.config.mu)
        ambient = self._ambient()
        terms = [(c, ((i, (self.algebra.h_index(k), 0)),))
                 for k, c in enumerate(coords) if c]
        cols = []
        for c in range(ambient.dim):
            img = ambient.apply_terms(terms, ambient.basis_state(c))
            cols.append(ambient.to_coords(img))
        mat = [[cols[c][r] for c in range(ambient.dim)] for r in range(ambient.dim)]
        mat = self._reduce(mat)
        self._dyn_cache[i] = mat
        return mat

    def _check_times(self, times):
        if times is None:
            times = [fr(t) for t in self.config.times()]
        else:
            times = [fr(t) for t in times]
        for a in range(len(times)):
            for b in range(a + 1, len(times)):
                if times[a] == times[b]:
                    raise CoincidentTimes(f"t_{a+1} = t_{b+1}")
        return times

    def hamiltonian(self, i, times=None):
        """Exact matrix of H_i at rational times (slots 1-based)."""
        times = self._check_times(times)
        n = self.dim
        acc = [[ZERO] * n for _ in range(n)]
        ti = times[i - 1]
        for j in range(1, self.n_finite + 1):
            if j == i:
                continue
            pair_p = max(self.depths[i - 1], self.depths[j - 1])
            coeffs = r_coefficients(pair_p, ti - times[j - 1])
            for (m, l), c in coeffs.items():
                if m >= self.depths[i - 1] or l >= self.depths[j - 1]:
                    continue  # smoothness kills the matrix
                mat = self.omega_matrix(i, j, m, l)
                _axpy(acc, c * self.prefactor, mat)
        if self.has_infinity_slot and self.r_infinity >= 2:
            pair_p = max(self.depths[i - 1], self.r_infinity)
            for (m, nn), c in s_coefficients(pair_p, ti).items():
                if m >= self.depths[i - 1] or nn >= self.r_infinity:
                    continue
                mat = self.omega_matrix(i, self.n_finite + 1, m, nn)
                _axpy(acc, -c * self.prefactor, mat)
        if self.config.infinity_mode == "dynamical":
            _axpy(acc, self.prefactor, self.dynamical_matrix(i))
        return acc

    def flatness_residual(self, i, j, times=None):
        """[H_i, H_j] as an exact matrix; zero by flatness."""
        if i == j:
            raise WildKZError("flatness residual needs i != j")
        hi = self.hamiltonian(i, times)
        hj = self.hamiltonian(j, times)
        return mat_sub(mat_mul(hi, hj), mat_mul(hj, hi))

    def dilation_operator(self, i, times=None):
        """Reduced Sugawara L_0 in slot i: the generator of dilations.

        sum_i L_0^{(i)} = 2 sum_i t_i H'_i exactly, so horizontal sections
        transported along t -> e^{2a} t + b match prod_i exp(a L_0^{(i)})
        on an all-tame block.
        """
        times = self._check_times(times)
        n = self.dim
        acc = [[ZERO] * n for _ in range(n)]
        ti = times[i - 1]
        for j in range(1, self.n_finite + 1):
            if j == i:
                continue
            tij = ti - times[j - 1]
            for m in range(self.depths[i - 1]):
                for l in range(self.depths[j - 1]):
                    c = Fraction((-1) ** m * comb(m + l, l)) / tij ** (m + l)
                    _axpy(acc, c * self.prefactor, self.omega_matrix(i, j, m, l))
        return acc

    def equivariance_residual_states(self, i, j, m, l, x_idx):
        """[Omega^{(ij)}_{ml}, sum_slots X^{(k)}] applied to every slice vector.

        The diagonal action moves between weight slices, so the commutator is
        evaluated on raw tensor states; the result must be the zero state for
        each starting basis vector.
        """
        ambient = self._ambient()
        terms = []
        for k, dual in self.algebra.dual_pairs():
            for d, cd in dual.items():
                terms.append((cd, ((i, (k, m)), (j, (d, l)))))
        gen = (0, x_idx)
        out = []
        for c in range(ambient.dim):
            state = ambient.basis_state(c)
            a = ambient.apply_terms(terms, ambient.diagonal_action(gen, state))
            b = ambient.diagonal_action(gen, ambient.apply_terms(terms, state))
            diff = dict(a)
            for k2, v in b.items():
                diff[k2] = diff.get(k2, ZERO) - v
            out.append({k2: v for k2, v in diff.items() if v})
        return out


def _axpy(acc, c, mat):
    if not c:
        return
    for r, row in enumerate(mat):
        ar = acc[r]
        for s, v in enumerate(row):
            if v:
                ar[s] += c * v


def hamiltonian_state(config, product, i, state):
    """H_i applied to a raw tensor state of a realized product (slots 1-based).

    Same formula as ConnectionContext.hamiltonian but evaluated on raw
    states, so it composes with the bounded Laurent realizations used by the
    residue identity check.
    """
    alg = config.algebra
    kappa = config.level
    if kappa == -alg.dual_coxeter:
        raise CriticalLevel("connection undefined at the critical level")
    pref = Fraction(1) / (kappa + alg.dual_coxeter)
    times = [fr(t) for t in config.times()]
    depths = config.depths
    n_finite = len(config.points)
    has_inf = len(product.slots) == n_finite + 1
    out = {}

    def add_omega(slot_a, slot_b, m, l, c):
        for k, dual in alg.dual_pairs():
            for d, cd in dual.items():
                cur = product.apply_slot_generator(slot_b - 1, (l, d), state)
                cur = product.apply_slot_generator(slot_a - 1, (m, k), cur)
                for key, v in cur.items():
                    out[key] = out.get(key, ZERO) + c * cd * v

    ti = times[i - 1]
    for j in range(1, n_finite + 1):
        if j == i:
            continue
        pair_p = max(depths[i - 1], depths[j - 1])
        for (m, l), c in r_coefficients(pair_p, ti - times[j - 1]).items():
            if m >= depths[i - 1] or l >= depths[j - 1]:
                continue
            add_omega(i, j, m, l, c * pref)
    if has_inf and product.slots[-1].p >= 2:
        r_inf = product.slots[-1].p
        pair_p = max(depths[i - 1], r_inf)
        for (m, nn), c in s_coefficients(pair_p, ti).items():
            if m >= depths[i - 1] or nn >= r_inf:
                continue
            add_omega(i, n_finite + 1, m, nn, -c * pref)
    return {k: v for k, v in out.items() if v}


def sugawara_reduction_check(config, slot_i, height=2):
    """Validate the reduced Hamiltonian against a direct L_{-1} computation.

    Computes L_{-1} acting in slot_i on the tensor of cyclic vectors over a
    bounded Laurent realization, subtracts H_i of the same state, and checks
    the difference lies in the realized span of meromorphic-function
    relations (the coinvariant identity).  Returns the report of
    blocks.residue_identity_check with the extra membership appended.
    """
    from .blocks import residue_identity_check, sugawara_slot
    m = config.points[slot_i].depth
    report = residue_identity_check(config, slot_i, m, height=height)
    product = report["product"]
    witness = report["witness"]
    lterm = sugawara_slot(product, slot_i, -1, witness)
    hterm = hamiltonian_state(config, product, slot_i + 1, witness)
    diff = dict(lterm)
    for k, v in hterm.items():
        diff[k] = diff.get(k, ZERO) - v
    diff = {k: v for k, v in diff.items() if v}
    report["sugawara_matches_reduction"] = report["span"].contains(diff)
    return report


class NumericConnection:
    """Float/complex view of a ConnectionContext for path integration.

    The exact block matrices are converted to complex arrays once; evaluating
    a Hamiltonian at a point is a scalar combination, so the adaptive stepper
    can request arbitrarily many points cheaply.
    """

    def __init__(self, ctx):
        import numpy as np
        self.np = np
        self.ctx = ctx
        self.n_finite = ctx.n_finite
        self.dim = ctx.dim
        self.prefactor = complex(ctx.prefactor)
        self._blocks = {}
        depths = ctx.depths
        for i in range(1, self.n_finite + 1):
            for j in range(1, self.n_finite + 1):
                if i == j:
                    continue
                for m in range(depths[i - 1]):
                    for l in range(depths[j - 1]):
                        mat = ctx.omega_matrix(i, j, m, l)
                        self._blocks[(i, j, m, l)] = np.array(
                            [[complex(x) for x in row] for row in mat])
        self._inf_blocks = {}
        if ctx.has_infinity_slot and ctx.r_infinity >= 2:
            for i in range(1, self.n_finite + 1):
                for m in range(depths[i - 1]):
                    for l in range(ctx.r_infinity):
                        if m + 1 <= l <= ctx.r_infinity - 1:
                            mat = ctx.omega_matrix(i, self.n_finite + 1, m, l)
                            self._inf_blocks[(i, m, l)] = np.array(
                                [[complex(x) for x in row] for row in mat])
        self._dyn = {}
        if ctx.config.infinity_mode == "dynamical":
            for i in range(1, self.n_finite + 1):
                mat = ctx.dynamical_matrix(i)
                self._dyn[i] = np.array([[complex(x) for x in row] for row in mat])

    def hamiltonian_at(self, i, times):
        np = self.np
        acc = np.zeros((self.dim, self.dim), dtype=complex)
        ti = times[i - 1]
        depths = self.ctx.depths
        for j in range(1, self.n_finite + 1):
            if j == i:
                continue
            tij = ti - times[j - 1]
            for m in range(depths[i - 1]):
                for l in range(depths[j - 1]):
                    c = ((-1) ** m) * comb(m + l, l) * tij ** (-1 - m - l)
                    acc += (self.prefactor * c) * self._blocks[(i, j, m, l)]
        for (ii, m, l), mat in self._inf_blocks.items():
            if ii == i:
                c = comb(l - 1, l - m - 1) * ti ** (l - m - 1)
                acc -= (self.prefactor * c) * mat
        if i in self._dyn:
            acc += self.prefactor * self._dyn[i]
        return acc
