"""Segal-Sugawara operators acting on module slices.

L_n is the normal-ordered sum (2(kappa+h^vee))^{-1} sum_{j,k} :X_k z^{-j} X^k z^{n+j}:
with nonnegative degrees placed on the right.  On a slice whose vectors are
killed by z^N g[[z]] only the terms whose right factor has degree below N
survive, so the operator is a finite sum of generator pairs.
"""

from fractions import Fraction

from .errors import CriticalLevel
from .linalg import ZERO, fr


def _term_pairs(n, smooth_bound):
    """(left, right) degree pairs of :z^{-j} . z^{n+j}: surviving on the slice.

    The right factor acts first.  Normal ordering puts the nonnegative-degree
    factor on the right; a term dies on the whole slice when its right factor
    has degree >= smooth_bound.  Doubly-negative pairs (possible only for
    n <= -2) keep the written order and always survive.
    """
    pairs = []
    for j in range(-smooth_bound + 1, smooth_bound - n):
        da, db = -j, n + j
        if da >= 0 and db < 0:
            left, right = db, da
        else:
            left, right = da, db
        if right < 0 or right < smooth_bound:
            pairs.append((left, right))
    return pairs


def prefactor(algebra, character):
    kappa = character.require_noncritical(algebra)
    return Fraction(1, 2) / (kappa + algebra.dual_coxeter)


def sugawara_apply(n, vec, slice_):
    """L_n applied to a slice vector, exactly.

    Raises TruncationExceeded if an intermediate or final vector leaves the
    slice, and CriticalLevel at kappa = -h^vee.
    """
    alg = slice_.algebra
    pref = prefactor(alg, slice_.character)
    bound = slice_.p + slice_.neg_budget
    out = {}
    for dl, dr in _term_pairs(n, bound):
        for k, dual in alg.dual_pairs():
            # sum_k X_k z^dl X^k z^dr, the dual factor expanded on the basis
            for j, cj in dual.items():
                v = slice_.act((dr, j), vec)
                if not v:
                    continue
                v = slice_.act((dl, k), v)
                for r, c in v.items():
                    out[r] = out.get(r, ZERO) + pref * cj * c
    return {r: c for r, c in out.items() if c}


def sugawara_eigenvalue(algebra, character, n):
    """Closed-form eigenvalue of L_n on the cyclic vector, for n >= p-1.

    Returns 0 for n > 2(p-1) and None for n < p-1 (w need not be an
    eigenvector there).
    """
    p = character.p
    if n < p - 1:
        return None
    if n > 2 * (p - 1):
        return ZERO
    kappa = character.require_noncritical(algebra)
    rs = algebra.root_system
    denom = 2 * (kappa + algebra.dual_coxeter)
    total = ZERO
    for j in range(1 - p + n, p):
        total += rs.weight_form(character.a(j), character.a(n - j),
                                basis="fundamental")
    if n == p - 1:
        rho = rs.rho_root_coords()
        total += 2 * p * rs.weight_form(rho, character.a(p - 1),
                                        basis="root", basis_nu="fundamental")
    return total / denom


def conformal_weight(algebra, character):
    """Casimir eigenvalue (lam | lam + 2 rho) / 2(kappa + h^vee) of a tame module."""
    rs = algebra.root_system
    kappa = character.require_noncritical(algebra)
    lam = character.lam
    rho2 = tuple(2 * c for c in rs.rho_root_coords())
    val = rs.weight_form(lam, lam, basis="fundamental")
    val += rs.weight_form(lam, rho2, basis="fundamental", basis_nu="root")
    return val / (2 * (kappa + algebra.dual_coxeter))


def sugawara_eigencheck(algebra, character, n, height=2):
    """Verify L_n w = l_n w by straightening against the closed form.

    Returns (computed, expected, ok); computed is the full vector's
    coefficient on w (the off-line components must vanish for ok).
    """
    from .modules import build_finite_module
    slice_ = build_finite_module(algebra, character, height)
    w = {slice_.cyclic_index(): Fraction(1)}
    img = sugawara_apply(n, w, slice_)
    expected = sugawara_eigenvalue(algebra, character, n)
    computed = img.get(slice_.cyclic_index(), ZERO)
    off_line = {r: c for r, c in img.items() if r != slice_.cyclic_index()}
    ok = (expected is not None) and (not off_line) and computed == expected
    return computed, expected, ok


def sugawara_commutator_check(m, slice_, vectors=None, generators=None):
    """Check [L_{-1}, X z^m] v = -m X z^{m-1} v on slice vectors.

    vectors defaults to the whole basis of the finite part of the slice;
    generators defaults to all Cartan-Weyl basis indices.
    """
    alg = slice_.algebra
    if generators is None:
        generators = range(alg.dim)
    if vectors is None:
        vectors = [{i: Fraction(1)} for i, mono in enumerate(slice_.basis)
                   if slice_.neg_degree(mono) == 0]
    failures = []
    for idx in generators:
        for v in vectors:
            xv = slice_.act((m, idx), v)
            lhs = sugawara_apply(-1, xv, slice_)
            lv = sugawara_apply(-1, v, slice_)
            for r, c in slice_.act((m, idx), lv).items():
                lhs[r] = lhs.get(r, ZERO) - c
            rhs = {r: -fr(m) * c for r, c in slice_.act((m - 1, idx), v).items()}
            diff = dict(lhs)
            for r, c in rhs.items():
                diff[r] = diff.get(r, ZERO) - c
            if any(c != 0 for c in diff.values()):
                failures.append((idx, v, diff))
    return failures
