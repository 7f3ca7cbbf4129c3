"""Enumerative formulas for weight spaces of singular highest-weight modules.

Everything here is pure combinatorics on the positive root lattice: counting
multiplicity vectors, weak compositions, and the resulting weight-space
dimensions for one module and for tensor products over marked points.
"""

from math import comb


def mult_positive_roots(nu, rs):
    """All ways of writing nu as a Z>=0-combination of positive roots.

    Returns a list of tuples m (one multiplicity per positive root, in the
    fixed root order); empty when nu is not in Q+.  Enumeration is
    depth-first over roots in order, so the output is lexicographic and
    deterministic.
    """
    nu = tuple(int(c) for c in nu)
    roots = rs.positive_roots
    out = []

    def search(idx, remaining, acc):
        if all(c == 0 for c in remaining):
            out.append(tuple(acc + [0] * (len(roots) - idx)))
            return
        if idx == len(roots):
            return
        alpha = roots[idx]
        top = min((r // a for r, a in zip(remaining, alpha) if a), default=0)
        # remaining coords are nonnegative throughout: every root has
        # nonnegative coordinates, so exceeding any coordinate is fatal
        for m in range(top + 1):
            rest = tuple(r - m * a for r, a in zip(remaining, alpha))
            if min(rest) >= 0:
                search(idx + 1, rest, acc + [m])

    if min(nu) >= 0:
        search(0, nu, [])
    return out


def weak_compositions(m, p):
    """All length-p tuples of nonnegative integers summing to m, lexicographic."""
    if p < 1 or m < 0:
        raise ValueError("need m >= 0 and p >= 1")
    out = []

    def build(pos, left, acc):
        if pos == p - 1:
            out.append(tuple(acc + [left]))
            return
        for v in range(left + 1):
            build(pos + 1, left - v, acc + [v])

    build(0, m, [])
    return out


def dim_weight_space(nu, p, rs):
    """Dimension of the weight space lowered by nu in a depth-p module.

    Sum over multiplicity vectors of products of binomials C(m_a + p - 1, m_a);
    equals the Verma character |Mult(nu)| at p = 1.
    """
    total = 0
    for m in mult_positive_roots(nu, rs):
        prod = 1
        for ma in m:
            prod *= comb(ma + p - 1, ma)
        total += prod
    return total


def _tuples_summing_to(total, slots, rank):
    """All lists of `slots` vectors in Z_{>=0}^rank summing to total."""
    total = tuple(int(c) for c in total)
    if min(total) < 0:
        return []
    out = []

    def build(slot, remaining, acc):
        if slot == slots - 1:
            out.append(acc + [tuple(remaining)])
            return
        for part in _boxed(remaining, rank):
            rest = tuple(r - q for r, q in zip(remaining, part))
            build(slot + 1, rest, acc + [part])

    build(0, total, [])
    return out


def _boxed(bound, rank):
    """All integer vectors 0 <= v <= bound componentwise, lexicographic."""
    if rank == 0:
        yield ()
        return
    for head in range(bound[0] + 1):
        for tail in _boxed(bound[1:], rank - 1):
            yield (head,) + tail


def dim_tensor_weight_space(total, depths, rs):
    """Dimension of the weight slice of a tensor product of depth-r_j modules.

    Sum over tuples (nu_j) with sum nu_j = total of the per-slot dimensions.
    Each nu_j must lie in Q+ (highest-weight property), so the enumeration is
    finite.
    """
    dim = 0
    for nus in _tuples_summing_to(total, len(depths), rs.rank):
        prod = 1
        for nu, r in zip(nus, depths):
            prod *= dim_weight_space(nu, r, rs)
            if prod == 0:
                break
        dim += prod
    return dim


def tensor_weight_tuples(total, slots, rs):
    """The tuples (nu_j) entering dim_tensor_weight_space, in enumeration order."""
    return _tuples_summing_to(total, slots, rs.rank)
