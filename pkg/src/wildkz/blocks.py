"""Tensor products over marked points and their g-coinvariants.

A :class:`TensorSlice` realizes one total-h-weight slice of a tensor product
of module slices; a :class:`BlockSpace` is its exact quotient by the span of
diagonal g-relations, with projection and section maps.  Everything is exact
rational linear algebra; dimensions are integers, not approximations.

Two quotient engines cover the two constructions in use:

* plain: every marked point (including infinity) carries a singular module
  and the relations are the diagonal action of the raising and lowering
  generators on the total-weight-zero slice;
* theta-dual at infinity: the infinity slot carries the tame dual or
  contragredient module, the surviving slice lives on the finite slots only,
  and the relations are the diagonal lowering action.
"""

from fractions import Fraction

from .errors import (CoincidentTimes, CutoffTooSmall, NonInvariant,
                     TruncationExceeded, WildKZError)
from .linalg import ZERO, Quotient, fr
from .modules import DualModuleSlice, build_affine_slice, build_finite_module

INFINITY_MODES = ("tame", "singular", "dual", "contragredient", "dynamical",
                  "restricted")


class MarkedPoint:
    def __init__(self, time, character):
        self.time = time
        self.character = character

    @property
    def depth(self):
        return self.character.p


class MarkedConfiguration:
    """Marked points with singular characters, a shared level, and an infinity slot.

    infinity_mode selects the block construction; for 'dynamical' the slot
    carries no module, only the Cartan coefficient mu of the degree-one
    irregular term at infinity.
    """

    def __init__(self, algebra, points, infinity_mode="contragredient",
                 infinity_character=None, mu=None, level=None):
        self.algebra = algebra
        self.points = list(points)
        if infinity_mode not in INFINITY_MODES:
            raise WildKZError(f"unknown infinity mode {infinity_mode!r}")
        self.infinity_mode = infinity_mode
        self.infinity_character = infinity_character
        self.mu = None if mu is None else tuple(fr(c) for c in mu)
        levels = {p.character.kappa for p in self.points}
        if infinity_character is not None:
            levels.add(infinity_character.kappa)
        if level is not None:
            levels.add(fr(level))
        levels.discard(None)
        if len(levels) > 1:
            raise WildKZError("marked points must share one level")
        self.level = levels.pop() if levels else None
        times = [p.time for p in self.points]
        for i in range(len(times)):
            for j in range(i + 1, len(times)):
                if times[i] == times[j]:
                    raise CoincidentTimes(f"t_{i+1} = t_{j+1} = {times[i]}")
        if infinity_mode in ("tame", "dual", "contragredient") and \
                infinity_character is not None and infinity_character.p != 1:
            raise WildKZError(f"infinity mode {infinity_mode!r} requires a tame character")
        if infinity_mode == "dynamical" and self.mu is None:
            raise WildKZError("dynamical infinity needs mu")

    @property
    def depths(self):
        return [p.depth for p in self.points]

    def times(self):
        return [p.time for p in self.points]

    def total_tame_hvalues(self):
        """Sum of the tame parts over all slots carrying a character."""
        r = self.algebra.rank
        acc = [ZERO] * r
        for p in self.points:
            for i, c in enumerate(p.character.lam):
                acc[i] += c
        if self.infinity_character is not None and self.infinity_mode != "dynamical":
            for i, c in enumerate(self.infinity_character.lam):
                acc[i] += c
        return tuple(acc)


class TensorSlice:
    """One total-weight slice of a tensor product of module slices.

    slots may mix ModuleSlice and DualModuleSlice; basis entries are tuples
    of per-slot indices whose slot weights sum to the target.
    """

    def __init__(self, slots, target_hvalues):
        self.slots = list(slots)
        self.target = tuple(fr(c) for c in target_hvalues)
        by_weight = []
        for s in self.slots:
            d = {}
            for i in range(s.dim):
                d.setdefault(s.weight_hvalues(i), []).append(i)
            by_weight.append(d)
        basis = []

        def walk(slot, acc_weight, acc_idx):
            if slot == len(self.slots):
                if acc_weight == self.target:
                    basis.append(tuple(acc_idx))
                return
            for wt, idxs in by_weight[slot].items():
                nw = tuple(a + b for a, b in zip(acc_weight, wt))
                for i in idxs:
                    walk(slot + 1, nw, acc_idx + [i])

        rank = len(self.target)
        walk(0, tuple([ZERO] * rank), [])
        basis.sort()
        self.basis = basis
        self.index = {b: i for i, b in enumerate(basis)}
        self.dim = len(basis)

    def labels(self):
        out = []
        for b in self.basis:
            parts = []
            for s, i in zip(self.slots, b):
                base = s.base if isinstance(s, DualModuleSlice) else s
                parts.append(base.monomial_label(base.basis[i]))
            out.append(" (x) ".join(parts))
        return out

    # raw tensor states are dicts {tuple of per-slot indices: coefficient};
    # they may leave the weight slice mid-computation and are reindexed at the end

    def apply_slot_generator(self, slot, gen, state):
        s = self.slots[slot]
        cols, escaped = s.generator_matrix(gen)
        out = {}
        for key, c in state.items():
            if not c:
                continue
            i = key[slot]
            if escaped[i]:
                raise TruncationExceeded(
                    f"slot {slot+1} action {gen} leaves the realized slice")
            for r, m in cols[i].items():
                nk = key[:slot] + (r,) + key[slot + 1:]
                out[nk] = out.get(nk, ZERO) + c * m
        return {k: v for k, v in out.items() if v}

    def apply_terms(self, terms, state):
        """Apply a symbolic slot operator: list of (coeff, ((slot, gen), ...)).

        Slots are 1-based in the operator description; factors act right to
        left.
        """
        out = {}
        for coeff, factors in terms:
            cur = state
            for slot, (idx, deg) in reversed(factors):
                cur = self.apply_slot_generator(slot - 1, (deg, idx), cur)
                if not cur:
                    break
            for k, v in cur.items():
                out[k] = out.get(k, ZERO) + coeff * v
        return {k: v for k, v in out.items() if v}

    def basis_state(self, i):
        return {self.basis[i]: Fraction(1)}

    def to_coords(self, state):
        vec = [ZERO] * self.dim
        for key, c in state.items():
            i = self.index.get(key)
            if i is None:
                raise TruncationExceeded("tensor state leaves the weight slice")
            vec[i] = c
        return vec

    def coords_to_state(self, vec):
        return {self.basis[i]: c for i, c in enumerate(vec) if c}

    def diagonal_action(self, gen, state):
        """Sum over slots of gen acting in each slot."""
        out = {}
        for s in range(len(self.slots)):
            part = self.apply_slot_generator(s, gen, state)
            for k, v in part.items():
                out[k] = out.get(k, ZERO) + v
        return {k: v for k, v in out.items() if v}


class BlockSpace:
    """Exact quotient of a weight slice by a span of relation vectors."""

    def __init__(self, ambient, relations):
        self.ambient = ambient
        self.relations = relations
        self.quotient = Quotient(ambient.dim, relations)

    @property
    def ambient_dim(self):
        return self.ambient.dim

    @property
    def relation_rank(self):
        return self.quotient.rank

    @property
    def dim(self):
        return self.quotient.quotient_dim

    def class_of(self, state):
        return self.quotient.project(self.ambient.to_coords(state))

    def is_zero_class(self, state):
        return all(c == 0 for c in self.class_of(state))

    def reduce_operator(self, mat):
        """Matrix induced on the quotient; NonInvariant if relations move."""
        try:
            return self.quotient.reduce_matrix(mat, check_invariant=True)
        except ValueError as e:
            raise NonInvariant(str(e)) from None


def tensor_weight_slice(algebra, characters, total_lowering, height=None):
    """Indexed pure-tensor basis of the slice lowered by total_lowering.

    characters is the list of per-slot SingularCharacters; total_lowering is
    in root coordinates.  The realized height defaults to the total height.
    """
    rs = algebra.root_system
    need = sum(int(c) for c in total_lowering)
    h = need if height is None else height
    slots = [build_finite_module(algebra, chi, h) for chi in characters]
    target = [ZERO] * algebra.rank
    for chi in characters:
        for i, c in enumerate(chi.lam):
            target[i] += c
    shift = rs.root_to_fundamental(total_lowering)
    target = tuple(t - s for t, s in zip(target, shift))
    return TensorSlice(slots, target)


def _required_height(algebra, total_root_coords):
    max_root = max(sum(a) for a in algebra.root_system.positive_roots)
    return sum(int(c) for c in total_root_coords) + max_root


def compute_coinvariants(config, height=None):
    """Space of g-coinvariants of the tensor product, as a BlockSpace.

    plain/singular infinity: quotient of the total-weight-zero slice of the
    full product (infinity slot included) by the diagonal action of every
    raising and lowering generator.

    dual/contragredient tame infinity: quotient of the surviving slice of the
    finite slots by the diagonal lowering action.

    restricted mode (functions vanishing at an unmarked point): no relations,
    the slice itself is the block.

    Raises CutoffTooSmall when the realized height cannot contain the
    relation images.
    """
    alg = config.algebra
    rs = alg.root_system
    total = config.total_tame_hvalues()
    total_root = rs.fundamental_to_root(total)
    if any(c != int(c) or c < 0 for c in total_root):
        # empty slice: the block is trivially zero-dimensional
        total_root = None
        needed = 0
    else:
        total_root = tuple(int(c) for c in total_root)
        needed = _required_height(alg, total_root)
    if height is None:
        height = needed
    if total_root is not None and height < needed:
        raise CutoffTooSmall(f"need height >= {needed}, got {height}")

    mode = config.infinity_mode
    if mode == "dynamical":
        raise WildKZError("coinvariants need a module or dual at infinity")

    slices = [build_finite_module(alg, p.character, height) for p in config.points]
    if mode in ("singular", "tame"):
        if config.infinity_character is None:
            raise WildKZError("plain mode needs an infinity character")
        slices.append(build_finite_module(alg, config.infinity_character, height))
    elif mode in ("dual", "contragredient"):
        pass  # infinity slot eliminated through its cyclic functional
    ambient_target = tuple([ZERO] * alg.rank)
    if mode in ("dual", "contragredient"):
        lam_inf = config.infinity_character.lam
        sign = -1 if mode == "contragredient" else 1
        # contragredient psi has weight +lam_inf, dual psi has weight -lam_inf
        ambient_target = tuple(sign * c for c in lam_inf)
    ambient = TensorSlice(slices, ambient_target)

    relations = []
    if mode != "restricted":
        gens = []
        if mode in ("singular", "tame"):
            for a_idx, alpha in enumerate(rs.positive_roots):
                gens.append((0, alg.e_index(alpha)))
                gens.append((0, alg.f_index(alpha)))
        else:
            for a_idx, alpha in enumerate(rs.positive_roots):
                gens.append((0, alg.f_index(alpha)))
        for gen in gens:
            shift = alg.weight_shift(gen[1])
            shift_h = rs.root_to_fundamental(shift)
            source_target = tuple(t - s for t, s in zip(ambient_target, shift_h))
            source = TensorSlice(slices, source_target)
            for i in range(source.dim):
                state = source.basis_state(i)
                img = {}
                for s in range(len(slices)):
                    part = source.apply_slot_generator(s, gen, state)
                    for k, v in part.items():
                        img[k] = img.get(k, ZERO) + v
                try:
                    relations.append(ambient.to_coords(img))
                except TruncationExceeded:
                    raise CutoffTooSmall(
                        "relation image leaves the realized weight box")
    return BlockSpace(ambient, relations)


# --- pole expansions and the coinvariant identity -----------------------------------


def pole_expansion_at_finite(m, t_i, t_j, max_l):
    """Laurent coefficients of (z - t_i)^{-m} at t_j: list over z_j^l, l <= max_l."""
    from math import comb
    t_i, t_j = fr(t_i), fr(t_j)
    if t_i == t_j:
        raise CoincidentTimes("expansion at the pole itself")
    return [fr(comb(m + l - 1, l)) / ((t_i - t_j) ** l * (t_j - t_i) ** m)
            for l in range(max_l + 1)]


def pole_expansion_at_infinity(m, t_i, max_deg):
    """Coefficients of (z - t_i)^{-m} in z_inf = 1/z: {degree: coeff}, degree <= max_deg."""
    from math import comb
    t_i = fr(t_i)
    out = {}
    for l in range(0, max_deg - m + 1):
        out[m + l] = fr(comb(m + l - 1, l)) * t_i ** l
    return out


def meromorphic_action(product, times, slot_i, m, x_idx, state, n_finite=None):
    """tau(X (x) (z - t_i)^{-m}) applied to a raw tensor state.

    product is a TensorSlice whose slot_i has negative headroom >= m; every
    other finite slot sees the truncated regular expansion, and a trailing
    infinity slot (beyond len(times)) sees the z_inf expansion.  Smoothness
    makes both truncations exact on the modules.
    """
    out = {}
    if n_finite is None:
        n_finite = len(times)
    for j in range(len(product.slots)):
        if j == slot_i:
            part = product.apply_slot_generator(j, (-m, x_idx), state)
        elif j < n_finite:
            coeffs = pole_expansion_at_finite(m, times[slot_i], times[j],
                                              product.slots[j].p - 1)
            part = {}
            for l, c in enumerate(coeffs):
                if c:
                    sub = product.apply_slot_generator(j, (l, x_idx), state)
                    for k, v in sub.items():
                        part[k] = part.get(k, ZERO) + c * v
        else:
            coeffs = pole_expansion_at_infinity(m, times[slot_i],
                                                product.slots[j].p - 1)
            part = {}
            for d, c in coeffs.items():
                if c:
                    sub = product.apply_slot_generator(j, (d, x_idx), state)
                    for k, v in sub.items():
                        part[k] = part.get(k, ZERO) + c * v
        for k, v in part.items():
            out[k] = out.get(k, ZERO) + v
    return {k: v for k, v in out.items() if v}


class RawSpan:
    """Echelon span of raw tensor states over a dynamic key set."""

    def __init__(self):
        self.rows = []   # list of (pivot key, reduced dict with pivot coeff 1)

    def _reduce(self, state):
        v = dict(state)
        for piv, row in self.rows:
            c = v.get(piv, ZERO)
            if c:
                for k, rv in row.items():
                    v[k] = v.get(k, ZERO) - c * rv
        return {k: c for k, c in v.items() if c}

    def add(self, state):
        v = self._reduce(state)
        if not v:
            return False
        piv = sorted(v)[0]
        inv = Fraction(1) / v[piv]
        self.rows.append((piv, {k: c * inv for k, c in v.items()}))
        return True

    def contains(self, state):
        return not self._reduce(state)


def sugawara_slot(product, slot, n, state):
    """Sugawara L_n acting in one tensor slot of a raw state."""
    from .sugawara import sugawara_apply
    grouped = {}
    for key, c in state.items():
        rest = key[:slot] + key[slot + 1:]
        grouped.setdefault(rest, {})[key[slot]] = c
    out = {}
    for rest, vec in grouped.items():
        img = sugawara_apply(n, vec, product.slots[slot])
        for r, c in img.items():
            key = rest[:slot] + (r,) + rest[slot:]
            out[key] = out.get(key, ZERO) + c
    return {k: v for k, v in out.items() if v}


def residue_identity_check(config, slot_i, m, witness=None, height=2,
                           extra_vectors=()):
    """Check the coinvariant identity through truncated pole expansions.

    Builds the product with negative headroom at slot_i, spans the realized
    relation vectors tau(X (x) (z - t_i)^{-j}) u over basis X, 1 <= j <= the
    slot depth (and j <= m), and verifies that the identity vector for
    (X, m) at the witness lies in the span, as must every extra vector
    (used to validate reduced connection formulas against a direct
    Sugawara computation).  Returns a report dict.
    """
    alg = config.algebra
    times = config.times()
    j_max = max(m, config.points[slot_i].depth)
    slots = []
    for s, pt in enumerate(config.points):
        if s == slot_i:
            slots.append(build_affine_slice(alg, pt.character, height, j_max))
        else:
            slots.append(build_finite_module(alg, pt.character, height))
    if config.infinity_mode in ("tame", "singular") and config.infinity_character:
        slots.append(build_finite_module(alg, config.infinity_character, height))
    product = TensorSlice(slots, tuple([ZERO] * alg.rank))
    if witness is None:
        witness = {tuple(s.cyclic_index() for s in slots): Fraction(1)}

    span = RawSpan()
    count = 0
    fin_keys = [key for key in _finite_states(slots, height - 1)]
    for x_idx in range(alg.dim):
        for j in range(1, j_max + 1):
            for key in fin_keys:
                state = {key: Fraction(1)}
                vec = meromorphic_action(product, times, slot_i, j, x_idx, state,
                                         n_finite=len(config.points))
                if vec:
                    span.add(vec)
                    count += 1

    results = []
    for x_idx in range(alg.dim):
        vec = meromorphic_action(product, times, slot_i, m, x_idx, witness,
                                 n_finite=len(config.points))
        results.append(span.contains(vec))
    extra_ok = [span.contains(v) for v in extra_vectors]
    return {
        "relation_count": count,
        "span_rank": len(span.rows),
        "identity_in_span": all(results),
        "per_generator": results,
        "extra_in_span": extra_ok,
        "product": product,
        "span": span,
        "witness": witness,
    }


def _finite_states(slots, max_height):
    """Keys of pure tensors with no negative degrees and bounded slot heights."""
    def slot_indices(s):
        out = []
        for i, mono in enumerate(s.basis):
            base = s.base if isinstance(s, DualModuleSlice) else s
            if base.neg_degree(mono) == 0 and sum(abs(c) for c in base.nu[i]) <= max_height:
                out.append(i)
        return out

    pools = [slot_indices(s) for s in slots]

    def walk(i, acc):
        if i == len(pools):
            yield tuple(acc)
            return
        for idx in pools[i]:
            yield from walk(i + 1, acc + [idx])

    yield from walk(0, [])
