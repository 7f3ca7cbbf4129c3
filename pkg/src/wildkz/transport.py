"""Parallel transport of horizontal sections over configuration space.

Sections satisfy dv/ds = sum_i gamma_i'(s) H_i(gamma(s)) v along a piecewise
smooth path gamma in the configuration space of distinct points.  The
stepper is an embedded Dormand-Prince 5(4) pair with PI-free adaptive step
control; exact connection matrices are converted to complex arrays once and
evaluated pointwise (see NumericConnection).
"""

import cmath

import numpy as np

from .errors import CoalescencePenalty, StepUnderflow, WildKZError


class LineSegment:
    kind = "line"

    def __init__(self, start, end):
        self.start = tuple(complex(t) for t in start)
        self.end = tuple(complex(t) for t in end)

    def at(self, s):
        return tuple(a + s * (b - a) for a, b in zip(self.start, self.end))

    def velocity(self, s):
        return tuple(b - a for a, b in zip(self.start, self.end))


class RotationSegment:
    """Rotate a subset of coordinates about a common center by a fixed angle."""

    kind = "rotate"

    def __init__(self, start, center, slots, angle):
        self.start = tuple(complex(t) for t in start)
        self.center = complex(center)
        self.slots = tuple(slots)
        self.angle = float(angle)

    @property
    def end(self):
        return self.at(1.0)

    def at(self, s):
        rot = cmath.exp(1j * self.angle * s)
        return tuple(self.center + rot * (t - self.center) if i in self.slots else t
                     for i, t in enumerate(self.start))

    def velocity(self, s):
        rot = 1j * self.angle * cmath.exp(1j * self.angle * s)
        return tuple(rot * (t - self.center) if i in self.slots else 0j
                     for i, t in enumerate(self.start))


class AffineFlowSegment:
    """The affine flow t -> e^{2 a s} t + s b, s in [0, 1]."""

    kind = "affine"

    def __init__(self, start, a, b):
        self.start = tuple(complex(t) for t in start)
        self.a = float(a)
        self.b = complex(b)

    @property
    def end(self):
        return self.at(1.0)

    def at(self, s):
        g = cmath.exp(2 * self.a * s)
        return tuple(g * t + s * self.b for t in self.start)

    def velocity(self, s):
        g = 2 * self.a * cmath.exp(2 * self.a * s)
        return tuple(g * t + self.b for t in self.start)


class PathSpec:
    """A concatenation of segments with step tolerances and a distance floor.

    The floor defaults to 1e-3 times the path diameter; integration aborts
    with CoalescencePenalty if two coordinates approach closer than that.
    """

    def __init__(self, segments, rtol=1e-10, atol=1e-12, min_distance=None):
        if not segments:
            raise WildKZError("path needs at least one segment")
        self.segments = list(segments)
        for a, b in zip(self.segments, self.segments[1:]):
            if max(abs(x - y) for x, y in zip(a.end, b.start)) > 1e-12:
                raise WildKZError("path segments are not contiguous")
        if rtol <= 0 or atol <= 0:
            raise WildKZError("tolerances must be positive")
        self.rtol = rtol
        self.atol = atol
        if min_distance is None:
            pts = [t for seg in self.segments for t in (seg.start, seg.end)]
            diam = max((abs(a - b) for p in pts for a in p for b in p), default=1.0)
            min_distance = 1e-3 * max(diam, 1e-9)
        self.min_distance = min_distance

    @property
    def start(self):
        return self.segments[0].start

    @property
    def end(self):
        return self.segments[-1].end

    def is_closed(self):
        return max(abs(a - b) for a, b in zip(self.start, self.end)) < 1e-12


# Dormand-Prince 5(4) tableau
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
          187 / 2100, 1 / 40)


def _dopri_step(f, s, y, h):
    k = []
    for stage in range(7):
        ys = y
        if stage:
            ys = y + h * sum(a * ki for a, ki in zip(_DP_A[stage], k))
        k.append(f(s + _DP_C[stage] * h, ys))
    y5 = y + h * sum(b * ki for b, ki in zip(_DP_B5, k))
    y4 = y + h * sum(b * ki for b, ki in zip(_DP_B4, k))
    return y5, y4


def _integrate_segment(f, y, seg_index, path, stats):
    rtol, atol = path.rtol, path.atol
    s, h = 0.0, 0.1
    hmin = 1e-14
    while s < 1.0:
        h = min(h, 1.0 - s)
        y5, y4 = _dopri_step(f, s, y, h)
        err = np.max(np.abs(y5 - y4))
        scale = atol + rtol * max(1.0, float(np.max(np.abs(y5))))
        ratio = err / scale
        if ratio <= 1.0:
            s += h
            y = y5
            stats["steps"] += 1
            stats["error_estimate"] += err
        else:
            stats["rejected"] += 1
        factor = 0.9 * (1.0 / ratio) ** 0.2 if ratio > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
        if h < hmin:
            raise StepUnderflow(f"step size {h:.3e} below minimum on segment {seg_index}")
    return y


def _guarded_field(numeric, seg, floor):
    def f(s, y):
        times = seg.at(s)
        n = len(times)
        for a in range(n):
            for b in range(a + 1, n):
                if abs(times[a] - times[b]) < floor:
                    raise CoalescencePenalty(
                        f"|t_{a+1} - t_{b+1}| < {floor:.3e} along the path")
        vel = seg.velocity(s)
        acc = np.zeros_like(y)
        for i in range(n):
            if vel[i] != 0:
                acc = acc + vel[i] * (numeric.hamiltonian_at(i + 1, times) @ y)
        return acc
    return f


def integrate(path, v0, numeric):
    """Transport v0 along the path; returns (vector, stats)."""
    y = np.asarray(v0, dtype=complex)
    stats = {"steps": 0, "rejected": 0, "error_estimate": 0.0}
    for idx, seg in enumerate(path.segments):
        y = _integrate_segment(_guarded_field(numeric, seg, path.min_distance),
                               y, idx, path, stats)
    return y, stats


def monodromy(path, numeric):
    """Transport matrix around a closed loop, with a Liouville determinant check.

    Returns (matrix, stats); stats carries 'det' and 'det_liouville', the
    determinant of the transport and exp of the integrated trace of the
    connection along the loop.
    """
    if not path.is_closed():
        raise WildKZError("monodromy needs a closed loop")
    n = numeric.dim
    y0 = np.eye(n, dtype=complex)
    mat, stats = integrate(path, y0, numeric)

    # scalar run for the integrated trace
    tr = np.zeros(1, dtype=complex)
    for idx, seg in enumerate(path.segments):
        def f(s, y, seg=seg):
            times = seg.at(s)
            vel = seg.velocity(s)
            acc = np.zeros(1, dtype=complex)
            for i in range(len(times)):
                if vel[i] != 0:
                    acc = acc + vel[i] * np.trace(numeric.hamiltonian_at(i + 1, times))
            return acc
        tr = _integrate_segment(f, tr, idx, path, dict(stats, steps=0, rejected=0,
                                                       error_estimate=0.0))
    stats["det"] = complex(np.linalg.det(mat))
    stats["det_liouville"] = complex(np.exp(tr[0]))
    return mat, stats


def affine_equivariance_check(ctx, numeric, a, b, v0=None, rtol=1e-10, atol=1e-12):
    """Residual of transport along t -> e^{2a} t + b against prod_i exp(a L0^(i)).

    Horizontal sections are translation invariant (a = 0 gives the identity)
    and transform under dilations by the product of the exponentiated
    dilation generators taken at the start point.
    """
    from scipy.linalg import expm
    times0 = [complex(t) for t in ctx.config.times()]
    n = ctx.dim
    if v0 is None:
        v0 = np.zeros(n, dtype=complex)
        v0[0] = 1.0
    v0 = np.asarray(v0, dtype=complex)
    if a == 0 and b == 0:
        return 0.0
    seg = AffineFlowSegment(times0, a, b)
    path = PathSpec([seg], rtol=rtol, atol=atol)
    v_end, _ = integrate(path, v0, numeric)
    expected = v0.copy()
    for i in range(1, ctx.n_finite + 1):
        l0 = ctx.dilation_operator(i)
        l0c = np.array([[complex(x) for x in row] for row in l0])
        expected = expm(a * l0c) @ expected
    return float(np.max(np.abs(v_end - expected)))
