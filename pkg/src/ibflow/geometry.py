"""Immersed geometries: circle, contracting heart outline, idealized swimmer.

All generators return ordered point chains in domain-length units.  Chains
meant to deform between keyframe states keep the same point count and the
same ordering in every state, so state matrices can be blended rowwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "LagrangianMesh",
    "arc_length",
    "compute_curvatures",
    "make_circle",
    "make_heart_states",
    "make_swimmer",
]


@dataclass(frozen=True)
class LagrangianMesh:
    """Ordered chain of immersed boundary points.

    points: (N, 2) array of (x, y); ds: target spacing between consecutive
    points; closed: whether the chain loops back on itself (the heart and
    swimmer are open curves, the circle is a full loop).
    """

    points: np.ndarray
    ds: float
    closed: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
            raise ValueError("mesh needs an (N, 2) point array with N >= 3")
        object.__setattr__(self, "points", pts)

    @property
    def n(self):
        return self.points.shape[0]

    def spacing(self):
        """Distances between consecutive points (wrapping when closed)."""
        pts = self.points
        if self.closed:
            pts = np.vstack([pts, pts[:1]])
        return np.linalg.norm(np.diff(pts, axis=0), axis=1)


def arc_length(points):
    """Total length of the polyline through the given points."""
    pts = np.asarray(points, dtype=float)
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


def make_circle(center, radius, n):
    """Circle of n points placed uniformly in angle, starting at angle 0."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    if n < 3:
        raise ValueError("need at least 3 points")
    theta = 2.0 * np.pi * np.arange(n) / n
    pts = np.column_stack([center[0] + radius * np.cos(theta),
                           center[1] + radius * np.sin(theta)])
    ds = 2.0 * radius * np.sin(np.pi / n)
    return LagrangianMesh(points=pts, ds=float(ds), closed=True)


def compute_curvatures(points):
    """Discrete curvature of a chain: second differences along it.

    For each interior triple s the entries are
    C_x(s) = x(s) - 2 x(s+1) + x(s+2) and the same stencil for y,
    giving N - 2 rows for an N-point open chain.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise ValueError("need at least 3 points to form curvature triples")
    return pts[:-2] - 2.0 * pts[1:-1] + pts[2:]


def _cumulative_arc(x, y):
    seg = np.hypot(np.diff(x), np.diff(y))
    return np.concatenate([[0.0], np.cumsum(seg)])


def _sample_curve(x, y, s, s_samples):
    return np.column_stack([np.interp(s_samples, s, x), np.interp(s_samples, s, y)])


# ---------------------------------------------------------------------------
# swimmer: straight head section joined to a cubic tail
# ---------------------------------------------------------------------------

_TAIL_ARC_FRACTION = 0.72    # share of the body length in the cubic section
_TAIL_SPAN_FRACTION = 0.10   # x-extent of the cubic section relative to body length


def _canonical_tail_extent():
    """Reach x_max of the unit cubic y = x^3 whose arc/extent ratio matches.

    The tail must pack an arc of 0.72 L into an x-extent of L/10, a ratio of
    7.2; uniform scaling of y = x^3 preserves that ratio, so solve
    arc(x_max) = 7.2 x_max once on the canonical curve.
    """
    ratio = _TAIL_ARC_FRACTION / _TAIL_SPAN_FRACTION
    xs = np.linspace(0.0, 5.0, 200001)
    arc = _cumulative_arc(xs, xs**3)
    lo, hi = 1e-6, 5.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if np.interp(mid, xs, arc) - ratio * mid < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), xs, arc


def make_swimmer(length, ds):
    """Build the two rest shapes of the idealized swimmer.

    The body is a straight section (28% of the arc length, placed along the
    x axis with the head at the largest x) joined at the origin to a cubic
    tail (y proportional to x^3) that packs the remaining 72% of arc length
    into an x-extent of one tenth of the body length.  Points are spaced ds
    apart in arc length.  Phase 2 is phase 1 with the tail's y negated.

    Returns (phase1, phase2) meshes; index 0 is the head.
    """
    if length <= 0:
        raise ValueError("body length must be positive")
    if ds >= length:
        raise ValueError("point spacing must be smaller than the body length")
    n_total = int(round(length / ds))
    n_straight = int(round((1.0 - _TAIL_ARC_FRACTION) * length / ds))
    n_tail = n_total - n_straight
    if n_straight < 1 or n_tail < 1 or n_total < 3:
        raise ValueError("spacing too coarse for this body length")

    x_max, xs_canon, arc_canon = _canonical_tail_extent()
    lam = _TAIL_SPAN_FRACTION * length / x_max

    # head marches down the straight section to the junction at the origin
    head = np.zeros((n_straight, 2))
    head[:, 0] = ds * np.arange(n_straight, 0, -1)

    # tail sampled at equal arc steps along the scaled cubic, extending in -x
    s_canon = arc_canon * lam
    s_samples = ds * np.arange(0, n_tail + 1)
    x_canon = np.interp(s_samples, s_canon, xs_canon)
    tail = np.column_stack([-lam * x_canon, lam * x_canon**3])

    pts1 = np.vstack([head, tail])
    pts2 = pts1.copy()
    pts2[n_straight + 1 :, 1] *= -1.0
    mesh1 = LagrangianMesh(points=pts1, ds=float(ds), closed=False)
    mesh2 = LagrangianMesh(points=pts2, ds=float(ds), closed=False)
    return mesh1, mesh2


# ---------------------------------------------------------------------------
# heart: closed cartoon outline with a gap so fluid can pass in and out
# ---------------------------------------------------------------------------

def _heart_outline(n_fine=20000):
    # classic cartoon heart; the top cleft sits at parameter 0
    theta = np.linspace(0.0, 2.0 * np.pi, n_fine)
    x = 16.0 * np.sin(theta) ** 3
    y = (13.0 * np.cos(theta) - 5.0 * np.cos(2 * theta)
         - 2.0 * np.cos(3 * theta) - np.cos(4 * theta))
    return x, y


def _heart_points(center, width, n_points, gap_fraction):
    x, y = _heart_outline()
    scale = width / 32.0
    x = x * scale
    y = y * scale
    s = _cumulative_arc(x, y)
    total = s[-1]
    # leave out the arc within gap/2 of the cleft at both ends of the sweep
    s0 = 0.5 * gap_fraction * total
    kept = total - 2.0 * s0
    spacing = kept / (n_points - 1)
    pts = _sample_curve(x, y, s, s0 + spacing * np.arange(n_points))
    pts -= pts.mean(axis=0)
    pts += np.asarray(center, dtype=float)
    return pts


def make_heart_states(center, width, contraction, ds, gap_fraction=0.10):
    """Generate relaxed and contracted heart outlines sharing one ordering.

    A gap of gap_fraction of the perimeter is left open at the top cleft.
    The contracted state scales the outline by the given factor about the
    common center, so both states have the same point count and point k of
    one state corresponds to point k of the other.

    Returns (mesh_relaxed, contracted_points).
    """
    if not 0 < contraction < 1:
        raise ValueError("contraction factor must lie in (0, 1)")
    if not 0 < gap_fraction < 0.5:
        raise ValueError("gap fraction must lie in (0, 0.5)")
    x, y = _heart_outline()
    scale = width / 32.0
    perimeter = _cumulative_arc(x * scale, y * scale)[-1]
    n_points = int(round((1.0 - gap_fraction) * perimeter / ds)) + 1
    if n_points < 3:
        raise ValueError("spacing too coarse for this heart size")
    pts_a = _heart_points(center, width, n_points, gap_fraction)
    pts_b = _heart_points(center, width * contraction, n_points, gap_fraction)
    return LagrangianMesh(points=pts_a, ds=float(ds), closed=False), pts_b
