"""Blending interpolants that carry a structure between stored keyframe states.

A motion phase maps simulation time onto a normalized coordinate t in [0, 1]
and turns it into a blending weight w.  Linear blending uses w = t directly,
which moves a driven structure at constant speed but starts and stops it
abruptly.  Cubic blending builds a piecewise cubic g(t) whose first and
second derivatives vanish at both ends of [0, 1], so driven structures ramp
up from rest and settle back to rest with no instantaneous accelerations.
Two mediary points 0 < p1 < p2 < 1 split [0, 1] into three cubic segments
and control how sharply the motion accelerates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CubicInterpolant",
    "Phase",
    "PhaseSchedule",
    "blend_states",
    "eval_g",
    "eval_g_derivs",
    "solve_cubic_coeffs",
    "solve_dense",
]


def solve_dense(a, b):
    """Solve the square system a x = b by Gaussian elimination.

    Rows are swapped so the largest remaining entry in each column is the
    pivot (partial pivoting).  Raises ValueError on a singular system.
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    n = b.size
    if a.shape != (n, n):
        raise ValueError(f"matrix shape {a.shape} does not match rhs size {n}")
    tiny = 1e-13 * max(1.0, float(np.abs(a).max()))
    for k in range(n - 1):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) < tiny:
            raise ValueError("singular system: no usable pivot")
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        m = a[k + 1 :, k] / a[k, k]
        a[k + 1 :, k:] -= m[:, None] * a[k, k:]
        b[k + 1 :] -= m * b[k]
    if abs(a[n - 1, n - 1]) < tiny:
        raise ValueError("singular system: no usable pivot")
    x = np.zeros(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1 :] @ x[k + 1 :]) / a[k, k]
    return x


@dataclass(frozen=True)
class CubicInterpolant:
    """Coefficients of the three cubic segments of g(t).

    Segment polynomials (coefficients in ascending powers of t):
      g0 on [0, p1], g1 on [p1, p2], g2 on [p2, 1].
    """

    p1: float
    p2: float
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    @property
    def coefficients(self):
        """All twelve coefficients as one vector (a0..a3, b0..b3, c0..c3)."""
        return np.concatenate([self.a, self.b, self.c])


def _poly_rows(t):
    # value / slope / curvature rows for a cubic written in the power basis
    return (
        np.array([1.0, t, t * t, t * t * t]),
        np.array([0.0, 1.0, 2.0 * t, 3.0 * t * t]),
        np.array([0.0, 0.0, 2.0, 6.0 * t]),
    )


def _constraint_system(p1, p2):
    """Assemble the 12 x 12 constraint matrix for the segment coefficients.

    The twelve conditions, in row order: g0 and its first two derivatives
    vanish at t = 0; value, slope, and curvature of g0 and g1 agree at p1;
    the same three matchings for g1 and g2 at p2; g2(1) = 1 with vanishing
    first and second derivative at t = 1.  Building the rows from the
    condition list keeps the matrix immune to transcription slips.
    """
    seg = {0: slice(0, 4), 1: slice(4, 8), 2: slice(8, 12)}
    a = np.zeros((12, 12))
    b = np.zeros(12)
    r = 0
    for row in _poly_rows(0.0):
        a[r, seg[0]] = row
        r += 1
    for row in _poly_rows(p1):
        a[r, seg[0]] = row
        a[r, seg[1]] = -row
        r += 1
    for row in _poly_rows(p2):
        a[r, seg[1]] = row
        a[r, seg[2]] = -row
        r += 1
    value_row, slope_row, curv_row = _poly_rows(1.0)
    a[9, seg[2]] = value_row
    b[9] = 1.0
    a[10, seg[2]] = slope_row
    a[11, seg[2]] = curv_row
    return a, b


def solve_cubic_coeffs(p1, p2):
    """Return the unique C2 piecewise cubic ramp for mediary points (p1, p2)."""
    if not (0.0 < p1 < p2 < 1.0):
        raise ValueError(f"mediary points must satisfy 0 < p1 < p2 < 1, got ({p1}, {p2})")
    a, b = _constraint_system(p1, p2)
    x = solve_dense(a, b)
    # one refinement pass keeps constraint residuals near machine precision
    # even when the mediary points sit close together or close to 0 or 1
    x += solve_dense(a, b - a @ x)
    return CubicInterpolant(p1=float(p1), p2=float(p2), a=x[0:4], b=x[4:8], c=x[8:12])


def _segment_coeffs(curve, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < -1e-9) or np.any(t > 1.0 + 1e-9):
        raise ValueError("normalized time outside [0, 1]")
    t = np.clip(t, 0.0, 1.0)
    stacked = np.stack([curve.a, curve.b, curve.c])
    seg = np.where(t < curve.p1, 0, np.where(t < curve.p2, 1, 2))
    return t, stacked[seg]


def eval_g(curve, t):
    """Evaluate the blending weight g(t) for scalar or array t in [0, 1]."""
    t, q = _segment_coeffs(curve, t)
    g = ((q[..., 3] * t + q[..., 2]) * t + q[..., 1]) * t + q[..., 0]
    return float(g) if g.ndim == 0 else g


def eval_g_derivs(curve, t):
    """Return (g, g', g'') at scalar or array t in [0, 1]."""
    t, q = _segment_coeffs(curve, t)
    g = ((q[..., 3] * t + q[..., 2]) * t + q[..., 1]) * t + q[..., 0]
    dg = (3.0 * q[..., 3] * t + 2.0 * q[..., 2]) * t + q[..., 1]
    ddg = 6.0 * q[..., 3] * t + 2.0 * q[..., 2]
    if g.ndim == 0:
        return float(g), float(dg), float(ddg)
    return g, dg, ddg


def blend_states(state_a, state_b, w):
    """Interpolate rowwise between two equally shaped state matrices."""
    state_a = np.asarray(state_a, dtype=float)
    state_b = np.asarray(state_b, dtype=float)
    if state_a.shape != state_b.shape:
        raise ValueError(f"state shapes differ: {state_a.shape} vs {state_b.shape}")
    # endpoints reproduce the stored states bit for bit
    if w == 0.0:
        return state_a.copy()
    if w == 1.0:
        return state_b.copy()
    return state_a + w * (state_b - state_a)


@dataclass(frozen=True)
class Phase:
    """One entry of a periodic motion schedule.

    A blend phase carries the structure from state index src to state index
    dst over its duration, using the attached cubic ramp (or a linear ramp
    when curve is None).  A rest phase (src == dst) holds one state still.
    """

    duration: float
    src: int
    dst: int
    curve: CubicInterpolant | None = None

    @property
    def is_rest(self):
        return self.src == self.dst

    @staticmethod
    def blend(duration, src, dst, curve=None):
        return Phase(duration=float(duration), src=src, dst=dst, curve=curve)

    @staticmethod
    def rest(duration, state):
        return Phase(duration=float(duration), src=state, dst=state)


@dataclass(frozen=True)
class PhaseSchedule:
    """Cyclic sequence of motion phases addressed by modular time."""

    phases: tuple

    def __post_init__(self):
        phases = tuple(self.phases)
        object.__setattr__(self, "phases", phases)
        if not phases:
            raise ValueError("schedule needs at least one phase")
        if any(p.duration < 0 for p in phases):
            raise ValueError("phase durations must be nonnegative")
        if self.period <= 0:
            raise ValueError("schedule period must be positive")

    @property
    def period(self):
        return float(sum(p.duration for p in self.phases))

    def locate_phase(self, t):
        """Map time t >= 0 to (phase index, normalized time in [0, 1)).

        A time landing exactly on a phase boundary belongs to the later
        phase with normalized time 0; zero-duration phases are skipped.
        """
        if t < 0:
            raise ValueError("time must be nonnegative")
        t_mod = float(np.fmod(t, self.period))
        start = 0.0
        for i, phase in enumerate(self.phases):
            if phase.duration > 0 and t_mod < start + phase.duration:
                return i, (t_mod - start) / phase.duration
            start += phase.duration
        # t_mod can only reach the period through rounding; wrap to the start
        for i, phase in enumerate(self.phases):
            if phase.duration > 0:
                return i, 0.0
        raise AssertionError("unreachable: schedule has positive period")

    def weight_at(self, t):
        """Return (src index, dst index, blending weight) for time t."""
        i, t_norm = self.locate_phase(t)
        phase = self.phases[i]
        if phase.is_rest:
            return phase.src, phase.src, 1.0
        if phase.curve is None:
            return phase.src, phase.dst, t_norm
        return phase.src, phase.dst, eval_g(phase.curve, t_norm)
