"""Deformation force models for the immersed structure.

Three element types act on the Lagrangian chain: target penalties that pull
tethered nodes toward prescribed positions, linear springs between node
pairs, and beams that penalize deviation of the discrete curvature (second
difference) of each consecutive node triple from a preferred value.  Target
positions and preferred curvatures are the quantities driven through
keyframe states by the phase schedule.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .interpolants import blend_states

__all__ = [
    "BeamSet",
    "SpringSet",
    "TargetSet",
    "beam_energy",
    "beam_force",
    "spring_force",
    "target_force",
    "update_beam_curvatures",
    "update_target_positions",
]


def _as_index(a, n_points, name):
    idx = np.asarray(a, dtype=int)
    if idx.ndim != 1:
        raise ValueError(f"{name} indices must be one-dimensional")
    if idx.size and (idx.min() < 0 or (n_points is not None and idx.max() >= n_points)):
        raise ValueError(f"{name} indices out of range")
    return idx


@dataclass(frozen=True)
class TargetSet:
    """Tethered nodes: indices, prescribed positions y, stiffness per node."""

    idx: np.ndarray
    y: np.ndarray
    k: np.ndarray

    def __post_init__(self):
        idx = _as_index(self.idx, None, "target")
        y = np.asarray(self.y, dtype=float)
        k = np.broadcast_to(np.asarray(self.k, dtype=float), idx.shape).copy()
        if y.shape != (idx.size, 2):
            raise ValueError("prescribed positions must be (n_targets, 2)")
        if np.any(k <= 0):
            raise ValueError("target stiffness must be positive")
        for name, val in (("idx", idx), ("y", y), ("k", k)):
            object.__setattr__(self, name, val)


@dataclass(frozen=True)
class SpringSet:
    """Springs between master and slave nodes with resting lengths."""

    master: np.ndarray
    slave: np.ndarray
    k: np.ndarray
    rest: np.ndarray

    def __post_init__(self):
        master = _as_index(self.master, None, "spring master")
        slave = _as_index(self.slave, None, "spring slave")
        k = np.broadcast_to(np.asarray(self.k, dtype=float), master.shape).copy()
        rest = np.broadcast_to(np.asarray(self.rest, dtype=float), master.shape).copy()
        if master.shape != slave.shape:
            raise ValueError("master and slave index lists must match")
        if np.any(master == slave):
            raise ValueError("a spring cannot connect a node to itself")
        if np.any(k <= 0) or np.any(rest < 0):
            raise ValueError("need k_spr > 0 and resting length >= 0")
        for name, val in (("master", master), ("slave", slave), ("k", k), ("rest", rest)):
            object.__setattr__(self, name, val)


@dataclass(frozen=True)
class BeamSet:
    """Beams over consecutive node triples with preferred curvatures c."""

    i1: np.ndarray
    i2: np.ndarray
    i3: np.ndarray
    k: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        i1 = _as_index(self.i1, None, "beam")
        i2 = _as_index(self.i2, None, "beam")
        i3 = _as_index(self.i3, None, "beam")
        k = np.broadcast_to(np.asarray(self.k, dtype=float), i1.shape).copy()
        c = np.asarray(self.c, dtype=float)
        if not (i1.shape == i2.shape == i3.shape):
            raise ValueError("beam index lists must match")
        if c.shape != (i1.size, 2):
            raise ValueError("preferred curvature must be (n_beams, 2)")
        if np.any(k <= 0):
            raise ValueError("beam stiffness must be positive")
        for name, val in (("i1", i1), ("i2", i2), ("i3", i3), ("k", k), ("c", c)):
            object.__setattr__(self, name, val)


def target_force(x, targets):
    """Penalty force k_targ (Y - X) on tethered nodes, zero elsewhere."""
    x = np.asarray(x, dtype=float)
    f = np.zeros_like(x)
    if targets is None or targets.idx.size == 0:
        return f
    if targets.idx.max() >= x.shape[0]:
        raise ValueError("target index out of range for this chain")
    f[targets.idx] = targets.k[:, None] * (targets.y - x[targets.idx])
    return f


def spring_force(x, springs):
    """Equal-and-opposite spring forces; zero when pairs sit at rest length."""
    x = np.asarray(x, dtype=float)
    f = np.zeros_like(x)
    if springs is None or springs.master.size == 0:
        return f
    if max(springs.master.max(), springs.slave.max()) >= x.shape[0]:
        raise ValueError("spring index out of range for this chain")
    d = x[springs.slave] - x[springs.master]
    length = np.linalg.norm(d, axis=1)
    if np.any(length <= 0):
        raise ValueError("coincident spring endpoints: direction undefined")
    pull = (springs.k * (1.0 - springs.rest / length))[:, None] * d
    np.add.at(f, springs.master, pull)
    np.add.at(f, springs.slave, -pull)
    return f


def _second_difference(x, beams):
    return x[beams.i1] - 2.0 * x[beams.i2] + x[beams.i3]


def beam_energy(x, beams):
    """Bending energy: half k_beam |second difference - preferred c|^2 summed."""
    x = np.asarray(x, dtype=float)
    gap = _second_difference(x, beams) - beams.c
    return float(0.5 * np.sum(beams.k * np.sum(gap * gap, axis=1)))


def beam_force(x, beams):
    """Exact negative gradient of beam_energy with respect to the positions.

    Each beam spreads k_beam (D - C) over its triple with the (-1, +2, -1)
    pattern, so the three nodal forces of every beam sum to zero.
    """
    x = np.asarray(x, dtype=float)
    f = np.zeros_like(x)
    if beams is None or beams.i1.size == 0:
        return f
    if max(beams.i1.max(), beams.i2.max(), beams.i3.max()) >= x.shape[0]:
        raise ValueError("beam index out of range for this chain")
    g = beams.k[:, None] * (_second_difference(x, beams) - beams.c)
    np.add.at(f, beams.i1, -g)
    np.add.at(f, beams.i2, 2.0 * g)
    np.add.at(f, beams.i3, -g)
    return f


def update_target_positions(targets, schedule, states, t):
    """Move the prescribed positions to the scheduled blend at time t.

    states holds one (n_targets, 2) matrix per keyframe; a rest phase holds
    the last reached state still.
    """
    src, dst, w = schedule.weight_at(t)
    y = blend_states(states[src], states[dst], w)
    if y.shape != targets.y.shape:
        raise ValueError("keyframe state shape does not match the target set")
    return replace(targets, y=y)


def update_beam_curvatures(beams, schedule, curvature_states, t):
    """Move the preferred curvatures to the scheduled blend at time t."""
    src, dst, w = schedule.weight_at(t)
    c = blend_states(curvature_states[src], curvature_states[dst], w)
    if c.shape != beams.c.shape:
        raise ValueError("curvature state shape does not match the beam set")
    return replace(beams, c=c)
