"""Scenario assembly and the immersed-boundary time loop.

The engine advances a coupled fluid-structure state through the classic
four-step cycle: evaluate fiber forces on the markers, spread them to the
grid, advance the fluid one step, then move the markers at the interpolated
local fluid velocity (the discrete no-slip condition).  Scenario builders
turn a flat configuration into meshes, fiber parameter sets, and periodic
motion schedules; the run driver adds dumps, traces, and a manifest.

Marker positions are stored unwrapped: the transfer kernels wrap grid
indices internally, so trajectories stay continuous for analysis even when
a body crosses the periodic boundary.
"""

from __future__ import annotations

import configparser
import json
import logging
import os
import time as _time
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import fileio
from .coupling import interp_velocity, spread_forces
from .fibers import (BeamSet, SpringSet, TargetSet, beam_force, spring_force,
                     target_force, update_beam_curvatures,
                     update_target_positions)
from .fluid import FluidState, advance_fluid
from .geometry import (LagrangianMesh, compute_curvatures, make_circle,
                       make_heart_states, make_swimmer)
from .interpolants import Phase, PhaseSchedule, solve_cubic_coeffs

__all__ = ["SimConfig", "SimState", "Scenario", "PRESETS", "preset_config",
           "load_config", "apply_overrides", "build_scenario",
           "write_scenario_decks", "initial_state", "step", "run"]

log = logging.getLogger(__name__)

SCENARIOS = ("circle", "heart", "swimmer")
CURVES = ("linear", "cubic")


@dataclass(frozen=True)
class SimConfig:
    """Flat run configuration; scenario-specific fields are ignored by the
    scenarios that do not use them."""

    # fluid grid
    nx: int = 32
    ny: int = 32
    lx: float = 1.0
    ly: float = 1.0
    rho: float = 1.0
    mu: float = 0.1
    # time stepping
    dt: float = 2.5e-5
    t_final: float = 0.04
    print_dump: int = 20
    # motion program
    scenario: str = "circle"
    curve: str = "cubic"
    p1: float = 0.25
    p2: float = 0.925
    t1: float = 0.01
    t2: float = 0.01
    t_rest: float = 0.0
    stroke_period: float = 2.0
    ups: float = 0.5
    # fiber stiffnesses
    k_target: float = 2.0e8
    k_spring: float = 1.0e8
    k_beam: float = 1.0e7
    # geometry
    radius: float = 0.15
    center_x: float = 0.4
    center_y: float = 0.5
    travel_x: float = 0.2
    travel_y: float = 0.0
    heart_width: float = 0.3
    contraction: float = 0.25
    gap_fraction: float = 0.1
    body_length: float = 1.0
    ds: float = None
    # plumbing
    deck_dir: str = None
    out_dir: str = "out"

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; "
                             f"choose from {SCENARIOS}")
        if self.curve not in CURVES:
            raise ValueError(f"unknown curve {self.curve!r}; choose from {CURVES}")
        if self.nx < 4 or self.ny < 4:
            raise ValueError("grid must be at least 4x4")
        if self.lx <= 0 or self.ly <= 0:
            raise ValueError("domain lengths must be positive")
        hx, hy = self.lx / self.nx, self.ly / self.ny
        if abs(hx - hy) > 1e-12 * max(hx, hy):
            raise ValueError(f"cells must be square: dx={hx}, dy={hy}")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_final < 0:
            raise ValueError("t_final must be nonnegative")
        if self.print_dump < 1:
            raise ValueError("print_dump must be a positive step count")
        if self.curve == "cubic" and not 0.0 < self.p1 < self.p2 < 1.0:
            raise ValueError(f"need 0 < p1 < p2 < 1, got ({self.p1}, {self.p2})")
        if self.ds is not None and self.ds <= 0:
            raise ValueError("marker spacing ds must be positive")
        if self.scenario in ("circle", "heart"):
            if self.t1 <= 0 or self.t2 <= 0:
                raise ValueError("phase durations t1 and t2 must be positive")
            if self.t_rest < 0:
                raise ValueError("t_rest must be nonnegative")
            if self.k_target <= 0:
                raise ValueError("k_target must be positive")
        if self.scenario == "circle" and self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.scenario == "heart":
            if self.heart_width <= 0:
                raise ValueError("heart_width must be positive")
            if not 0.0 < self.contraction < 1.0:
                raise ValueError("contraction must lie in (0, 1)")
            if not 0.0 < self.gap_fraction < 0.5:
                raise ValueError("gap_fraction must lie in (0, 0.5)")
        if self.scenario == "swimmer":
            if self.body_length <= 0:
                raise ValueError("body_length must be positive")
            if self.stroke_period <= 0:
                raise ValueError("stroke_period must be positive")
            if not 0.0 < self.ups < 1.0:
                raise ValueError("upstroke fraction must lie in (0, 1)")
            if self.k_spring <= 0 or self.k_beam <= 0:
                raise ValueError("k_spring and k_beam must be positive")

    @property
    def h(self):
        return self.lx / self.nx

    @property
    def marker_spacing(self):
        return self.ds if self.ds is not None else 0.5 * self.h

    def to_dict(self):
        return asdict(self)


def _preset(name, **kw):
    kw.setdefault("out_dir", name)
    return SimConfig(**kw)


PRESETS = {
    # travelling circle on the deliberately coarse grid; one full period
    # is t1 + t2 = 0.02 and the run covers two of them
    "circle-linear": _preset("circle-linear", curve="linear"),
    "circle-cubic": _preset("circle-cubic", curve="cubic"),
    # contract, hold, release; two beats of period 0.05
    "heart": _preset(
        "heart", scenario="heart", nx=64, ny=64, mu=0.05, dt=2.5e-5,
        t_final=0.1, print_dump=200, curve="cubic", p1=0.1, p2=0.9,
        t1=0.02, t_rest=0.01, t2=0.02, k_target=2.0e8,
        center_x=0.5, center_y=0.5, heart_width=0.3, contraction=0.25),
    # desk-scale swimmer: coarse grid and few markers, tuned only for
    # qualitative forward motion, not for publication-grade kinematics
    "swimmer-reduced": _preset(
        "swimmer-reduced", scenario="swimmer", nx=128, ny=64, lx=4.0, ly=2.0,
        rho=1000.0, mu=10.0, dt=2.0e-4, t_final=6.0, print_dump=1000,
        curve="cubic", p1=0.1, p2=0.9, stroke_period=2.0, ups=0.5,
        k_spring=1.0e8, k_beam=1.0e7, body_length=1.0, ds=1.0 / 64,
        center_x=1.8, center_y=1.0),
    # resolved swimmer; hours per run, kept out of the test suite
    "swimmer": _preset(
        "swimmer", scenario="swimmer", nx=512, ny=256, lx=8.0, ly=4.0,
        rho=1000.0, mu=10.0, dt=5.0e-5, t_final=12.0, print_dump=4000,
        curve="cubic", p1=0.1, p2=0.9, stroke_period=2.0, ups=0.5,
        k_spring=4.0e8, k_beam=4.0e7, body_length=1.0, ds=1.0 / 128,
        center_x=3.0, center_y=2.0),
}


def preset_config(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from "
                         f"{sorted(PRESETS)}") from None


_INT_KEYS = {"nx", "ny", "print_dump"}
_STR_KEYS = {"scenario", "curve", "deck_dir", "out_dir"}

# config-file (section, key) -> SimConfig field
_KEYMAP = {
    ("fluid", "nx"): "nx", ("fluid", "ny"): "ny",
    ("fluid", "lx"): "lx", ("fluid", "ly"): "ly",
    ("fluid", "rho"): "rho", ("fluid", "mu"): "mu",
    ("time", "dt"): "dt", ("time", "t_final"): "t_final",
    ("time", "print_dump"): "print_dump",
    ("scenario", "name"): "scenario", ("scenario", "curve"): "curve",
    ("scenario", "p1"): "p1", ("scenario", "p2"): "p2",
    ("scenario", "t1"): "t1", ("scenario", "t2"): "t2",
    ("scenario", "t_rest"): "t_rest",
    ("scenario", "stroke_period"): "stroke_period",
    ("scenario", "ups"): "ups",
    ("scenario", "k_target"): "k_target",
    ("scenario", "k_spring"): "k_spring",
    ("scenario", "k_beam"): "k_beam",
    ("scenario", "radius"): "radius",
    ("scenario", "center_x"): "center_x",
    ("scenario", "center_y"): "center_y",
    ("scenario", "travel_x"): "travel_x",
    ("scenario", "travel_y"): "travel_y",
    ("scenario", "heart_width"): "heart_width",
    ("scenario", "contraction"): "contraction",
    ("scenario", "gap_fraction"): "gap_fraction",
    ("scenario", "body_length"): "body_length",
    ("scenario", "ds"): "ds",
    ("scenario", "deck_dir"): "deck_dir",
    ("output", "dir"): "out_dir",
}


def _coerce(field, raw):
    if field in _INT_KEYS:
        return int(raw)
    if field in _STR_KEYS:
        return raw.strip()
    return float(raw)


def _line_of(path, key):
    """Best-effort line number of a config key, for error messages."""
    try:
        with open(path, "r") as fh:
            for lineno, line in enumerate(fh, start=1):
                stripped = line.split("#")[0].strip()
                if stripped.startswith(key) and "=" in stripped:
                    name = stripped.split("=")[0].strip()
                    if name == key:
                        return lineno
    except OSError:
        pass
    return None


def load_config(path):
    """Parse an INI-style run configuration into a validated SimConfig.

    Sections are [fluid], [time], [scenario], and [output]; every key has a
    default except the scenario name, which must be stated.  Unknown keys
    and sections warn, malformed values raise with the offending line.
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(f"config file not found: {path}")
    parser = configparser.ConfigParser(strict=True)
    try:
        with open(path, "r") as fh:
            parser.read_file(fh, source=str(path))
    except configparser.Error as exc:
        raise ValueError(f"{path}: {exc}") from None

    values = {}
    for section in parser.sections():
        if section not in {s for s, _ in _KEYMAP}:
            log.warning("%s: ignoring unknown section [%s]", path, section)
            continue
        for key in parser[section]:
            field = _KEYMAP.get((section, key))
            if field is None:
                lineno = _line_of(path, key)
                log.warning("%s:%s: ignoring unknown key %r in [%s]",
                            path, lineno if lineno else "?", key, section)
                continue
            raw = parser[section][key]
            try:
                values[field] = _coerce(field, raw)
            except ValueError:
                lineno = _line_of(path, key)
                raise ValueError(
                    f"{path}:{lineno if lineno else '?'}: cannot parse "
                    f"{key} = {raw!r}") from None
    if "scenario" not in values:
        raise ValueError(f"{path}: missing required key 'name' in [scenario]")
    return SimConfig(**values)


def apply_overrides(cfg, overrides):
    """Apply "field=value" strings on top of a config, revalidating."""
    values = {}
    for item in overrides:
        if "=" not in item:
            raise ValueError(f"override {item!r} is not of the form key=value")
        key, raw = (part.strip() for part in item.split("=", 1))
        if key not in {f for f in cfg.__dataclass_fields__}:
            raise ValueError(f"unknown config field {key!r}")
        values[key] = _coerce(key, raw)
    return replace(cfg, **values)


@dataclass(frozen=True)
class Scenario:
    """Immutable per-run problem setup produced by the builders."""

    name: str
    mesh: LagrangianMesh
    targets: TargetSet = None
    springs: SpringSet = None
    beams: BeamSet = None
    target_schedule: PhaseSchedule = None
    target_states: tuple = None
    beam_schedule: PhaseSchedule = None
    beam_states: tuple = None
    body_length: float = None
    head_index: int = 0


@dataclass(frozen=True)
class SimState:
    """Time-varying part of a simulation: fluid, markers, driven fibers."""

    time: float
    step: int
    fluid: FluidState
    x: np.ndarray
    targets: TargetSet = None
    beams: BeamSet = None


def _curve_for(cfg):
    return None if cfg.curve == "linear" else solve_cubic_coeffs(cfg.p1, cfg.p2)


def _build_circle(cfg):
    ds = cfg.marker_spacing
    n = max(8, int(round(2.0 * np.pi * cfg.radius / ds)))
    mesh = make_circle((cfg.center_x, cfg.center_y), cfg.radius, n)
    a = mesh.points.copy()
    b = a + np.array([cfg.travel_x, cfg.travel_y])
    curve = _curve_for(cfg)
    schedule = PhaseSchedule((Phase.blend(cfg.t1, 0, 1, curve),
                              Phase.blend(cfg.t2, 1, 0, curve)))
    targets = TargetSet(idx=np.arange(n), y=a.copy(),
                        k=np.full(n, cfg.k_target))
    return Scenario(name="circle", mesh=mesh, targets=targets,
                    target_schedule=schedule, target_states=(a, b))


def _build_heart(cfg):
    mesh, contracted = make_heart_states(
        (cfg.center_x, cfg.center_y), cfg.heart_width, cfg.contraction,
        cfg.marker_spacing, gap_fraction=cfg.gap_fraction)
    a = mesh.points.copy()
    curve = _curve_for(cfg)
    schedule = PhaseSchedule((Phase.blend(cfg.t1, 0, 1, curve),
                              Phase.rest(cfg.t_rest, 1),
                              Phase.blend(cfg.t2, 1, 0, curve)))
    n = mesh.n
    targets = TargetSet(idx=np.arange(n), y=a.copy(),
                        k=np.full(n, cfg.k_target))
    return Scenario(name="heart", mesh=mesh, targets=targets,
                    target_schedule=schedule, target_states=(a, contracted))


def _chain_sets(pts1, pts2, k_spring, k_beam):
    n = len(pts1)
    rest = np.linalg.norm(np.diff(pts1, axis=0), axis=1)
    springs = SpringSet(master=np.arange(n - 1), slave=np.arange(1, n),
                        k=np.full(n - 1, k_spring), rest=rest)
    c1 = compute_curvatures(pts1)
    c2 = compute_curvatures(pts2)
    beams = BeamSet(i1=np.arange(n - 2), i2=np.arange(1, n - 1),
                    i3=np.arange(2, n), k=np.full(n - 2, k_beam), c=c1.copy())
    return springs, beams, (c1, c2)


def _build_swimmer(cfg):
    mesh1, mesh2 = make_swimmer(cfg.body_length, cfg.marker_spacing)
    shift = np.array([cfg.center_x, cfg.center_y]) - mesh1.points[0]
    pts1 = mesh1.points + shift
    pts2 = mesh2.points + shift
    springs, beams, states = _chain_sets(pts1, pts2, cfg.k_spring, cfg.k_beam)
    # one stroke = downstroke (state 0 -> 1) then upstroke (state 1 -> 0)
    curve = _curve_for(cfg)
    dws = (1.0 - cfg.ups) * cfg.stroke_period
    schedule = PhaseSchedule((Phase.blend(dws, 0, 1, curve),
                              Phase.blend(cfg.ups * cfg.stroke_period, 1, 0,
                                          curve)))
    mesh = LagrangianMesh(points=pts1, ds=mesh1.ds, closed=False)
    return Scenario(name="swimmer", mesh=mesh, springs=springs, beams=beams,
                    beam_schedule=schedule, beam_states=states,
                    body_length=cfg.body_length)


_BUILDERS = {"circle": _build_circle, "heart": _build_heart,
             "swimmer": _build_swimmer}


def write_scenario_decks(cfg, deck_dir):
    """Write the scenario's geometry decks; returns the paths written."""
    scenario = _BUILDERS[cfg.scenario](cfg)
    os.makedirs(deck_dir, exist_ok=True)
    paths = []

    def path_of(name):
        p = os.path.join(deck_dir, name)
        paths.append(p)
        return p

    if scenario.target_states is not None:
        state_a, state_b = scenario.target_states
    else:
        mesh1, mesh2 = make_swimmer(cfg.body_length, cfg.marker_spacing)
        shift = np.array([cfg.center_x, cfg.center_y]) - mesh1.points[0]
        state_a, state_b = mesh1.points + shift, mesh2.points + shift
    fileio.write_points(path_of("state_a.vertex"), state_a)
    fileio.write_points(path_of("state_b.vertex"), state_b)
    if scenario.targets is not None:
        fileio.write_target_deck(path_of("nodes.target"),
                                 scenario.targets.idx, scenario.targets.k)
    if scenario.springs is not None:
        fileio.write_spring_deck(path_of("chain.spring"),
                                 scenario.springs.master,
                                 scenario.springs.slave,
                                 scenario.springs.k, scenario.springs.rest)
    if scenario.beams is not None:
        fileio.write_beam_deck(path_of("chain.beam"), scenario.beams.i1,
                               scenario.beams.i2, scenario.beams.i3,
                               scenario.beams.k, scenario.beams.c)
    return paths


def _load_from_decks(cfg):
    deck = cfg.deck_dir
    a = fileio.read_points(os.path.join(deck, "state_a.vertex"))
    b = fileio.read_points(os.path.join(deck, "state_b.vertex"))
    if a.shape != b.shape:
        raise ValueError(f"{deck}: state_a and state_b have different shapes")
    closed = cfg.scenario == "circle"
    seg = np.diff(a, axis=0)
    if closed:
        seg = np.vstack([seg, a[0] - a[-1]])
    ds = float(np.mean(np.linalg.norm(seg, axis=1)))
    mesh = LagrangianMesh(points=a.copy(), ds=ds, closed=closed)
    curve = _curve_for(cfg)
    if cfg.scenario in ("circle", "heart"):
        idx, k = fileio.read_target_deck(os.path.join(deck, "nodes.target"))
        targets = TargetSet(idx=idx, y=a[idx].copy(), k=k)
        phases = [Phase.blend(cfg.t1, 0, 1, curve)]
        if cfg.scenario == "heart":
            phases.append(Phase.rest(cfg.t_rest, 1))
        phases.append(Phase.blend(cfg.t2, 1, 0, curve))
        return Scenario(name=cfg.scenario, mesh=mesh, targets=targets,
                        target_schedule=PhaseSchedule(tuple(phases)),
                        target_states=(a[idx].copy(), b[idx].copy()))
    m, s, ks, rest = fileio.read_spring_deck(os.path.join(deck, "chain.spring"))
    springs = SpringSet(master=m, slave=s, k=ks, rest=rest)
    i1, i2, i3, kb, c = fileio.read_beam_deck(os.path.join(deck, "chain.beam"))
    beams = BeamSet(i1=i1, i2=i2, i3=i3, k=kb, c=c)
    states = (compute_curvatures(a), compute_curvatures(b))
    dws = (1.0 - cfg.ups) * cfg.stroke_period
    schedule = PhaseSchedule((Phase.blend(dws, 0, 1, curve),
                              Phase.blend(cfg.ups * cfg.stroke_period, 1, 0,
                                          curve)))
    return Scenario(name="swimmer", mesh=mesh, springs=springs, beams=beams,
                    beam_schedule=schedule, beam_states=states,
                    body_length=cfg.body_length)


def build_scenario(cfg):
    """Assemble the scenario from decks when deck_dir is set, else generate."""
    if cfg.deck_dir:
        return _load_from_decks(cfg)
    return _BUILDERS[cfg.scenario](cfg)


def initial_state(cfg, scenario):
    fluid = FluidState.quiescent(cfg.nx, cfg.ny, cfg.lx, cfg.ly,
                                 cfg.rho, cfg.mu)
    return SimState(time=0.0, step=0, fluid=fluid,
                    x=scenario.mesh.points.copy(),
                    targets=scenario.targets, beams=scenario.beams)


def step(sim, scenario, dt):
    """Advance the coupled state by one time step of size dt."""
    targets, beams = sim.targets, sim.beams
    if scenario.target_schedule is not None:
        targets = update_target_positions(targets, scenario.target_schedule,
                                          scenario.target_states, sim.time)
    if scenario.beam_schedule is not None:
        beams = update_beam_curvatures(beams, scenario.beam_schedule,
                                       scenario.beam_states, sim.time)

    f = target_force(sim.x, targets)
    f += spring_force(sim.x, scenario.springs)
    f += beam_force(sim.x, beams)

    fx, fy = spread_forces(sim.x, f, scenario.mesh.ds,
                           sim.fluid.nx, sim.fluid.ny, sim.fluid.h)
    fluid = advance_fluid(replace(sim.fluid, fx=fx, fy=fy), dt)

    velocity = interp_velocity(fluid.u, fluid.v, sim.x, fluid.h)
    x_new = sim.x + dt * velocity
    if not np.isfinite(x_new).all():
        raise RuntimeError(f"non-finite marker position at step {sim.step + 1}; "
                           "the coupling has gone unstable (reduce dt or "
                           "stiffness)")
    return SimState(time=sim.time + dt, step=sim.step + 1, fluid=fluid,
                    x=x_new, targets=targets, beams=beams)


def _write_trace(path, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write("time,head_x,head_y,centroid_x,centroid_y\n")
        for row in rows:
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def run(cfg):
    """Execute a configured run; returns a summary dictionary.

    Writes VTK dumps every print_dump steps (plus the initial state), a
    per-step marker trace, a dump table, and a manifest.  All written files
    are deterministic; wall time is only reported in the returned summary.
    """
    started = _time.perf_counter()
    scenario = build_scenario(cfg)
    sim = initial_state(cfg, scenario)
    out_dir = cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)

    files = []
    dump_rows = []

    def dump(index, state):
        files.extend(fileio.write_fields_vtk(state.fluid, state.x, index,
                                             out_dir))
        dump_rows.append((index, state.step, state.time))

    def trace_row(state):
        cx, cy = state.x.mean(axis=0)
        hx, hy = state.x[scenario.head_index]
        return (state.time, hx, hy, cx, cy)

    n_steps = int(round(cfg.t_final / cfg.dt))
    trace = [trace_row(sim)]
    dump(0, sim)
    next_log = _time.perf_counter() + 10.0
    for k in range(1, n_steps + 1):
        sim = step(sim, scenario, cfg.dt)
        # keep time exact as a multiple of dt instead of accumulating
        sim = replace(sim, time=k * cfg.dt)
        trace.append(trace_row(sim))
        if k % cfg.print_dump == 0:
            dump(k // cfg.print_dump, sim)
        if _time.perf_counter() > next_log:
            log.info("step %d/%d (t = %.6g)", k, n_steps, sim.time)
            next_log = _time.perf_counter() + 10.0

    trace_path = os.path.join(out_dir, "trace.csv")
    _write_trace(trace_path, trace)
    files.append(trace_path)

    dumps_path = os.path.join(out_dir, "dumps.csv")
    with open(dumps_path, "w", newline="\n") as fh:
        fh.write("dump,step,time\n")
        for index, step_no, t in dump_rows:
            fh.write(f"{index},{step_no},{'%.17g' % t}\n")
    files.append(dumps_path)

    manifest = {
        "scenario": cfg.scenario,
        "config": cfg.to_dict(),
        "steps": n_steps,
        "dumps": len(dump_rows),
        "files": sorted(os.path.basename(p) for p in files),
    }
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    return {
        "out_dir": out_dir,
        "steps": n_steps,
        "dumps": len(dump_rows),
        "wall_time_s": _time.perf_counter() - started,
        "manifest": manifest_path,
        "files": files + [manifest_path],
    }
