"""Incompressible Navier-Stokes on a doubly periodic grid.

Fourier pseudo-spectral projection scheme: the advection term is evaluated
explicitly in skew-symmetric form with 2/3-rule dealiasing, the viscous
term implicitly in Fourier space (stable for any viscosity), and
incompressibility is enforced by projecting onto divergence-free modes.
Pressure is recovered from the projection with a zero-mean gauge.  Square
cells are required so one mesh width h serves both axes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

__all__ = ["FluidState", "advance_fluid", "divergence", "max_divergence",
           "project_velocity", "vorticity"]

log = logging.getLogger(__name__)

_CELL_TOL = 1e-12


@dataclass(frozen=True)
class FluidState:
    """Velocity, pressure, and body-force fields on an (nx, ny) grid.

    Arrays are indexed [i, j] with i along x and j along y; x_i = i h,
    y_j = j h for mesh width h = lx / nx = ly / ny.
    """

    nx: int
    ny: int
    lx: float
    ly: float
    rho: float
    mu: float
    u: np.ndarray
    v: np.ndarray
    p: np.ndarray = None
    fx: np.ndarray = None
    fy: np.ndarray = None

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ValueError("grid must be at least 4x4")
        if self.rho <= 0 or self.mu < 0:
            raise ValueError("need rho > 0 and mu >= 0")
        hx, hy = self.lx / self.nx, self.ly / self.ny
        if abs(hx - hy) > _CELL_TOL * max(hx, hy):
            raise ValueError(f"cells must be square: dx={hx}, dy={hy}")
        if self.nx & (self.nx - 1) or self.ny & (self.ny - 1):
            log.warning("grid %dx%d is not a power of two; transforms will be slower",
                        self.nx, self.ny)
        shape = (self.nx, self.ny)
        for name in ("u", "v", "p", "fx", "fy"):
            arr = getattr(self, name)
            if arr is None:
                arr = np.zeros(shape)
            else:
                arr = np.asarray(arr, dtype=float)
                if arr.shape != shape:
                    raise ValueError(f"{name} must have shape {shape}")
            object.__setattr__(self, name, arr)

    @property
    def h(self):
        return self.lx / self.nx

    @property
    def nu(self):
        return self.mu / self.rho

    @staticmethod
    def quiescent(nx, ny, lx, ly, rho, mu):
        return FluidState(nx=nx, ny=ny, lx=lx, ly=ly, rho=rho, mu=mu,
                          u=np.zeros((nx, ny)), v=np.zeros((nx, ny)))


class _Spectral:
    """Wavenumber tables and the dealiasing mask for one grid."""

    def __init__(self, nx, ny, lx, ly):
        h = lx / nx
        self.kx = 2.0 * np.pi * np.fft.fftfreq(nx, d=h)[:, None]
        self.ky = 2.0 * np.pi * np.fft.rfftfreq(ny, d=h)[None, :]
        self.k2 = self.kx**2 + self.ky**2
        inv = np.zeros_like(self.k2)
        nonzero = self.k2 > 0
        inv[nonzero] = 1.0 / self.k2[nonzero]
        self.inv_k2 = inv
        # 2/3-rule: zero integer frequencies above a third of the grid size
        fx = np.abs(np.fft.fftfreq(nx, d=1.0 / nx))[:, None]
        fy = np.abs(np.fft.rfftfreq(ny, d=1.0 / ny))[None, :]
        self.dealias = (fx <= nx // 3) & (fy <= ny // 3)


_SPECTRAL_CACHE: dict = {}


def _ops(state):
    key = (state.nx, state.ny, round(state.lx, 15), round(state.ly, 15))
    ops = _SPECTRAL_CACHE.get(key)
    if ops is None:
        ops = _SPECTRAL_CACHE[key] = _Spectral(state.nx, state.ny, state.lx, state.ly)
    return ops


def project_velocity(u, v, lx, ly):
    """Remove the gradient part of (u, v) on the periodic domain."""
    nx, ny = u.shape
    ops = _Spectral(nx, ny, lx, ly)
    uh = np.fft.rfft2(u)
    vh = np.fft.rfft2(v)
    s = (ops.kx * uh + ops.ky * vh) * ops.inv_k2
    uh -= ops.kx * s
    vh -= ops.ky * s
    return np.fft.irfft2(uh, s=u.shape), np.fft.irfft2(vh, s=u.shape)


def advance_fluid(state, dt):
    """One semi-implicit projection step; returns the new state.

    Aborts when the advective CFL number max|u| dt / h exceeds 1 and warns
    above 0.5.  The body force carried by the state acts over this step.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    ops = _ops(state)
    h = state.h
    cmax = max(np.max(np.abs(state.u)), np.max(np.abs(state.v)), 0.0)
    cfl = cmax * dt / h
    if cfl > 1.0:
        raise RuntimeError(f"CFL violation: max|u| dt / h = {cfl:.3f} > 1; "
                           "reduce dt or refine the grid")
    if cfl > 0.5:
        log.warning("CFL number %.3f above 0.5; the explicit advection step "
                    "is close to its stability limit", cfl)

    shape = (state.nx, state.ny)
    uh = np.fft.rfft2(state.u)
    vh = np.fft.rfft2(state.v)

    # skew-symmetric advection from dealiased fields, products re-dealiased
    um = np.fft.irfft2(uh * ops.dealias, s=shape)
    vm = np.fft.irfft2(vh * ops.dealias, s=shape)
    ux = np.fft.irfft2(1j * ops.kx * uh * ops.dealias, s=shape)
    uy = np.fft.irfft2(1j * ops.ky * uh * ops.dealias, s=shape)
    vx = np.fft.irfft2(1j * ops.kx * vh * ops.dealias, s=shape)
    vy = np.fft.irfft2(1j * ops.ky * vh * ops.dealias, s=shape)
    adv_u = 0.5 * (np.fft.rfft2(um * ux + vm * uy)
                   + 1j * ops.kx * np.fft.rfft2(um * um)
                   + 1j * ops.ky * np.fft.rfft2(um * vm)) * ops.dealias
    adv_v = 0.5 * (np.fft.rfft2(um * vx + vm * vy)
                   + 1j * ops.kx * np.fft.rfft2(um * vm)
                   + 1j * ops.ky * np.fft.rfft2(vm * vm)) * ops.dealias

    ru = uh + dt * (np.fft.rfft2(state.fx) / state.rho - adv_u)
    rv = vh + dt * (np.fft.rfft2(state.fy) / state.rho - adv_v)

    # projection onto divergence-free modes; the removed gradient is dt/rho
    # times the pressure gradient, which fixes p up to its (zeroed) mean
    s = (ops.kx * ru + ops.ky * rv) * ops.inv_k2
    ru -= ops.kx * s
    rv -= ops.ky * s
    ph = -1j * state.rho * s / dt

    visc = 1.0 + dt * state.nu * ops.k2
    u_new = np.fft.irfft2(ru / visc, s=shape)
    v_new = np.fft.irfft2(rv / visc, s=shape)
    p_new = np.fft.irfft2(ph, s=shape)
    return replace(state, u=u_new, v=v_new, p=p_new)


def vorticity(state):
    """Curl of the velocity field, dv/dx - du/dy, evaluated spectrally."""
    ops = _ops(state)
    wh = 1j * ops.kx * np.fft.rfft2(state.v) - 1j * ops.ky * np.fft.rfft2(state.u)
    return np.fft.irfft2(wh, s=(state.nx, state.ny))


def divergence(state):
    """Spectral divergence field of the current velocity."""
    ops = _ops(state)
    dh = 1j * ops.kx * np.fft.rfft2(state.u) + 1j * ops.ky * np.fft.rfft2(state.v)
    return np.fft.irfft2(dh, s=(state.nx, state.ny))


def max_divergence(state):
    """Largest pointwise |div u|, the incompressibility diagnostic."""
    return float(np.max(np.abs(divergence(state))))
