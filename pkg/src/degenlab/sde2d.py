"""Euler integrator on the triangle {x >= 0, y >= 0, x + y <= 1}.

The SDE combines three degenerate noise directions whose amplitudes vanish
on the corresponding edges, so the simplex is invariant for the continuous
dynamics.  The discrete step can still exit; exits are handled by a
per-coordinate cutoff at 0 followed, if needed, by a diagonal rescale that
restores x + y to its pre-step value.
"""

from __future__ import annotations

import time as _time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import kernels
from .errors import ValidationError
from .operators import TriangleSpec

_CHUNK = 16384


@dataclass(frozen=True)
class SchemeConfig2D:
    dt: float
    t_final: float
    snapshot_times: tuple = ()

    def __post_init__(self):
        if not (self.dt > 0.0):
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if not (self.t_final > 0.0):
            raise ValidationError(f"t_final must be positive, got {self.t_final}")
        times = tuple(float(t) for t in self.snapshot_times)
        if any(t < 0.0 or t > self.t_final + 1e-12 for t in times):
            raise ValidationError("snapshot_times must lie in [0, t_final]")
        object.__setattr__(self, "snapshot_times", tuple(sorted(times)))

    def to_dict(self) -> dict:
        return {"dt": self.dt, "t_final": self.t_final, "snapshot_times": list(self.snapshot_times)}

    @classmethod
    def from_dict(cls, d: dict) -> "SchemeConfig2D":
        try:
            return cls(
                dt=float(d["dt"]),
                t_final=float(d["t_final"]),
                snapshot_times=tuple(d.get("snapshot_times", ())),
            )
        except KeyError as exc:
            raise ValidationError(f"scheme config missing field {exc}") from exc


@dataclass
class EnsembleSnapshot2D:
    time: float
    x: np.ndarray
    y: np.ndarray


@dataclass
class SimulationResult2D:
    snapshots: list
    cutoff_x: int
    cutoff_y: int
    rescale: int
    n_steps: int
    backend: str
    wall_time: float
    seed: int


def drift_2d(tri: TriangleSpec, x, y):
    """Deterministic part of the triangle SDE, vectorized."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    g12, g13, g23 = tri.gamma12, tri.gamma13, tri.gamma23
    dx = g12 * (y - x) + g23 * (y - 1.0) * x + g13 * (x - 1.0) * (x - 1.0)
    dy = -g12 * (y - x) + g23 * (y - 1.0) * (y - 1.0) + g13 * (x - 1.0) * y
    return dx, dy


def step_euler_2d(tri: TriangleSpec, x, y, dt: float, dW1, dW2, dW3):
    """One explicit step with given Brownian increments (variance dt each).

    Returns (x', y') after cutoff-then-rescale boundary handling.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    g12, g13, g23 = tri.gamma12, tri.gamma13, tri.gamma23
    dx, dy = drift_2d(tri, x, y)
    s1 = np.sqrt(2.0 * g13 * x)
    s2 = np.sqrt(2.0 * g23 * y)
    s3 = np.sqrt(2.0 * g12 * x * y)
    xn = x + dx * dt + s1 * (x - 1.0) * dW1 + s2 * x * dW2 + s3 * dW3
    yn = y + dy * dt + s1 * y * dW1 + s2 * (y - 1.0) * dW2 - s3 * dW3
    xn = np.maximum(xn, 0.0)
    yn = np.maximum(yn, 0.0)
    ssum = xn + yn
    over = ssum > 1.0
    factor = np.where(over, (x + y) / np.where(over, ssum, 1.0), 1.0)
    return xn * factor, yn * factor


InitSpec2D = Union[tuple, np.ndarray]


def simulate_ensemble_2d(
    tri: TriangleSpec,
    cfg: SchemeConfig2D,
    n_particles: int,
    seed: int,
    init: InitSpec2D = (0.1, 0.1),
    threads: int = 1,
    particle_index_offset: int = 0,
) -> SimulationResult2D:
    """Run N triangle particles to t_final with ordered snapshots."""
    if n_particles <= 0:
        raise ValidationError("n_particles must be positive")
    t0 = _time.perf_counter()
    from .rng import stream_keys

    keys = stream_keys(seed, np.arange(particle_index_offset, particle_index_offset + n_particles))

    if isinstance(init, tuple) and len(init) == 2 and np.ndim(init[0]) == 0:
        x = np.full(n_particles, float(init[0]))
        y = np.full(n_particles, float(init[1]))
    else:
        arr = np.asarray(init, dtype=float)
        if arr.shape != (n_particles, 2):
            raise ValidationError(f"initial condition has shape {arr.shape}, expected ({n_particles}, 2)")
        x = arr[:, 0].copy()
        y = arr[:, 1].copy()
    if np.any(x < 0.0) or np.any(y < 0.0) or np.any(x + y > 1.0 + 1e-12):
        raise ValidationError("initial points must lie in the triangle x,y >= 0, x+y <= 1")

    n_steps = int(round(cfg.t_final / cfg.dt))
    snap_at: dict[int, float] = {}
    for t in cfg.snapshot_times:
        snap_at.setdefault(int(round(t / cfg.dt)), float(t))
    snapshots: list[EnsembleSnapshot2D] = []
    cutoff_x = cutoff_y = rescale = 0

    chunks = [slice(i, min(i + _CHUNK, n_particles)) for i in range(0, n_particles, _CHUNK)]

    def run_chunk(sl, step):
        return kernels.step_chunk_2d(
            x[sl], y[sl], keys[sl], step,
            tri.gamma12, tri.gamma13, tri.gamma23, cfg.dt,
        )

    if 0 in snap_at:
        snapshots.append(EnsembleSnapshot2D(time=snap_at[0], x=x.copy(), y=y.copy()))

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for step in range(n_steps):
            if pool is not None:
                results = list(pool.map(lambda sl: run_chunk(sl, step), chunks))
            else:
                results = [run_chunk(sl, step) for sl in chunks]
            for cx, cy, rs in results:
                cutoff_x += cx
                cutoff_y += cy
                rescale += rs
            if (step + 1) in snap_at:
                snapshots.append(EnsembleSnapshot2D(time=snap_at[step + 1], x=x.copy(), y=y.copy()))
    finally:
        if pool is not None:
            pool.shutdown()

    return SimulationResult2D(
        snapshots=snapshots,
        cutoff_x=cutoff_x,
        cutoff_y=cutoff_y,
        rescale=rescale,
        n_steps=n_steps,
        backend=kernels.BACKEND,
        wall_time=_time.perf_counter() - t0,
        seed=int(seed),
    )
