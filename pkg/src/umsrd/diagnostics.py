"""Error norms, total variation, conservation and drift diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DivergenceError(RuntimeError):
    """A scheme produced non-finite cell values."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


def error_norms(u: np.ndarray, exact: np.ndarray, mesh) -> tuple[float, float]:
    """Volume-weighted L1 error and max-norm error against a reference field."""
    if u.shape != exact.shape:
        raise ValueError("fields must be aligned")
    diff = np.abs(u - exact)
    return float(np.dot(mesh.volumes, diff)), float(diff.max())


def convergence_order(e_coarse: float, e_fine: float) -> float:
    """Observed order log2(E_coarse / E_fine) for a halved grid spacing."""
    if e_coarse <= 0 or e_fine <= 0:
        raise ValueError("errors must be positive to measure a rate")
    return float(np.log2(e_coarse / e_fine))


def total_variation(u: np.ndarray, mesh=None) -> float:
    """Sum of absolute first differences with periodic closure (1D)."""
    if mesh is not None and mesh.dim != 1:
        raise ValueError("total variation is defined on 1D meshes only")
    return float(np.abs(u - np.roll(u, 1)).sum())


def mass(u: np.ndarray, mesh) -> float:
    """Total conserved quantity sum(V_i * u_i)."""
    return float(np.dot(mesh.volumes, u))


def drift(u_k: np.ndarray, u_0: np.ndarray, mesh=None) -> float:
    """Accumulated change from the initial state, sum_i |u_k,i - u_0,i|."""
    return float(np.abs(u_k - u_0).sum())


@dataclass
class StepDiagnostics:
    """Per-step record: time, total variation, mass, amplitude, blending."""

    n: int
    t: float
    tv: float
    mass: float
    max_abs: float
    blend_records: object | None = None


@dataclass
class StepRecorder:
    """Accumulates one StepDiagnostics row per recorded step."""

    rows: list = field(default_factory=list)

    def record_step(self, n, t, u, mesh, blend_records=None,
                    with_tv=True) -> StepDiagnostics:
        row = StepDiagnostics(
            n=n,
            t=t,
            tv=total_variation(u, mesh) if (with_tv and mesh.dim == 1) else float("nan"),
            mass=mass(u, mesh),
            max_abs=float(np.abs(u).max()),
            blend_records=blend_records,
        )
        self.rows.append(row)
        return row
