import numpy as np
import pytest

from umsrd.diagnostics import (DivergenceError, StepRecorder,
                               convergence_order, drift, error_norms, mass,
                               total_variation)
from umsrd.mesh import build_mesh_1d, build_mesh_2d_single_cut


def test_error_norms_volume_weighted():
    mesh = build_mesh_1d(40, 0.2)
    u = np.zeros(40)
    ex = np.zeros(40)
    u[mesh.cut_index] = 1.0  # error lives in the small cell only
    l1, linf = error_norms(u, ex, mesh)
    assert l1 == pytest.approx(0.2 * mesh.h)
    assert linf == 1.0
    with pytest.raises(ValueError):
        error_norms(u, ex[:-1], mesh)


def test_convergence_order():
    assert convergence_order(0.2, 0.1) == pytest.approx(1.0)
    assert convergence_order(0.4, 0.1) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        convergence_order(0.0, 0.1)


def test_total_variation_periodic_wrap():
    u = np.array([0.0, 1.0, 0.0, 0.0])
    assert total_variation(u) == 2.0
    u2 = np.array([1.0, 0.0, 0.0, 0.0])  # wrap contributes |1 - 0|
    assert total_variation(u2) == 2.0
    with pytest.raises(ValueError):
        total_variation(u, build_mesh_2d_single_cut(8, 0.2))


def test_mass_and_drift():
    mesh = build_mesh_1d(40, 0.2)
    u = np.ones(40)
    assert mass(u, mesh) == pytest.approx(1.0)
    v = u.copy()
    v[3] += 0.25
    v[7] -= 0.5
    assert drift(v, u) == pytest.approx(0.75)  # plain sum, not volume-weighted


def test_step_recorder():
    mesh = build_mesh_1d(40, 0.2)
    rec = StepRecorder()
    u = np.sin(2 * np.pi * mesh.centers)
    row = rec.record_step(3, 0.1, u, mesh)
    assert row.n == 3 and row.t == 0.1
    assert row.mass == pytest.approx(mass(u, mesh))
    assert row.tv == pytest.approx(total_variation(u, mesh))
    assert len(rec.rows) == 1


def test_divergence_error_carries_step():
    e = DivergenceError("boom", step=17)
    assert e.step == 17
    assert isinstance(e, RuntimeError)
