import numpy as np
import pytest

from umsrd.mesh import (build_mesh_1d, build_mesh_2d_single_cut,
                        build_mesh_2d_tilted, build_neighborhoods,
                        mesh_summary, uniform_mesh_1d)


def test_1d_widths_and_cut():
    m = build_mesh_1d(40, 0.2)
    assert m.h == 0.025
    assert m.widths.sum() == pytest.approx(1.0, abs=1e-15)
    k = m.cut_index
    assert k == 20
    assert m.widths[k] == pytest.approx(0.2 * m.h)
    assert m.widths[k + 1] == pytest.approx(1.8 * m.h)
    assert np.all(np.diff(m.centers) > 0)
    assert m.min_fraction == pytest.approx(0.2)


def test_1d_centers_consistent_with_widths():
    m = build_mesh_1d(50, 0.35, cut_position=0.3)
    edges = np.concatenate(([0.0], np.cumsum(m.widths)))
    assert m.centers == pytest.approx(0.5 * (edges[:-1] + edges[1:]))


def test_uniform_mesh():
    m = uniform_mesh_1d(16)
    assert m.cut_index is None
    assert np.all(m.widths == m.h)
    assert len(build_neighborhoods(m)) == 0


@pytest.mark.parametrize("n,alpha,pos", [
    (3, 0.2, 0.5),      # too few cells
    (40, 0.0, 0.5),     # fraction must be positive
    (40, 0.5, 0.5),     # not a small cell
    (40, 0.2, 0.0),     # cut needs a left partner
])
def test_1d_validation(n, alpha, pos):
    with pytest.raises(ValueError):
        build_mesh_1d(n, alpha, pos)


def test_neighborhood_1d():
    m = build_mesh_1d(50, 0.2)
    nbs = build_neighborhoods(m)
    assert len(nbs) == 1
    nb = nbs[0]
    assert nb.members == (24, 25)
    assert nb.weights == {24: 1.0, 25: 1.0}
    assert nb.weighted_volume == pytest.approx((1 + 0.2) * m.h)


def test_single_cut_2d_geometry():
    m = build_mesh_2d_single_cut(8, 0.2)
    assert m.volumes.sum() == pytest.approx(1.0, abs=1e-14)
    assert m.n_cells == 64
    (cc,) = m.cut_cells
    assert (cc.i, cc.j) == (4, 4)
    assert cc.fraction == pytest.approx(0.2)
    # the column above the cut absorbs the missing height
    assert m.heights[cc.j, cc.i] == pytest.approx(0.2 * m.h)
    assert m.heights[cc.j + 1, cc.i] == pytest.approx(1.8 * m.h)
    nbs = build_neighborhoods(m)
    assert len(nbs) == 1
    assert set(nbs[0].members) == {cc.index, cc.partner}


def test_tilted_2d_geometry():
    m = build_mesh_2d_tilted(74, 0.3, 0.35)
    assert m.volumes.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(m.volumes > 0)
    f = m.lower_frac[m.crossed]
    assert f.min() >= 0.05 and f.max() <= 0.95
    # crossed cells straddle the line y = 0.3 x + 0.35
    assert len(m.cut_cells) == 89
    nbs = build_neighborhoods(m)
    assert len(nbs) == len(m.cut_cells)
    # neighborhoods are disjoint
    all_members = [i for nb in nbs for i in nb.members]
    assert len(all_members) == len(set(all_members))


def test_tilted_faces_conserve():
    # every face moves mass from src to dst: signed contributions cancel
    m = build_mesh_2d_tilted(20, 0.3, 0.35)
    flux = np.zeros(m.n_cells)
    np.subtract.at(flux, m.face_src, m.face_length)
    np.add.at(flux, m.face_dst, m.face_length)
    assert flux.sum() == pytest.approx(0.0, abs=1e-13)
    # inflow and outflow perimeters agree per cell, so constants persist
    inflow = np.zeros(m.n_cells)
    outflow = np.zeros(m.n_cells)
    np.add.at(inflow, m.face_dst, m.face_length)
    np.add.at(outflow, m.face_src, m.face_length)
    assert inflow == pytest.approx(outflow, abs=1e-14)


def test_mesh_summary_json():
    import json
    s = mesh_summary(build_mesh_1d(8, 0.25))
    json.dumps(s)
    assert s["n_cells"] == 8
    m2 = build_mesh_2d_tilted(10, 0.3, 0.35)
    s2 = mesh_summary(m2)
    json.dumps(s2)
    assert len(s2["cut_cells"]) == len(m2.cut_cells)
