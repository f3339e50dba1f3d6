import math

import numpy as np

from pscmesh.config import GridSizing, SizingField
from pscmesh.quality import (area_length, dihedral_angles, relative_edge_length,
                             triangle_angles, volume_length)

from oracles import random_rotation

EQUILATERAL = [(0, 0, 0), (1, 0, 0), (0.5, math.sqrt(3) / 2, 0)]
REGULAR = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
CORNER = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]


def test_area_length_anchors():
    assert abs(area_length(*EQUILATERAL) - 1.0) < 1e-12
    assert area_length((0, 0, 0), (1, 0, 0), (2, 0, 0)) == 0.0
    assert abs(area_length((0, 0, 0), (1, 0, 0), (0, 1, 0))
               - math.sqrt(3) / 2) < 1e-12


def test_volume_length_anchors():
    assert abs(volume_length(*REGULAR) - 1.0) < 1e-12
    assert volume_length((0, 0, 0), (1, 0, 0), (0, 1, 0), (0.4, 0.4, 0)) == 0.0
    # right-corner tet: V = 1/6, mean squared edge 3/2
    want = 6 * math.sqrt(2) * (1 / 6.0) / (1.5 ** 1.5)
    assert abs(volume_length(*CORNER) - want) < 1e-12
    assert abs(want - 0.7698003589195010) < 1e-12


def test_angles():
    assert np.allclose(triangle_angles(*EQUILATERAL), [60, 60, 60], atol=1e-12)
    regs = dihedral_angles(*REGULAR)
    assert np.allclose(regs, [math.degrees(math.acos(1 / 3.0))] * 6, atol=1e-9)
    assert abs(regs[0] - 70.53) < 0.01
    # right-corner tet: three right dihedrals along the legs, and
    # arccos(1/sqrt(3)) along the hypotenuse-face edges
    corner = sorted(dihedral_angles(*CORNER))
    want = sorted([90.0] * 3 + [math.degrees(math.acos(1 / math.sqrt(3)))] * 3)
    assert np.allclose(corner, want, atol=1e-9)


def test_dihedral_matches_face_normal_oracle():
    rng = np.random.default_rng(3)
    for _ in range(100):
        pts = rng.uniform(-1, 1, (4, 3))
        if abs(np.linalg.det(pts[1:] - pts[0])) < 1e-3:
            continue
        angles = dihedral_angles(*(tuple(p) for p in pts))
        pairs = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)),
                 ((1, 2), (0, 3)), ((1, 3), (0, 2)), ((2, 3), (0, 1))]
        for ang, ((i, j), (k, l)) in zip(angles, pairs):
            # oracle: angle between outward face normals is pi - dihedral
            n1 = np.cross(pts[j] - pts[i], pts[k] - pts[i])
            n2 = np.cross(pts[l] - pts[i], pts[j] - pts[i])
            cosv = n1 @ n2 / (np.linalg.norm(n1) * np.linalg.norm(n2))
            want = 180.0 - math.degrees(math.acos(max(-1.0, min(1.0, cosv))))
            assert abs(ang - want) < 1e-6


def test_scale_invariance():
    rng = np.random.default_rng(5)
    for _ in range(200):
        tri = rng.uniform(-1, 1, (3, 3))
        tet = rng.uniform(-1, 1, (4, 3))
        s = 10.0 ** rng.uniform(-6, 6)
        a0 = area_length(*(tuple(p) for p in tri))
        a1 = area_length(*(tuple(p * s) for p in tri))
        v0 = volume_length(*(tuple(p) for p in tet))
        v1 = volume_length(*(tuple(p * s) for p in tet))
        assert abs(a0 - a1) <= 1e-12 * max(a0, 1e-30)
        assert abs(v0 - v1) <= 1e-12 * max(v0, 1e-30)


def test_permutation_and_rotation_invariance():
    rng = np.random.default_rng(6)
    for _ in range(100):
        tet = rng.uniform(-1, 1, (4, 3))
        v0 = volume_length(*(tuple(p) for p in tet))
        perm = rng.permutation(4)
        assert abs(volume_length(*(tuple(tet[i]) for i in perm)) - v0) < 1e-12
        R = random_rotation(rng)
        assert abs(volume_length(*(tuple(R @ p) for p in tet)) - v0) < 1e-9


def test_quality_bounded_by_one_with_regular_maximisers():
    rng = np.random.default_rng(7)
    for _ in range(500):
        tri = rng.uniform(-1, 1, (3, 3))
        tet = rng.uniform(-1, 1, (4, 3))
        assert area_length(*(tuple(p) for p in tri)) <= 1.0 + 1e-9
        assert volume_length(*(tuple(p) for p in tet)) <= 1.0 + 1e-9
    # local perturbations of the regular elements never beat 1
    for _ in range(200):
        tet = np.asarray(REGULAR, dtype=float) + rng.normal(0, 1e-3, (4, 3))
        assert volume_length(*(tuple(p) for p in tet)) <= 1.0 + 1e-9
        tri = np.asarray(EQUILATERAL, dtype=float) + rng.normal(0, 1e-3, (3, 3))
        assert area_length(*(tuple(p) for p in tri)) <= 1.0 + 1e-9


def test_relative_edge_length():
    s = SizingField(h0=0.2)
    assert abs(relative_edge_length((0, 0, 0), (0.2, 0, 0), s) - 1.0) < 1e-12
    assert abs(relative_edge_length((0, 0, 0), (0.3, 0, 0), s) - 1.5) < 1e-12


def test_relative_edge_length_gridded_matches_trilinear_oracle():
    rng = np.random.default_rng(8)
    dims = (4, 3, 5)
    vals = rng.uniform(0.1, 0.5, dims[0] * dims[1] * dims[2])
    grid = GridSizing((0, 0, 0), (0.5, 0.5, 0.5), dims, vals)
    s = SizingField(grid=grid)
    V = vals.reshape(dims[2], dims[1], dims[0])

    def oracle(p):
        fx = np.clip(p[0] / 0.5, 0, dims[0] - 1)
        fy = np.clip(p[1] / 0.5, 0, dims[1] - 1)
        fz = np.clip(p[2] / 0.5, 0, dims[2] - 1)
        i, j, k = (min(int(fx), dims[0] - 2), min(int(fy), dims[1] - 2),
                   min(int(fz), dims[2] - 2))
        tx, ty, tz = fx - i, fy - j, fz - k
        acc = 0.0
        for dz in (0, 1):
            for dy in (0, 1):
                for dx in (0, 1):
                    wgt = ((tx if dx else 1 - tx) * (ty if dy else 1 - ty)
                           * (tz if dz else 1 - tz))
                    acc += wgt * V[k + dz, j + dy, i + dx]
        return acc

    for _ in range(200):
        a = rng.uniform(-0.2, 2.2, 3)
        b = rng.uniform(-0.2, 2.2, 3)
        mid = tuple((a + b) / 2)
        want = math.dist(a, b) / oracle(mid)
        got = relative_edge_length(tuple(a), tuple(b), s)
        assert abs(got - want) < 1e-12 * max(1.0, want)


def test_report_single_regular_tet():
    from pscmesh.quality import build_report

    class _Mesh:
        points = {i: p for i, p in enumerate(REGULAR)}

    class _RS:
        edges = {}
        tris = {}
        tets = {(0, 1, 2, 3): None}

    rep = build_report(_Mesh, _RS, SizingField(h0=1.0))
    hist = rep.histograms["volume_length"]
    assert hist[-1] == 1 and hist[:-1].sum() == 0
    assert rep.counts["volume_tets"] == 1
    assert rep.counts["points"] == 4


def test_report_empty_surface():
    from pscmesh.quality import build_report

    class _Mesh:
        points = {}

    class _RS:
        edges = {}
        tris = {}
        tets = {}

    rep = build_report(_Mesh, _RS, SizingField(h0=1.0))
    assert rep.histograms["area_length"].sum() == 0
    assert rep.counts["surface_tris"] == 0
