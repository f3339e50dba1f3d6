import math

import numpy as np
import pytest

from pscmesh.delaunay import TetMesh, circumcentre_triangle, circumsphere_tet
from pscmesh.errors import MeshError

from oracles import brute_force_delaunay

UNIT = ((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))


def kernel_tets(mesh, ghost=False):
    out = set()
    for t in mesh.alive_tets():
        if ghost or not mesh.is_ghost(t):
            out.add(tuple(sorted(mesh.tets[t])))
    return out


def full_oracle(mesh):
    """Brute-force Delaunay over every alive point, shell included."""
    alive = [v for v in range(len(mesh.points)) if mesh.meta[v].alive]
    P = [mesh.points[v] for v in alive]
    raw = brute_force_delaunay(P)
    back = {i: v for i, v in enumerate(alive)}
    return {tuple(sorted(back[i] for i in quad)) for quad in raw}


def test_insert_star_counts():
    m = TetMesh(UNIT, seed=1)
    for p in [(0.2, 0.2, 0.2), (0.8, 0.2, 0.3), (0.5, 0.8, 0.25),
              (0.5, 0.4, 0.9)]:
        m.insert_point(p)
    assert len(kernel_tets(m)) == 1
    m.insert_point((0.5, 0.4, 0.4))  # interior of the single tet
    assert len(kernel_tets(m)) == 4


def test_duplicate_insert_is_flagged():
    m = TetMesh(UNIT, seed=1)
    r1 = m.insert_point((0.5, 0.5, 0.5))
    r2 = m.insert_point((0.5, 0.5, 0.5))
    assert not r1.duplicate
    assert r2.duplicate
    assert r2.vid == r1.vid


def test_insert_on_shared_facet_keeps_adjacency_symmetric():
    m = TetMesh(UNIT, seed=3)
    rng = np.random.default_rng(0)
    for p in rng.uniform(0.1, 0.9, (6, 3)):
        m.insert_point(tuple(p))
    # pick an interior facet and insert its barycentre
    for t in m.alive_tets():
        quad = m.tets[t]
        n = m.neigh[t][0]
        if n != -1:
            f = [quad[i] for i in (1, 3, 2)]
            p = tuple(sum(m.points[v][k] for v in f) / 3.0 for k in range(3))
            m.insert_point(p)
            break
    _assert_involution(m)


def _assert_involution(m):
    for t in m.alive_tets():
        for i in range(4):
            n = m.neigh[t][i]
            assert n != -2
            if n != -1:
                assert t in m.neigh[n], (t, n)


def test_random_insertions_match_bruteforce():
    rng = np.random.default_rng(42)
    m = TetMesh(UNIT, seed=7)
    for p in rng.uniform(0, 1, (60, 3)):
        m.insert_point(tuple(p))
    _assert_involution(m)
    assert kernel_tets(m, ghost=True) == full_oracle(m)


def test_insert_remove_roundtrip_restores_state():
    rng = np.random.default_rng(1)
    m = TetMesh(UNIT, seed=2)
    for p in rng.uniform(0, 1, (20, 3)):
        m.insert_point(tuple(p))
    before = kernel_tets(m, ghost=True)
    rec = m.insert_point((0.41, 0.52, 0.63))
    m.remove_point(rec.vid)
    assert kernel_tets(m, ghost=True) == before


def test_remove_back_to_single_star():
    m = TetMesh(UNIT, seed=5)
    for p in [(0.2, 0.2, 0.2), (0.8, 0.2, 0.3), (0.5, 0.8, 0.25),
              (0.5, 0.4, 0.9)]:
        m.insert_point(p)
    rec = m.insert_point((0.5, 0.4, 0.4))
    assert len(kernel_tets(m)) == 4
    m.remove_point(rec.vid)
    assert len(kernel_tets(m)) == 1


def test_remove_shell_vertex_is_error():
    m = TetMesh(UNIT, seed=1)
    with pytest.raises(MeshError):
        m.remove_point(3)
    with pytest.raises(MeshError):
        m.remove_point(99)


def test_randomized_insert_remove_sequences_stay_delaunay():
    rng = np.random.default_rng(2024)
    m = TetMesh(UNIT, seed=11)
    live = []
    ops = 0
    while ops < 300:
        if live and rng.random() < 0.35:
            k = live.pop(rng.integers(len(live)))
            m.remove_point(k)
        else:
            rec = m.insert_point(tuple(rng.uniform(0, 1, 3)))
            if not rec.duplicate:
                live.append(rec.vid)
        ops += 1
        if ops % 75 == 0:
            _assert_involution(m)
            assert kernel_tets(m, ghost=True) == full_oracle(m)
    assert kernel_tets(m, ghost=True) == full_oracle(m)


def test_orientation_always_positive():
    from pscmesh.predicates import orient3d
    rng = np.random.default_rng(3)
    m = TetMesh(UNIT, seed=4)
    for p in rng.uniform(0, 1, (40, 3)):
        m.insert_point(tuple(p))
    for t in m.alive_tets():
        assert orient3d(*(m.points[v] for v in m.tets[t])) > 0


def test_cavity_audit_mode():
    m = TetMesh(UNIT, seed=9)
    m.audit_cavity = True
    rng = np.random.default_rng(4)
    for p in rng.uniform(0, 1, (30, 3)):
        m.insert_point(tuple(p))  # raises if a cavity tet fails the in-ball check


# ----------------------------------------------------------------------
# circumcentres and Voronoi duals


def test_circumsphere_unit_right_tet():
    c, r2, ok = circumsphere_tet((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1))
    assert ok
    assert np.allclose(c, (0.5, 0.5, 0.5), atol=1e-12)
    assert abs(r2 - 0.75) < 1e-12


def test_circumsphere_regular_tet_is_centroid():
    pts = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    c, _r2, ok = circumsphere_tet(*pts)
    assert ok
    assert np.allclose(c, (0, 0, 0), atol=1e-12)


def test_circumsphere_equidistance_randomized():
    rng = np.random.default_rng(12)
    for _ in range(300):
        pts = rng.uniform(-1, 1, (4, 3))
        c, r2, ok = circumsphere_tet(*(tuple(p) for p in pts))
        if not ok:
            continue
        r = math.sqrt(r2)
        for p in pts:
            assert abs(math.dist(c, p) - r) <= 1e-9 * max(r, 1.0)


def test_voronoi_vertex_flags_near_degenerate():
    _c, _r2, ok = circumsphere_tet((0, 0, 0), (1, 0, 0), (0, 1, 0),
                                   (0.5, 0.5, 1e-9))
    assert not ok


def test_voronoi_edge_segment_and_ray():
    m = TetMesh(UNIT, seed=6)
    rng = np.random.default_rng(5)
    for p in rng.uniform(0.2, 0.8, (10, 3)):
        m.insert_point(tuple(p))
    seg_seen = ray_seen = False
    for t in m.alive_tets():
        for i in range(4):
            p1, p2, bounded = m.voronoi_edge(t, i)
            if bounded:
                n = m.neigh[t][i]
                assert np.allclose(p2, m.voronoi_vertex(n)[0])
                seg_seen = True
            else:
                # the clip never extends past the box (a circumcentre that
                # already sits outside just stays put)
                for ax in range(3):
                    lo = min(m.box_lo[ax], p1[ax]) - 1e-6
                    hi = max(m.box_hi[ax], p1[ax]) + 1e-6
                    assert lo <= p2[ax] <= hi
                ray_seen = True
    assert seg_seen and ray_seen


def test_voronoi_edges_orthogonal_to_facets():
    m = TetMesh(UNIT, seed=8)
    rng = np.random.default_rng(7)
    for p in rng.uniform(0, 1, (40, 3)):
        m.insert_point(tuple(p))
    from pscmesh.delaunay import _FACES
    for t in m.alive_tets():
        quad = m.tets[t]
        for i in range(4):
            if m.neigh[t][i] == -1:
                continue
            p1, p2, _b = m.voronoi_edge(t, i)
            seg = np.subtract(p2, p1)
            f = _FACES[i]
            for (x, y) in ((f[0], f[1]), (f[0], f[2])):
                e = np.subtract(m.points[quad[y]], m.points[quad[x]])
                # in-plane component of the dual segment stays at noise level
                assert abs(np.dot(seg, e)) <= 1e-9 * np.linalg.norm(e) \
                    * max(1.0, np.linalg.norm(seg))


def test_voronoi_face_pentagon_ring():
    # five points around the z axis plus the axis pair: the axis edge has a
    # pentagonal dual face orthogonal to it
    m = TetMesh(((-1, -1, -1), (1, 1, 1)), seed=10)
    ring_angles = [0.1, 1.4, 2.6, 3.9, 5.2]
    for a in ring_angles:
        m.insert_point((0.7 * math.cos(a), 0.7 * math.sin(a), 0.01 * a))
    ra = m.insert_point((0.0, 0.0, -0.6))
    rb = m.insert_point((0.0, 0.0, 0.6))
    vf = m.voronoi_face(ra.vid, rb.vid)
    assert vf.bounded
    assert len(vf.polygon) == 5
    axis = np.subtract(m.points[rb.vid], m.points[ra.vid])
    axis = axis / np.linalg.norm(axis)
    poly = np.asarray(vf.polygon)
    spread = poly - poly.mean(axis=0)
    assert np.abs(spread @ axis).max() <= 1e-9


def test_voronoi_face_normals_parallel_to_edges():
    m = TetMesh(UNIT, seed=12)
    rng = np.random.default_rng(13)
    for p in rng.uniform(0, 1, (30, 3)):
        m.insert_point(tuple(p))
    seen = set()
    for t in m.alive_tets():
        quad = m.tets[t]
        for a in range(4):
            for b in range(a + 1, 4):
                u, w = sorted((quad[a], quad[b]))
                if (u, w) in seen or w < 8:
                    continue
                seen.add((u, w))
                if u < 8:
                    continue
                vf = m.voronoi_face(u, w)
                if not vf.bounded or len(vf.polygon) < 3:
                    continue
                d = np.subtract(m.points[w], m.points[u])
                d = d / np.linalg.norm(d)
                poly = np.asarray(vf.polygon)
                spread = poly - poly.mean(axis=0)
                assert np.abs(spread @ d).max() <= 1e-9 * max(
                    1.0, np.abs(spread).max())


def test_voronoi_face_hull_edge_marked_unbounded():
    m = TetMesh(UNIT, seed=14)
    m.insert_point((0.5, 0.5, 0.5))
    # a box edge: two shell corners differing in one coordinate
    vf = m.voronoi_face(0, 1)
    assert not vf.bounded
    assert len(vf.polygon) >= 3


def test_nearest_vertex():
    m = TetMesh(UNIT, seed=15)
    rng = np.random.default_rng(21)
    pts = rng.uniform(0, 1, (50, 3))
    vids = [m.insert_point(tuple(p)).vid for p in pts]
    for q in rng.uniform(0, 1, (100, 3)):
        got = m.nearest_vertex(tuple(q))
        best = min(range(len(m.points)),
                   key=lambda v: math.dist(m.points[v], q))
        assert math.dist(m.points[got], q) <= math.dist(m.points[best], q) + 1e-15


def test_triangle_circumcentre():
    c, r2 = circumcentre_triangle((0, 0, 0), (1, 0, 0), (0, 1, 0))
    assert np.allclose(c, (0.5, 0.5, 0.0), atol=1e-14)
    assert abs(r2 - 0.5) < 1e-14
