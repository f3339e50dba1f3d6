import math

import numpy as np
import pytest

from pscmesh.errors import GeometryError, ParseError, ValidationError
from pscmesh.geometry import PiecewiseComplex, load_complex, parse_complex, \
    write_complex
from pscmesh.models import cube, icosphere, wedge

from oracles import (circle_surface_hits, polygon_curve_hits, random_rotation,
                     segment_surface_hits, sphere_curve_hits, winding_numbers)


def flat_square(half=2.0, z=0.0, patch=0):
    # two-triangle square patch in the plane z = const
    verts = [(-half, -half, z), (half, -half, z), (half, half, z),
             (-half, half, z)]
    tris = [(0, 1, 2, patch), (0, 2, 3, patch)]
    return PiecewiseComplex(verts, [], tris)


# ----------------------------------------------------------------------
# parsing and validation


def test_parse_smallest_valid_surface():
    c = parse_complex("v 0 0 0\nv 1 0 0\nv 0 1 0\nt 0 1 2 0\n")
    assert len(c.triangles) == 1
    assert not c.segments


def test_parse_dangling_vertex_is_error():
    with pytest.raises(ValidationError):
        parse_complex("v 0 0 0\nv 1 0 0\nv 0 1 0\nt 0 1 99 0\n")


def test_parse_bad_record_is_error():
    with pytest.raises(ParseError):
        parse_complex("v 0 0 0\nq 1 2 3\n")
    with pytest.raises(ParseError):
        parse_complex("v 0 0 zzz\n")


def test_duplicate_segment_is_error():
    with pytest.raises(ValidationError):
        parse_complex("v 0 0 0\nv 1 0 0\ne 0 1 0\ne 1 0 0\n")


def test_branching_polyline_is_error():
    text = ("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n"
            "e 0 1 0\ne 0 2 0\ne 0 3 0\n")
    with pytest.raises(ValidationError):
        parse_complex(text)


def test_cube_roundtrip(tmp_path):
    path = tmp_path / "cube.psc"
    write_complex(cube(), str(path))
    c = load_complex(str(path))
    assert len(c.vertices) == 8
    assert len(c.segments) == 12
    assert len(c.triangles) == 12
    assert c.surface_closed
    assert c.point_in_volume((0.5, 0.5, 0.5))
    w = winding_numbers([(0.5, 0.5, 0.5)], c.vertices, c.triangles)[0]
    assert abs(abs(w) - 1.0) < 1e-9


# ----------------------------------------------------------------------
# sharp features


def test_cube_features():
    f = cube().detect_sharp_features(math.radians(30))
    assert len(f.crease_edges) == 12
    assert f.corner_vertices == set(range(8))
    assert f.acute_apexes == []


def test_two_segments_meeting_at_20_1_degrees():
    ang = math.radians(20.1)
    verts = [(1.0, 0.0, 0.0), (0.0, 0.0, 0.0),
             (math.cos(ang), math.sin(ang), 0.0)]
    c = PiecewiseComplex(verts, [(0, 1, 0), (1, 2, 0)], [])
    f = c.detect_sharp_features()
    assert len(f.acute_apexes) == 1
    v, _pair, a = f.acute_apexes[0]
    assert v == 1
    assert abs(a - ang) < 1e-12


def test_flat_square_boundary_edges_are_creases():
    c = flat_square()
    f = c.detect_sharp_features(math.radians(30))
    # interior diagonal is flat; the four boundary edges are creases but
    # untagged (no curve network), so they surface in the untagged list
    assert len(f.untagged_creases) == 4
    assert not f.crease_edges


def test_features_invariant_under_rigid_motion():
    rng = np.random.default_rng(2)
    base = wedge()
    f0 = base.detect_sharp_features()
    angles0 = sorted(a for _v, _p, a in f0.acute_apexes)
    for _ in range(5):
        R = random_rotation(rng)
        shift = rng.uniform(-3, 3, 3)
        verts = (np.asarray(base.vertices) @ R.T) + shift
        c = PiecewiseComplex(verts, base.segments, base.triangles)
        f = c.detect_sharp_features()
        assert f.corner_vertices == f0.corner_vertices
        assert f.crease_edges == f0.crease_edges
        angles = sorted(a for _v, _p, a in f.acute_apexes)
        assert np.allclose(angles, angles0, atol=1e-12)


# ----------------------------------------------------------------------
# intersection oracle: examples


def test_polygon_curve_axis_crossing():
    c = PiecewiseComplex([(0, 0, -1), (0, 0, 1)], [(0, 1, 7)], [])
    square = [(-0.5, -0.5, 0), (0.5, -0.5, 0), (0.5, 0.5, 0), (-0.5, 0.5, 0)]
    hits = c.intersect_polygon_curve(square)
    assert len(hits) == 1
    pt, cid = hits[0]
    assert cid == 7
    assert np.allclose(pt, (0, 0, 0), atol=1e-12)


def test_polygon_curve_disjoint():
    c = PiecewiseComplex([(5, 5, -1), (5, 5, 1)], [(0, 1, 0)], [])
    square = [(-0.5, -0.5, 0), (0.5, -0.5, 0), (0.5, 0.5, 0), (-0.5, 0.5, 0)]
    assert c.intersect_polygon_curve(square) == []


def test_polygon_curve_degenerate_polygon_warns():
    c = PiecewiseComplex([(0, 0, -1), (0, 0, 1)], [(0, 1, 0)], [])
    line = [(0, 0, 0), (1, 0, 0), (2, 0, 0)]
    with pytest.warns(UserWarning):
        assert c.intersect_polygon_curve(line) == []


def test_polygon_curve_matches_bruteforce_on_random_polyline():
    rng = np.random.default_rng(4)
    pts = np.cumsum(rng.uniform(-0.3, 0.3, (101, 3)), axis=0)
    segs = [(i, i + 1, i % 5) for i in range(100)]
    c = PiecewiseComplex(pts, segs, [])
    for trial in range(500):
        centre = rng.uniform(-1.5, 1.5, 3)
        R = random_rotation(rng)
        radius = rng.uniform(0.3, 2.0)
        k = rng.integers(3, 8)
        ang = np.sort(rng.uniform(0, 2 * math.pi, k))
        poly = [centre + radius * (math.cos(t) * R[0] + math.sin(t) * R[1])
                for t in ang]
        got = c.intersect_polygon_curve([tuple(p) for p in poly])
        want = polygon_curve_hits(poly, pts, segs)
        assert len(got) == len(want)
        for g, w in zip(sorted(got), sorted(want)):
            assert math.dist(g[0], w[0]) <= 1e-9
            assert g[1] == w[1]


def test_segment_surface_single_patch_hit():
    c = flat_square()
    hits = c.intersect_segment_surface((0, 0, -1), (0, 0, 1))
    assert len(hits) == 1
    assert np.allclose(hits[0][0], (0, 0, 0), atol=1e-12)
    assert c.intersect_segment_surface((0, 0, 2), (1, 1, 2)) == []


def test_segment_surface_chord_through_sphere():
    c = icosphere(2)
    a, b = (-2.0, 0.05, 0.07), (2.0, 0.05, 0.07)
    got = c.intersect_segment_surface(a, b)
    want = segment_surface_hits(a, b, c.vertices, c.triangles)
    assert len(got) == 2 == len(want)
    for g, w in zip(sorted(got), sorted(want)):
        assert math.dist(g[0], w[0]) <= 1e-9


def test_segment_surface_matches_bruteforce_randomised():
    c = icosphere(1)
    rng = np.random.default_rng(9)
    for _ in range(300):
        a = tuple(rng.uniform(-2, 2, 3))
        b = tuple(rng.uniform(-2, 2, 3))
        got = sorted(h[0] for h in c.intersect_segment_surface(a, b))
        want = sorted(h[0] for h in
                      segment_surface_hits(a, b, c.vertices, c.triangles))
        assert len(got) == len(want)
        for g, w in zip(got, want):
            assert math.dist(g, w) <= 1e-9


def test_point_in_volume_examples():
    c = cube()
    assert c.point_in_volume((0.5, 0.5, 0.5))
    assert not c.point_in_volume((2.0, 0.0, 0.0))


def test_point_in_volume_open_surface_is_configuration_error():
    c = flat_square()
    with pytest.raises(GeometryError):
        c.point_in_volume((0, 0, 0))


def test_point_in_volume_matches_winding_numbers():
    c = icosphere(2)
    rng = np.random.default_rng(31)
    pts = rng.uniform(-1.4, 1.4, (1000, 3))
    w = winding_numbers(pts, c.vertices, c.triangles)
    # skip points hugging the surface where both definitions are fragile
    keep = np.abs(np.linalg.norm(pts, axis=1) - 1.0) > 1e-3
    agree = [c.point_in_volume(tuple(p)) == (abs(w[i]) > 0.5)
             for i, p in enumerate(pts) if keep[i]]
    assert all(agree)


def test_sphere_curve_examples():
    c = PiecewiseComplex([(-1, 0, 0), (1, 0, 0)], [(0, 1, 3)], [])
    hits = sorted(c.intersect_sphere_curve((0, 0, 0), 0.5))
    assert len(hits) == 2
    assert np.allclose(hits, [(-0.5, 0, 0), (0.5, 0, 0)], atol=1e-12)
    assert c.intersect_sphere_curve((0, 0, 0), 5.0) == []


def test_sphere_curve_matches_bruteforce_on_circle_polyline():
    n = 64
    verts = [(math.cos(2 * math.pi * k / n), math.sin(2 * math.pi * k / n), 0.0)
             for k in range(n)]
    segs = [(k, (k + 1) % n, 0) for k in range(n)]
    c = PiecewiseComplex(verts, segs, [])
    rng = np.random.default_rng(6)
    for _ in range(500):
        centre = tuple(rng.uniform(-1.2, 1.2, 3))
        radius = rng.uniform(0.05, 1.5)
        got = sorted(c.intersect_sphere_curve(centre, radius))
        want = sorted(sphere_curve_hits(centre, radius, verts, segs))
        assert len(got) == len(want)
        for g, w in zip(got, want):
            assert math.dist(g, w) <= 1e-9


def test_disk_surface_examples():
    c = flat_square()
    hits = sorted(c.intersect_disk_surface((0, 0, 0), (1, 0, 0), 1.0))
    assert len(hits) == 2
    assert np.allclose(hits, [(0, -1, 0), (0, 1, 0)], atol=1e-10)
    assert c.intersect_disk_surface((0, 0, 1), (0, 0, 1), 0.5) == []


def test_disk_surface_matches_bruteforce_on_sphere():
    c = icosphere(1)
    rng = np.random.default_rng(8)
    for _ in range(200):
        centre = tuple(rng.uniform(-1, 1, 3))
        normal = rng.normal(size=3)
        normal /= np.linalg.norm(normal)
        radius = rng.uniform(0.1, 1.2)
        got = sorted(c.intersect_disk_surface(centre, tuple(normal), radius))
        want = sorted(circle_surface_hits(centre, normal, radius,
                                          c.vertices, c.triangles))
        assert len(got) == len(want)
        for g, w in zip(got, want):
            assert math.dist(g, w) <= 1e-8


def test_queries_are_pure():
    c = icosphere(1)
    a, b = (-2, 0.03, 0.01), (2, 0.03, 0.01)
    first = c.intersect_segment_surface(a, b)
    for _ in range(5):
        assert c.intersect_segment_surface(a, b) == first


# ----------------------------------------------------------------------
# initial sampling


def test_initial_sampling_cube_selects_corners():
    c = cube()
    chosen = c.initial_sampling(8)
    assert sorted(chosen) == list(range(8))


def test_initial_sampling_collinear_includes_endpoints():
    verts = [(k / 9.0, 0, 0) for k in range(10)]
    segs = [(k, k + 1, 0) for k in range(9)]
    c = PiecewiseComplex(verts, segs, [])
    chosen = c.initial_sampling(4)
    assert 0 in chosen and 9 in chosen


def test_initial_sampling_all_when_fewer_vertices():
    c = parse_complex("v 0 0 0\nv 1 0 0\nv 0 1 0\nt 0 1 2 0\n")
    assert sorted(c.initial_sampling(8)) == [0, 1, 2]


def test_initial_sampling_well_separated():
    c = icosphere(2)
    n = 8
    chosen = c.initial_sampling(n)
    pts = np.asarray(c.vertices)[chosen]
    dmin = min(np.linalg.norm(pts[i] - pts[j])
               for i in range(n) for j in range(i + 1, n))
    # the (n+1)-th greedy candidate's clearance never beats the chosen set
    rest = [v for v in range(len(c.vertices)) if v not in chosen]
    next_d = max(min(np.linalg.norm(c.vertices[v] - pts[i]) for i in range(n))
                 for v in rest)
    assert dmin >= next_d - 1e-12
