"""Discrete piecewise-smooth geometry and its intersection oracle.

The input domain is a curve network (polyline segments tagged by curve
id), a surface given as a triangle soup (tagged by patch id) and the
volume the surface encloses.  Everything downstream is geometry-agnostic
and interacts with the domain only through the query methods here:
polygon/curve, segment/surface, sphere/curve and disk/surface
intersections plus point-in-volume membership.

A ``PiecewiseComplex`` is immutable after construction and safe for
concurrent read-only queries; both acceleration trees are built in the
constructor.
"""

import math
import warnings

import numpy as np

from .aabb import AABBTree, boxes_for_segments, boxes_for_triangles
from .errors import GeometryError, ParseError, ValidationError

# Deterministic ray directions for membership parity tests; deliberately
# irrational-looking so axis-aligned geometry rarely produces degenerate
# hits on the first try.
_RAY_DIRS = [
    (0.540302305868, 0.642092615934, 0.543838457147),
    (-0.716318165366, 0.423883297253, 0.553693963657),
    (0.285601248744, -0.874212080485, 0.392949292571),
    (0.833049961066, 0.181709755168, -0.522529270834),
    (-0.219115673143, -0.521018621818, -0.824940230486),
    (0.975897449331, -0.205276096894, 0.071806273738),
    (-0.425324925181, 0.904116295256, -0.041155874841),
    (0.062378812061, 0.352755418432, 0.933632034464),
]


def _unit(v):
    n = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    return (v[0] / n, v[1] / n, v[2] / n)


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0])


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _norm(a):
    return math.sqrt(_dot(a, a))


def _plane_basis(normal):
    # Orthonormal pair spanning the plane orthogonal to ``normal``.
    ax = abs(normal[0]); ay = abs(normal[1]); az = abs(normal[2])
    seed = (1.0, 0.0, 0.0) if ax <= min(ay, az) else (
        (0.0, 1.0, 0.0) if ay <= az else (0.0, 0.0, 1.0))
    e1 = _unit(_cross(normal, seed))
    e2 = _cross(normal, e1)
    return e1, e2


class SharpFeatureSet:
    """Detected creases, corner vertices and acutely meeting curve pairs."""

    def __init__(self, crease_edges, corner_vertices, acute_apexes,
                 untagged_creases=()):
        self.crease_edges = set(crease_edges)       # segment ids in the curve net
        self.corner_vertices = set(corner_vertices)  # vertex ids
        self.acute_apexes = list(acute_apexes)       # (vertex, (seg_i, seg_j), angle)
        self.untagged_creases = list(untagged_creases)  # vertex pairs missing from the net


class PiecewiseComplex:
    """Vertices + tagged curve segments + tagged surface triangles."""

    def __init__(self, vertices, segments, triangles):
        self.vertices = np.asarray(vertices, dtype=np.float64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise ValidationError("vertex array must be (n, 3)")
        if not np.isfinite(self.vertices).all():
            raise ValidationError("non-finite vertex coordinate")
        self.segments = [(int(i), int(j), int(c)) for i, j, c in segments]
        self.triangles = [(int(i), int(j), int(k), int(p))
                          for i, j, k, p in triangles]
        self._validate()

        nv = len(self.vertices)
        if nv:
            lo = self.vertices.min(axis=0)
            hi = self.vertices.max(axis=0)
        else:
            lo = hi = np.zeros(3)
        self.bounds = (tuple(lo), tuple(hi))
        self.diag = float(np.linalg.norm(hi - lo)) or 1.0
        self.eps = 1e-12 * self.diag

        self.pts = [tuple(map(float, p)) for p in self.vertices]

        # curve incidence
        self.segs_at_vertex = {}
        for sid, (i, j, _cid) in enumerate(self.segments):
            self.segs_at_vertex.setdefault(i, []).append(sid)
            self.segs_at_vertex.setdefault(j, []).append(sid)
        self.on_curve = np.zeros(nv, dtype=bool)
        for i, j, _c in self.segments:
            self.on_curve[i] = True
            self.on_curve[j] = True
        self.on_surface = np.zeros(nv, dtype=bool)
        for i, j, k, _p in self.triangles:
            self.on_surface[[i, j, k]] = True

        # corner-style feature vertices: endpoints and junctions of curves
        self.feature_vertices = set()
        for v, sids in self.segs_at_vertex.items():
            if len(sids) != 2:
                self.feature_vertices.add(v)
            else:
                c0 = self.segments[sids[0]][2]
                c1 = self.segments[sids[1]][2]
                if c0 != c1:
                    self.feature_vertices.add(v)

        # curves whose every segment is also a surface edge ("embedded")
        tri_edges = set()
        for i, j, k, _p in self.triangles:
            tri_edges.add((min(i, j), max(i, j)))
            tri_edges.add((min(j, k), max(j, k)))
            tri_edges.add((min(i, k), max(i, k)))
        self.embedded_curves = set()
        by_curve = {}
        for i, j, cid in self.segments:
            by_curve.setdefault(cid, []).append((min(i, j), max(i, j)))
        for cid, pairs in by_curve.items():
            if all(p in tri_edges for p in pairs):
                self.embedded_curves.add(cid)

        # closed-surface census for the volume oracle
        use = {}
        for i, j, k, _p in self.triangles:
            for e in ((i, j), (j, k), (i, k)):
                key = (min(e), max(e))
                use[key] = use.get(key, 0) + 1
        self.surface_closed = bool(self.triangles) and all(
            c == 2 for c in use.values())

        self.seg_tree = AABBTree(
            boxes_for_segments(self.vertices, self.segments, pad=self.eps)
            if self.segments else np.zeros((0, 6)))
        self.tri_tree = AABBTree(
            boxes_for_triangles(self.vertices, self.triangles, pad=self.eps)
            if self.triangles else np.zeros((0, 6)))

    def _validate(self):
        nv = len(self.vertices)
        seen_pairs = set()
        per_curve_degree = {}
        for sid, (i, j, cid) in enumerate(self.segments):
            if not (0 <= i < nv and 0 <= j < nv):
                raise ValidationError(f"segment {sid} references missing vertex")
            if i == j:
                raise ValidationError(f"segment {sid} is degenerate")
            key = (min(i, j), max(i, j))
            if key in seen_pairs:
                raise ValidationError(f"duplicate segment {key}")
            seen_pairs.add(key)
            for v in (i, j):
                d = per_curve_degree.setdefault((cid, v), 0) + 1
                per_curve_degree[(cid, v)] = d
                if d > 2:
                    raise ValidationError(
                        f"curve {cid} branches at vertex {v}; polylines must be simple")
        seen_tris = set()
        patch_edge_use = {}
        for tid, (i, j, k, pid) in enumerate(self.triangles):
            if not (0 <= i < nv and 0 <= j < nv and 0 <= k < nv):
                raise ValidationError(f"triangle {tid} references missing vertex")
            if len({i, j, k}) != 3:
                raise ValidationError(f"triangle {tid} is degenerate")
            key = tuple(sorted((i, j, k)))
            if key in seen_tris:
                raise ValidationError(f"duplicate triangle {key}")
            seen_tris.add(key)
            a = np.asarray(self.vertices[j]) - self.vertices[i]
            b = np.asarray(self.vertices[k]) - self.vertices[i]
            if np.linalg.norm(np.cross(a, b)) == 0.0:
                raise ValidationError(f"triangle {tid} has zero area")
            for e in ((i, j), (j, k), (i, k)):
                ekey = (pid, min(e), max(e))
                c = patch_edge_use.setdefault(ekey, 0) + 1
                patch_edge_use[ekey] = c
                if c > 2:
                    raise ValidationError(
                        f"patch {pid} edge {(min(e), max(e))} used by >2 triangles")

    # ------------------------------------------------------------------
    # feature detection

    def detect_sharp_features(self, dihedral_threshold=math.radians(30.0)):
        """Creases, corners and acute curve-curve apexes of the input.

        Crease = surface edge that is a patch boundary, is non-manifold, or
        whose interior dihedral deviates from flat by more than the
        threshold.  Corners follow the curve-network topology.  An apex is
        a vertex where two curve segments subtend an angle of at most 60
        degrees; those need collar protection before refinement.
        """
        edge_tris = {}
        for tid, (i, j, k, _p) in enumerate(self.triangles):
            for e in ((i, j), (j, k), (i, k)):
                edge_tris.setdefault((min(e), max(e)), []).append(tid)
        seg_of_pair = {}
        for sid, (i, j, _c) in enumerate(self.segments):
            seg_of_pair[(min(i, j), max(i, j))] = sid

        crease_ids = set()
        untagged = []
        for pair, tids in edge_tris.items():
            crease = False
            if len(tids) != 2:
                crease = True
            else:
                if self._dihedral_deviation(pair, tids[0], tids[1]) > dihedral_threshold:
                    crease = True
            if crease:
                sid = seg_of_pair.get(pair)
                if sid is not None:
                    crease_ids.add(sid)
                else:
                    untagged.append(pair)

        corners = set(self.feature_vertices)

        apexes = []
        for v in sorted(self.segs_at_vertex):
            sids = self.segs_at_vertex[v]
            p = self.pts[v]
            for x in range(len(sids)):
                for y in range(x + 1, len(sids)):
                    u1 = self._away_dir(sids[x], v, p)
                    u2 = self._away_dir(sids[y], v, p)
                    ang = math.atan2(_norm(_cross(u1, u2)), _dot(u1, u2))
                    if ang <= math.pi / 3.0 + 1e-12:
                        apexes.append((v, (sids[x], sids[y]), ang))
        return SharpFeatureSet(crease_ids, corners, apexes, untagged)

    def _away_dir(self, sid, v, p):
        i, j, _c = self.segments[sid]
        other = self.pts[j] if i == v else self.pts[i]
        return _unit(_sub(other, p))

    def _dihedral_deviation(self, pair, t1, t2):
        # Hinge angle measured between the in-plane perpendiculars toward
        # the two opposite vertices; flat surfaces give pi, so the
        # deviation is pi minus that.  Independent of triangle winding.
        i, j = pair
        a = self.pts[i]
        d = _unit(_sub(self.pts[j], a))

        def perp_toward(tid):
            tri = self.triangles[tid]
            opp = next(v for v in tri[:3] if v not in pair)
            w = _sub(self.pts[opp], a)
            proj = _dot(w, d)
            u = (w[0] - proj * d[0], w[1] - proj * d[1], w[2] - proj * d[2])
            return _unit(u)

        u1 = perp_toward(t1)
        u2 = perp_toward(t2)
        hinge = math.atan2(_norm(_cross(u1, u2)), _dot(u1, u2))
        return math.pi - hinge

    # ------------------------------------------------------------------
    # intersection oracle

    def intersect_polygon_curve(self, polygon):
        """Transversal hits of a convex planar polygon with the curve net.

        Returns ``[(point, curve_id), ...]``.  A zero-area polygon yields an
        empty result and a warning.
        """
        if not self.segments:
            return []
        poly = [tuple(map(float, p)) for p in polygon]
        normal = _newell_normal(poly)
        if _norm(normal) <= 1e-300:
            warnings.warn("degenerate polygon in curve query", stacklevel=2)
            return []
        normal = _unit(normal)
        offset = _dot(normal, poly[0])
        lo = (min(p[0] for p in poly), min(p[1] for p in poly), min(p[2] for p in poly))
        hi = (max(p[0] for p in poly), max(p[1] for p in poly), max(p[2] for p in poly))
        pad = self.eps
        cands = self.seg_tree.query_box(
            (lo[0] - pad, lo[1] - pad, lo[2] - pad),
            (hi[0] + pad, hi[1] + pad, hi[2] + pad))
        e1, e2 = _plane_basis(normal)
        poly2 = [(_dot(p, e1), _dot(p, e2)) for p in poly]
        hits = []
        for sid in sorted(cands):
            i, j, cid = self.segments[sid]
            x = self._segment_plane_point(self.pts[i], self.pts[j], normal, offset)
            if x is None:
                continue
            if _point_in_polygon2(( _dot(x, e1), _dot(x, e2)), poly2, self.eps):
                hits.append((x, cid))
        return _dedupe_tagged(hits, self.eps)

    def _segment_plane_point(self, p, q, normal, offset):
        dp = _dot(normal, p) - offset
        dq = _dot(normal, q) - offset
        dn = dq - dp
        if abs(dn) <= 1e-300:
            return None  # parallel; not a transversal crossing
        t = -dp / dn
        if t < -1e-12 or t > 1.0 + 1e-12:
            return None
        t = min(max(t, 0.0), 1.0)
        return (p[0] + t * (q[0] - p[0]),
                p[1] + t * (q[1] - p[1]),
                p[2] + t * (q[2] - p[2]))

    def intersect_segment_surface(self, a, b):
        """Hits of segment a-b with the surface, deduplicated at shared edges.

        Returns ``[(point, patch_id), ...]``.
        """
        if not self.triangles:
            return []
        cands = self.tri_tree.query_segment(a, b, pad=self.eps)
        hits = []
        for tid in sorted(cands):
            x = self._segment_triangle_point(a, b, tid)
            if x is not None:
                hits.append((x, self.triangles[tid][3]))
        return _dedupe_tagged(hits, self.eps)

    def _segment_triangle_point(self, a, b, tid, slack=1e-10):
        i, j, k, _p = self.triangles[tid]
        p0 = self.pts[i]; p1 = self.pts[j]; p2 = self.pts[k]
        d = _sub(b, a)
        e1 = _sub(p1, p0)
        e2 = _sub(p2, p0)
        pvec = _cross(d, e1)
        det = _dot(pvec, e2)
        scale = _norm(d) * _norm(e1) * _norm(e2)
        if abs(det) <= 1e-14 * scale:
            return None  # parallel to the triangle plane
        inv = 1.0 / det
        tvec = _sub(a, p0)
        v = _dot(tvec, pvec) * inv
        if v < -slack or v > 1.0 + slack:
            return None
        qvec = _cross(tvec, e2)
        w = _dot(d, qvec) * inv
        if w < -slack or v + w > 1.0 + slack:
            return None
        t = _dot(e1, qvec) * inv
        if t < -1e-12 or t > 1.0 + 1e-12:
            return None
        t = min(max(t, 0.0), 1.0)
        return (a[0] + t * d[0], a[1] + t * d[1], a[2] + t * d[2])

    def point_in_volume(self, p):
        """Ray-parity membership in the enclosed volume.

        Requires a closed surface; degenerate rays are re-shot along the
        next deterministic direction.  Points on the surface itself are
        reported as outside.
        """
        if not self.surface_closed:
            raise GeometryError("surface is not closed; volume undefined")
        p = (float(p[0]), float(p[1]), float(p[2]))
        span = 3.0 * self.diag + _norm(_sub(p, self.bounds[0]))
        for d in _RAY_DIRS * 4:
            res = self._ray_parity(p, d, span)
            if res is not None:
                return res
        raise GeometryError("membership ray retries exhausted")

    def _ray_parity(self, p, d, span):
        q = (p[0] + span * d[0], p[1] + span * d[1], p[2] + span * d[2])
        cands = self.tri_tree.query_segment(p, q, pad=self.eps)
        crossings = 0
        band = 1e-9
        for tid in cands:
            i, j, k, _pid = self.triangles[tid]
            p0 = self.pts[i]; p1 = self.pts[j]; p2 = self.pts[k]
            e1 = _sub(p1, p0)
            e2 = _sub(p2, p0)
            pvec = _cross(d, e1)
            det = _dot(pvec, e2)
            scale = _norm(e1) * _norm(e2)
            if abs(det) <= 1e-12 * scale:
                # ray nearly parallel: only dangerous when it actually
                # grazes the triangle's slab
                tvec = _sub(p, p0)
                n = _cross(e1, e2)
                if abs(_dot(tvec, n)) <= band * _norm(n) * span:
                    return None
                continue
            inv = 1.0 / det
            tvec = _sub(p, p0)
            v = _dot(tvec, pvec) * inv
            qvec = _cross(tvec, e2)
            w = _dot(d, qvec) * inv
            t = _dot(e1, qvec) * inv
            if t <= self.eps / 1.0 or t > span:
                if -band < v < 1.0 + band and -band < w and v + w < 1.0 + band \
                        and abs(t) <= self.eps:
                    return False  # p lies on the surface: not interior
                continue
            if v < -band or w < -band or v + w > 1.0 + band:
                continue
            if v < band or w < band or v + w > 1.0 - band:
                return None  # grazes an edge or vertex: re-shoot
            crossings += 1
        return crossings % 2 == 1

    def intersect_sphere_curve(self, centre, radius, with_tags=False):
        """Points of the curve network at exact distance ``radius``."""
        if radius <= 0.0:
            raise ValueError("radius must be positive")
        if not self.segments:
            return []
        cands = self.seg_tree.query_sphere(centre, radius + self.eps)
        hits = []
        for sid in sorted(cands):
            i, j, cid = self.segments[sid]
            p = self.pts[i]; q = self.pts[j]
            d = _sub(q, p)
            m = _sub(p, centre)
            a = _dot(d, d)
            b = 2.0 * _dot(m, d)
            c = _dot(m, m) - radius * radius
            disc = b * b - 4.0 * a * c
            if disc < 0.0:
                continue
            sq = math.sqrt(disc)
            for t in ((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)):
                if -1e-12 <= t <= 1.0 + 1e-12:
                    t = min(max(t, 0.0), 1.0)
                    x = (p[0] + t * d[0], p[1] + t * d[1], p[2] + t * d[2])
                    hits.append((x, cid))
        hits = _dedupe_tagged(hits, self.eps)
        return hits if with_tags else [h[0] for h in hits]

    def intersect_disk_surface(self, centre, normal, radius):
        """Hits of the boundary circle of an oriented disk with the surface."""
        if radius <= 0.0:
            raise ValueError("radius must be positive")
        if not self.triangles:
            return []
        nrm = _unit(normal)
        e1, e2 = _plane_basis(nrm)
        cands = self.tri_tree.query_sphere(centre, radius + self.eps)
        hits = []
        for tid in sorted(cands):
            i, j, k, _pid = self.triangles[tid]
            p0 = self.pts[i]; p1 = self.pts[j]; p2 = self.pts[k]
            n2 = _cross(_sub(p1, p0), _sub(p2, p0))
            n2n = _norm(n2)
            h = _dot(n2, _sub(p0, centre))
            A = _dot(e1, n2)
            B = _dot(e2, n2)
            den = A * A + B * B
            if den <= (1e-12 * n2n) ** 2:
                continue  # disk plane parallel to triangle plane
            foot = h / den
            fx = A * foot
            fy = B * foot
            rho2 = fx * fx + fy * fy
            s2 = radius * radius - rho2
            if s2 < 0.0:
                continue
            s = math.sqrt(s2)
            inv = 1.0 / math.sqrt(den)
            ux = -B * inv
            uy = A * inv
            for sgn in (-s, s):
                ax = fx + sgn * ux
                ay = fy + sgn * uy
                x = (centre[0] + ax * e1[0] + ay * e2[0],
                     centre[1] + ax * e1[1] + ay * e2[1],
                     centre[2] + ax * e1[2] + ay * e2[2])
                if _point_in_triangle3(x, p0, p1, p2, 1e-10):
                    hits.append((x, 0))
        return [h[0] for h in _dedupe_tagged(hits, self.eps)]

    # ------------------------------------------------------------------
    # sampling

    def initial_sampling(self, n):
        """Well-separated subset of input vertices to seed refinement.

        Greedy farthest-point selection starting from the vertex nearest
        the low bounding-box corner; curve vertices are exhausted before
        surface-only vertices.  Every curve feature vertex (endpoint,
        junction, acute apex) is always included on top of the greedy
        picks: a restricted curve chain can only terminate consistently at
        a vertex that actually exists in the mesh.
        """
        if n < 4:
            raise ValueError("need at least 4 seed points")
        nv = len(self.vertices)
        if nv == 0:
            raise ValidationError("empty complex")
        if nv <= n:
            chosen = list(range(nv))
        else:
            on_curve = [v for v in range(nv) if self.on_curve[v]]
            rest = [v for v in range(nv) if not self.on_curve[v]]
            pool = on_curve if on_curve else rest
            corner = np.asarray(self.bounds[0])
            d2 = ((self.vertices[pool] - corner) ** 2).sum(axis=1)
            chosen = [pool[int(np.argmin(d2))]]
            mind = ((self.vertices - self.vertices[chosen[0]]) ** 2).sum(axis=1)
            for stage in (on_curve, rest):
                stage_set = [v for v in stage if v not in chosen]
                while stage_set and len(chosen) < n:
                    best = max(stage_set, key=lambda v: (mind[v], -v))
                    chosen.append(best)
                    stage_set.remove(best)
                    dd = ((self.vertices - self.vertices[best]) ** 2).sum(axis=1)
                    np.minimum(mind, dd, out=mind)
                if len(chosen) >= n:
                    break
        forced = {v for v, _pair, _a in self.detect_sharp_features().acute_apexes}
        forced.update(self.feature_vertices)
        for v in sorted(forced):
            if v not in chosen:
                chosen.append(v)
        return chosen

    def curve_degree(self, v):
        return len(self.segs_at_vertex.get(v, ()))

    # ------------------------------------------------------------------
    # distances (audit helpers)

    def distance_to_surface(self, points):
        """Min distance from each query point to the triangle soup."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        tris = np.asarray([t[:3] for t in self.triangles], dtype=np.intp)
        a = self.vertices[tris[:, 0]]
        b = self.vertices[tris[:, 1]]
        c = self.vertices[tris[:, 2]]
        out = np.empty(len(pts))
        for idx, p in enumerate(pts):
            out[idx] = math.sqrt(_point_tris_d2(p, a, b, c).min())
        return out

    def distance_to_curves(self, points):
        """Min distance from each query point to the curve network."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        segs = np.asarray([s[:2] for s in self.segments], dtype=np.intp)
        a = self.vertices[segs[:, 0]]
        d = self.vertices[segs[:, 1]] - a
        dd = (d * d).sum(axis=1)
        out = np.empty(len(pts))
        for idx, p in enumerate(pts):
            t = np.clip(((p - a) * d).sum(axis=1) / dd, 0.0, 1.0)
            q = a + t[:, None] * d
            out[idx] = math.sqrt(((q - p) ** 2).sum(axis=1).min())
        return out


def _point_tris_d2(p, a, b, c):
    # Squared point-triangle distances, vectorised over triangles
    # (Ericson's barycentric-region walk).
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = (ab * ap).sum(axis=1)
    d2 = (ac * ap).sum(axis=1)
    bp = p - b
    d3 = (ab * bp).sum(axis=1)
    d4 = (ac * bp).sum(axis=1)
    cp = p - c
    d5 = (ab * cp).sum(axis=1)
    d6 = (ac * cp).sum(axis=1)
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4
    denom = va + vb + vc
    v = np.where(denom != 0, vb / np.where(denom == 0, 1, denom), 0.0)
    w = np.where(denom != 0, vc / np.where(denom == 0, 1, denom), 0.0)
    q = a + v[:, None] * ab + w[:, None] * ac
    # clamp to the nearest feature when outside
    t_ab = np.clip(d1 / np.where(d1 - d3 == 0, 1, d1 - d3), 0, 1)
    t_ac = np.clip(d2 / np.where(d2 - d6 == 0, 1, d2 - d6), 0, 1)
    t_bc = np.clip((d4 - d3) / np.where((d4 - d3) + (d5 - d6) == 0, 1,
                                        (d4 - d3) + (d5 - d6)), 0, 1)
    q_ab = a + t_ab[:, None] * ab
    q_ac = a + t_ac[:, None] * ac
    q_bc = b + t_bc[:, None] * (c - b)
    inside = (v >= 0) & (w >= 0) & (v + w <= 1)
    d_face = ((q - p) ** 2).sum(axis=1)
    d_edges = np.minimum(((q_ab - p) ** 2).sum(axis=1),
                         np.minimum(((q_ac - p) ** 2).sum(axis=1),
                                    ((q_bc - p) ** 2).sum(axis=1)))
    return np.where(inside, d_face, d_edges)


def _newell_normal(poly):
    nx = ny = nz = 0.0
    m = len(poly)
    for i in range(m):
        p = poly[i]
        q = poly[(i + 1) % m]
        nx += (p[1] - q[1]) * (p[2] + q[2])
        ny += (p[2] - q[2]) * (p[0] + q[0])
        nz += (p[0] - q[0]) * (p[1] + q[1])
    return (nx, ny, nz)


def _point_in_polygon2(pt, poly2, eps):
    # Fan containment: point lies in some fan triangle of the loop.
    x, y = pt
    ax, ay = poly2[0]
    for i in range(1, len(poly2) - 1):
        bx, by = poly2[i]
        cx, cy = poly2[i + 1]
        d = (bx - ax) * (cy - ay) - (cx - ax) * (by - ay)
        if abs(d) <= 1e-300:
            continue
        l1 = ((bx - ax) * (y - ay) - (x - ax) * (by - ay)) / d
        l2 = ((x - ax) * (cy - ay) - (cx - ax) * (y - ay)) / d
        tol = eps / max(abs(d) ** 0.5, 1e-30)
        if l1 >= -tol and l2 >= -tol and l1 + l2 <= 1.0 + tol:
            return True
    return False


def _point_in_triangle3(x, p0, p1, p2, slack):
    v0 = _sub(p2, p0)
    v1 = _sub(p1, p0)
    v2 = _sub(x, p0)
    d00 = _dot(v0, v0)
    d01 = _dot(v0, v1)
    d11 = _dot(v1, v1)
    d20 = _dot(v2, v0)
    d21 = _dot(v2, v1)
    den = d00 * d11 - d01 * d01
    if abs(den) <= 1e-300:
        return False
    u = (d11 * d20 - d01 * d21) / den
    v = (d00 * d21 - d01 * d20) / den
    return u >= -slack and v >= -slack and u + v <= 1.0 + slack


def _dedupe_tagged(hits, eps):
    out = []
    for x, tag in hits:
        dup = False
        for y, _t in out:
            if (abs(x[0] - y[0]) <= eps and abs(x[1] - y[1]) <= eps
                    and abs(x[2] - y[2]) <= eps):
                dup = True
                break
        if not dup:
            out.append((x, tag))
    return out


# ----------------------------------------------------------------------
# .psc text format


def parse_complex(text):
    """Parse the line-oriented geometry format.

    Records: ``v x y z``, ``e i j curveId``, ``t i j k patchId``; ``#``
    starts a comment; indices are 0-based.
    """
    verts = []
    segs = []
    tris = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "v" and len(parts) == 4:
                verts.append(tuple(float(x) for x in parts[1:]))
            elif parts[0] == "e" and len(parts) == 4:
                segs.append(tuple(int(x) for x in parts[1:]))
            elif parts[0] == "t" and len(parts) == 5:
                tris.append(tuple(int(x) for x in parts[1:]))
            else:
                raise ParseError(f"line {ln}: unrecognised record {parts[0]!r}")
        except ValueError as exc:
            raise ParseError(f"line {ln}: {exc}") from exc
    return PiecewiseComplex(verts, segs, tris)


def load_complex(path):
    """Read and validate a geometry file; builds the spatial index."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_complex(fh.read())


def write_complex(cplx, path):
    """Write a complex back out in the text format."""
    with open(path, "w", encoding="utf-8") as fh:
        for p in cplx.pts:
            fh.write(f"v {p[0]!r} {p[1]!r} {p[2]!r}\n")
        for i, j, c in cplx.segments:
            fh.write(f"e {i} {j} {c}\n")
        for i, j, k, p in cplx.triangles:
            fh.write(f"t {i} {j} {k} {p}\n")
