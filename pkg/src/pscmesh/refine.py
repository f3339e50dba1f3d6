"""Hierarchical restricted Delaunay refinement driver.

One driver instance owns the tetrahedralisation and the restricted sets
exclusively (single-threaded).  The loop refines, in strict order of
priority: oversized / inaccurate curve edges, broken vertex 1-disks, bad
surface triangles (with encroachment cascades onto curve balls and a
curve-topology rollback), broken 2-disks, then bad tetrahedra (cascading
onto curve and surface balls with both rollbacks).  Every successful
insertion restarts the cascade from the curve level.

Two point-placement modes are supported: ``classical`` always inserts the
surface-ball centre / circumcentre, while ``frontal`` prefers size-optimal
off-centre candidates next to already-converged elements and falls back to
the classical point when no frontal neighbour exists.

Sharp curve-curve angles are fenced off before refinement by isosceles
collars; any Steiner point whose cavity would delete a protected collar
edge is rejected outright.
"""

import heapq
import math
from itertools import combinations

import numpy as np

from .config import check_termination_bounds
from .delaunay import _FACES, TetMesh, circumcentre_triangle
from .errors import ProtectionError
from .geometry import _dot, _norm, _sub, _unit
from .restricted import (classify_edge, classify_facet, classify_tet,
                         topo_disk_1, topo_disk_2)

_SQRT3 = math.sqrt(3.0)
_SQRT83 = math.sqrt(8.0 / 3.0)


def bad_simplex_1(e, cfg):
    """Curve edge needs refinement: surface error or mean size too large."""
    h = cfg.sizing.value(e.centre)
    return e.err > cfg.eps_rel * h or 2.0 * e.radius > cfg.alpha * h


def bad_simplex_2(f, cfg):
    """Surface triangle: error, size or radius-edge violation."""
    h = cfg.sizing.value(f.centre)
    return (f.err > cfg.eps_rel * h
            or _SQRT3 * f.radius > cfg.alpha * h
            or f.rho > cfg.rho_surf)


def bad_simplex_3(t, cfg):
    """Tetrahedron: size, radius-edge, or sliver (volume-length) violation."""
    h = cfg.sizing.value(t.centre)
    return (_SQRT83 * t.radius > cfg.alpha * h
            or t.rho > cfg.rho_vol
            or t.vlen <= cfg.vlen_min)


def select_refinement_point(kind, c1, c2, c0, r0):
    """Pick between the classical point c1 and the off-centre c2.

    Distances are measured from the frontal entity's ball centre c0; the
    off-centre wins only when it is no farther than the classical point
    and (for triangles / tets) clears the frontal ball radius r0.  Returns
    (point, "I" | "II").
    """
    if c2 is None:
        return c1, "I"
    d1 = math.dist(c1, c0)
    d2 = math.dist(c2, c0)
    if kind == 1:
        return (c2, "II") if d2 <= d1 else (c1, "I")
    if d2 <= d1 and d2 >= r0:
        return c2, "II"
    return c1, "I"


class ProtectedFeature:
    """Isosceles collar around one acutely meeting curve pair."""

    __slots__ = ("apex_gvid", "apex_vid", "wing_points", "wing_vids",
                 "wing_curves", "radius", "angle")

    def __init__(self, apex_gvid, wing_points, wing_curves, radius, angle):
        self.apex_gvid = apex_gvid
        self.wing_points = wing_points
        self.wing_curves = wing_curves
        self.radius = radius
        self.angle = angle
        self.apex_vid = -1
        self.wing_vids = ()


def protect_sharp_angles(geom, features, sizing, beta):
    """Compute collar radii and wing points for every acute apex.

    Starting from the local sizing value, each apex radius is halved until
    its sphere meets the curve network in exactly two points and the
    beta-scaled protecting balls are pairwise disjoint.
    """
    apexes = {}
    for v, pair, angle in features.acute_apexes:
        apexes.setdefault(v, []).append((pair, angle))
    order = sorted(apexes)
    for v in order:
        if len(geom.segs_at_vertex.get(v, ())) != 2:
            raise ProtectionError(
                f"apex vertex {v} has curve degree != 2; collar construction "
                "needs exactly two incident segments")
    radii = {v: sizing.value(geom.pts[v]) for v in order}
    floor = 1e-9 * geom.diag
    changed = True
    while changed:
        changed = False
        for v in order:
            r = radii[v]
            hits = geom.intersect_sphere_curve(geom.pts[v], r)
            ok = len(hits) == 2
            if ok:
                for w in order:
                    if w == v:
                        continue
                    d = math.dist(geom.pts[v], geom.pts[w])
                    if d <= beta * (r + radii[w]):
                        ok = False
                        break
            if not ok:
                radii[v] = r / 2.0
                if radii[v] < floor:
                    raise ProtectionError(
                        f"collar radius underflow at apex vertex {v}")
                changed = True
    out = []
    for v in order:
        hits = geom.intersect_sphere_curve(geom.pts[v], radii[v], with_tags=True)
        hits.sort(key=lambda h: h[0])
        angle = min(a for _pair, a in apexes[v])
        out.append(ProtectedFeature(v, tuple(h[0] for h in hits),
                                    tuple(h[1] for h in hits),
                                    radii[v], angle))
    return out


class BallRegistry:
    """Surface-ball lookup: which registered ball strictly contains a point."""

    def __init__(self):
        self._keys = []
        self._row = {}
        self._c = np.zeros((0, 3))
        self._r = np.zeros(0)
        self._alive = np.zeros(0, dtype=bool)
        self._dead = 0

    def _grow(self, n):
        cap = max(64, 2 * len(self._keys) + n)
        c = np.zeros((cap, 3))
        r = np.zeros(cap)
        a = np.zeros(cap, dtype=bool)
        m = len(self._keys)
        c[:m] = self._c[:m]
        r[:m] = self._r[:m]
        a[:m] = self._alive[:m]
        self._c, self._r, self._alive = c, r, a

    def add(self, key, centre, radius):
        if key in self._row:
            row = self._row[key]
            self._c[row] = centre
            self._r[row] = radius
            self._alive[row] = True
            return
        row = len(self._keys)
        if row >= len(self._c):
            self._grow(1)
        self._keys.append(key)
        self._row[key] = row
        self._c[row] = centre
        self._r[row] = radius
        self._alive[row] = True

    def remove(self, key):
        row = self._row.pop(key, None)
        if row is None:
            return
        self._alive[row] = False
        self._keys[row] = None
        self._dead += 1
        if self._dead > 256 and self._dead * 2 > len(self._keys):
            self._compact()

    def _compact(self):
        keep = [i for i, k in enumerate(self._keys) if k is not None]
        keys = [self._keys[i] for i in keep]
        m = len(keys)
        c = np.zeros((max(64, 2 * m), 3))
        r = np.zeros(len(c))
        a = np.zeros(len(c), dtype=bool)
        c[:m] = self._c[keep]
        r[:m] = self._r[keep]
        a[:m] = True
        self._keys = keys
        self._row = {k: i for i, k in enumerate(keys)}
        self._c, self._r, self._alive = c, r, a
        self._dead = 0

    def find_containing(self, p):
        """Key of the largest ball strictly containing p, or None."""
        m = len(self._keys)
        if not m:
            return None
        d2 = ((self._c[:m] - p) ** 2).sum(axis=1)
        mask = self._alive[:m] & (d2 < self._r[:m] ** 2)
        idx = np.nonzero(mask)[0]
        if not len(idx):
            return None
        radii = self._r[idx]
        best = radii.max()
        cands = [self._keys[i] for i in idx[radii == best]]
        return min(cands)


class RestrictedSets:
    """Driver-owned restricted complexes plus incidence and ball indexes."""

    def __init__(self):
        self.edges = {}
        self.tris = {}
        self.tets = {}
        self.edges_at_vertex = {}
        self.tris_at_vertex = {}
        self.edge_balls = BallRegistry()
        self.tri_balls = BallRegistry()

    def set_edge(self, key, obj):
        old = self.edges.get(key)
        if old is not None:
            self.pop_edge(key)
        if obj is not None:
            self.edges[key] = obj
            for v in key:
                self.edges_at_vertex.setdefault(v, set()).add(key)
            self.edge_balls.add(key, obj.centre, obj.radius)
        return old

    def pop_edge(self, key):
        obj = self.edges.pop(key, None)
        if obj is not None:
            for v in key:
                s = self.edges_at_vertex.get(v)
                if s is not None:
                    s.discard(key)
                    if not s:
                        del self.edges_at_vertex[v]
            self.edge_balls.remove(key)
        return obj

    def set_tri(self, key, obj):
        old = self.tris.get(key)
        if old is not None:
            self.pop_tri(key)
        if obj is not None:
            self.tris[key] = obj
            for v in key:
                self.tris_at_vertex.setdefault(v, set()).add(key)
            self.tri_balls.add(key, obj.centre, obj.radius)
        return old

    def pop_tri(self, key):
        obj = self.tris.pop(key, None)
        if obj is not None:
            for v in key:
                s = self.tris_at_vertex.get(v)
                if s is not None:
                    s.discard(key)
                    if not s:
                        del self.tris_at_vertex[v]
            self.tri_balls.remove(key)
        return obj

    def set_tet(self, key, obj):
        old = self.tets.get(key)
        if obj is None:
            self.tets.pop(key, None)
        else:
            self.tets[key] = obj
        return old

    def pop_tet(self, key):
        return self.tets.pop(key, None)


class _Delta:
    """Topology change of the restricted sets caused by one mesh operation."""

    __slots__ = ("edges_removed", "edges_added", "tris_removed", "tris_added")

    def __init__(self):
        self.edges_removed = {}
        self.edges_added = {}
        self.tris_removed = {}
        self.tris_added = {}


class _Budget(Exception):
    pass


def refine(geom, cfg):
    """One-call pipeline: returns (mesh, restricted sets, quality report).

    The report's ``converged`` flag drops when the point budget cut the
    run short.
    """
    import time as _time

    from .quality import build_report

    refiner = Refiner(geom, cfg)
    t0 = _time.perf_counter()
    status = refiner.run()
    report = build_report(refiner.mesh, refiner.rs, cfg.sizing,
                          wall_time=_time.perf_counter() - t0,
                          converged=status == "converged")
    return refiner.mesh, refiner.rs, report


class Refiner:
    """Runs the full protection + refinement pipeline on one input."""

    def __init__(self, geom, cfg):
        if cfg.sizing is None:
            raise ValueError("config carries no sizing field")
        self.g = geom
        self.cfg = cfg
        self.mesh = TetMesh(geom.bounds, seed=cfg.seed)
        self.rs = RestrictedSets()
        self.q_edges = []
        self.q_tris = []
        self.q_tets = []
        self.dirty1 = {}
        self.dirty2 = {}
        self._stamp = 0
        self.features = None
        self.collars = []
        self.protected_edges = []
        self.warnings = []
        self.status = "new"
        self.debug = False
        self.on_rollback = None
        self.stats = {"inserted": 0, "duplicates": 0, "rejected_protected": 0,
                      "rollback_gamma": 0, "rollback_sigma": 0,
                      "encroach_edge": 0, "encroach_tri": 0,
                      "disk1": 0, "disk2": 0, "type2": 0, "type1": 0}

    # ------------------------------------------------------------------
    # setup

    def setup(self):
        cfg = self.cfg
        self.warnings = check_termination_bounds(cfg, self.g)
        self.features = self.g.detect_sharp_features(cfg.crease_threshold)
        self.collars = protect_sharp_angles(self.g, self.features,
                                            cfg.sizing, cfg.collar_beta)
        gmap = {}
        for gv in self.g.initial_sampling(cfg.init_samples):
            rec = self.mesh.insert_point(self.g.pts[gv], "input", gv)
            gmap[gv] = rec.vid
        for col in self.collars:
            if col.apex_gvid in gmap:
                col.apex_vid = gmap[col.apex_gvid]
            else:
                rec = self.mesh.insert_point(self.g.pts[col.apex_gvid],
                                             "input", col.apex_gvid)
                col.apex_vid = rec.vid
                gmap[col.apex_gvid] = rec.vid
            vids = []
            for wp, wc in zip(col.wing_points, col.wing_curves):
                rec = self.mesh.insert_point(wp, "curve", wc)
                vids.append(rec.vid)
            col.wing_vids = tuple(vids)
            for wv in vids:
                pair = (col.apex_vid, wv) if col.apex_vid < wv else (wv, col.apex_vid)
                self.protected_edges.append(pair)
        self._reclassify([], sorted(self.mesh.alive_tets()))
        for v in range(len(self.mesh.points)):
            self.dirty1[v] = None
            self.dirty2[v] = None
        self.status = "ready"

    # ------------------------------------------------------------------
    # classification bookkeeping

    def _queue_edge(self, key, obj):
        if bad_simplex_1(obj, self.cfg):
            self._stamp += 1
            heapq.heappush(self.q_edges, (-obj.radius, self._stamp, key, obj))

    def _queue_tri(self, key, obj):
        if bad_simplex_2(obj, self.cfg):
            self._stamp += 1
            heapq.heappush(self.q_tris, (-obj.rho, self._stamp, key, obj))

    def _queue_tet(self, key, obj):
        if bad_simplex_3(obj, self.cfg):
            self._stamp += 1
            heapq.heappush(self.q_tets, (-obj.rho, self._stamp, key, obj))

    def _reclassify(self, destroyed_quads, created_ids):
        """Re-derive restricted membership around a mesh change.

        Simplexes of destroyed tets that did not survive are dropped;
        every simplex of a created tet is (re)classified.  Returns the
        topology delta of the curve and surface sets.
        """
        mesh = self.mesh
        old_edges = set()
        old_tris = set()
        old_quads = set()
        for quad in destroyed_quads:
            sq = sorted(quad)
            old_quads.add(tuple(sq))
            old_edges.update(combinations(sq, 2))
            old_tris.update(combinations(sq, 3))
        edge_handles = {}
        tri_handles = {}
        quad_handles = {}
        for t in created_ids:
            quad = mesh.tets[t]
            sq = sorted(quad)
            quad_handles[tuple(sq)] = t
            for pair in combinations(sq, 2):
                edge_handles.setdefault(pair, t)
            for i in range(4):
                f = _FACES[i]
                key = tuple(sorted((quad[f[0]], quad[f[1]], quad[f[2]])))
                tri_handles.setdefault(key, (t, i))
        delta = _Delta()
        for key in sorted(old_edges - set(edge_handles)):
            obj = self.rs.pop_edge(key)
            if obj is not None:
                delta.edges_removed[key] = obj
        for key in sorted(old_tris - set(tri_handles)):
            obj = self.rs.pop_tri(key)
            if obj is not None:
                delta.tris_removed[key] = obj
        for key in sorted(old_quads - set(quad_handles)):
            self.rs.pop_tet(key)
        for key in sorted(edge_handles):
            obj = classify_edge(mesh, self.g, key[0], key[1],
                                t0=edge_handles[key])
            old = self.rs.set_edge(key, obj)
            if obj is not None:
                self._queue_edge(key, obj)
                if old is None:
                    delta.edges_added[key] = obj
            elif old is not None:
                delta.edges_removed[key] = old
        for key in sorted(tri_handles):
            t, i = tri_handles[key]
            obj = classify_facet(mesh, self.g, t, i)
            old = self.rs.set_tri(key, obj)
            if obj is not None:
                self._queue_tri(key, obj)
                if old is None:
                    delta.tris_added[key] = obj
            elif old is not None:
                delta.tris_removed[key] = old
        for key in sorted(quad_handles):
            obj = classify_tet(mesh, self.g, quad_handles[key])
            self.rs.set_tet(key, obj)
            if obj is not None:
                self._queue_tet(key, obj)
        touched = set()
        for quad in destroyed_quads:
            touched.update(quad)
        for t in created_ids:
            touched.update(mesh.tets[t])
        for v in sorted(touched):
            self.dirty1[v] = None
            self.dirty2[v] = None
        return delta

    # ------------------------------------------------------------------
    # guarded insertion

    def _cavity_locks(self, probe):
        _pj, cav, _boundary, dup = probe
        if dup is not None or not self.protected_edges:
            return False
        for (a, b) in self.protected_edges:
            start = None
            for t in cav:
                quad = self.mesh.tets[t]
                if a in quad and b in quad:
                    start = t
                    break
            if start is None:
                continue
            ring, _closed = self.mesh.edge_ring(a, b, t0=start)
            if all(t in cav for t in ring):
                return True
        return False

    def _insert(self, point, kind, ref, gamma_guard=False, sigma_guard=False):
        """Insert one Steiner point with all Algorithm guards applied.

        Returns (status, vid) with status in {'inserted', 'duplicate',
        'rejected'}; 'inserted' covers rollback-then-deferred insertions.
        """
        if len(self.mesh.points) - 8 >= self.cfg.max_points:
            raise _Budget()
        probe = self.mesh.probe_insert(point)
        if probe[3] is not None:
            self.stats["duplicates"] += 1
            return "duplicate", probe[3]
        if self._cavity_locks(probe):
            self.stats["rejected_protected"] += 1
            return "rejected", None
        rec = self.mesh.insert_point(point, kind, ref, probe=probe)
        delta = self._reclassify(rec.destroyed_quads, rec.created)
        if gamma_guard and (delta.edges_removed or delta.edges_added):
            self.stats["rollback_gamma"] += 1
            return self._rollback(rec, delta, "gamma")
        if sigma_guard and (delta.tris_removed or delta.tris_added):
            self.stats["rollback_sigma"] += 1
            return self._rollback(rec, delta, "sigma")
        self.stats["inserted"] += 1
        return "inserted", rec.vid

    def _rollback(self, rec, delta, which):
        """Delete the offending vertex and defer to the largest adjacent
        surface ball of the disturbed lower-dimensional complex."""
        if which == "gamma":
            removed, added = delta.edges_removed, delta.edges_added
        else:
            removed, added = delta.tris_removed, delta.tris_added
        rrec = self.mesh.remove_point(rec.vid)
        rdelta = self._reclassify(rrec.destroyed_quads, rrec.created)
        if self.debug:
            back_removed = (rdelta.edges_removed if which == "gamma"
                            else rdelta.tris_removed)
            back_added = (rdelta.edges_added if which == "gamma"
                          else rdelta.tris_added)
            restored = (set(back_added) == set(removed)
                        and set(back_removed) == set(added))
        else:
            restored = True
        if self.on_rollback is not None:
            self.on_rollback(which, set(removed), set(added), restored)
        candidates = list(removed.values()) or list(added.values())
        if not candidates:
            return "rejected", None
        if which == "gamma":
            best = max(candidates, key=lambda e: (e.radius, e.edge))
            return self._insert(best.centre, "curve", best.curve_id)
        best = max(candidates, key=lambda f: (f.radius, f.tri))
        return self._insert(best.centre, "surface", best.patch_id)

    # ------------------------------------------------------------------
    # frontal machinery

    def _edge_converged(self, obj):
        return not bad_simplex_1(obj, self.cfg)

    def _tri_converged(self, obj):
        return not bad_simplex_2(obj, self.cfg)

    def _tet_converged(self, obj):
        return not bad_simplex_3(obj, self.cfg)

    def _frontal_vertex(self, e):
        for v in e.edge:
            for k in sorted(self.rs.edges_at_vertex.get(v, ())):
                if k != e.edge and self._edge_converged(self.rs.edges[k]):
                    return v
        return None

    def _tri_frontal_edge(self, f):
        a, b, c = f.tri
        for pair in ((a, b), (a, c), (b, c)):
            obj = self.rs.edges.get(pair)
            if obj is not None and self._edge_converged(obj):
                return pair
            for k in sorted(self.rs.tris_at_vertex.get(pair[0], ())):
                if k != f.tri and pair[1] in k:
                    other = self.rs.tris[k]
                    if self._tri_converged(other):
                        return pair
        return None

    def _tet_frontal_facet(self, t):
        quad = self.mesh.tets[t.tet_id]
        for i in range(4):
            face = _FACES[i]
            key = tuple(sorted((quad[face[0]], quad[face[1]], quad[face[2]])))
            obj = self.rs.tris.get(key)
            if obj is not None and self._tri_converged(obj):
                return key
            n = self.mesh.neigh[t.tet_id][i]
            if n != -1:
                nkey = tuple(sorted(self.mesh.tets[n]))
                nobj = self.rs.tets.get(nkey)
                if nobj is not None and self._tet_converged(nobj):
                    return key
        return None

    def _solve_local_size(self, base_point, candidate_fn):
        """Fixed-point solve of the half-sum sizing relation.

        candidate_fn(h) must return the candidate point at trial size h or
        None; at most 8 iterations, 1e-3 relative tolerance, clamped to
        [h0/2, 2 h0] around the frontal value.
        """
        sizing = self.cfg.sizing
        h0 = sizing.value(base_point)
        h = h0
        cand = None
        for _ in range(8):
            cand = candidate_fn(h)
            if cand is None:
                return None, h
            hn = 0.5 * (h0 + sizing.value(cand))
            hn = min(max(hn, 0.5 * h0), 2.0 * h0)
            done = abs(hn - h) <= 1e-3 * h
            h = hn
            if done:
                break
        cand = candidate_fn(h)
        return cand, h

    def _edge_offcentre(self, e, x1):
        p1 = self.mesh.points[x1]
        v = _sub(e.centre, p1)
        vn = _norm(v)
        if vn == 0.0:
            return None

        def candidate(h):
            hits = self.g.intersect_sphere_curve(p1, h)
            if not hits:
                return None
            return max(hits, key=lambda x: (_dot(_unit(_sub(x, p1)), v) / vn,
                                            (-x[0], -x[1], -x[2])))

        cand, _h = self._solve_local_size(p1, candidate)
        return cand

    def _tri_offcentre(self, f, pair):
        pu = self.mesh.points[pair[0]]
        pw = self.mesh.points[pair[1]]
        mid = ((pu[0] + pw[0]) / 2.0, (pu[1] + pw[1]) / 2.0,
               (pu[2] + pw[2]) / 2.0)
        ell2 = ((pw[0] - pu[0]) ** 2 + (pw[1] - pu[1]) ** 2
                + (pw[2] - pu[2]) ** 2)
        axis = _unit(_sub(pw, pu))
        v = _sub(f.centre, mid)
        vn = _norm(v)

        def candidate(h):
            s2 = h * h - 0.25 * ell2
            if s2 <= 0.0:
                return None
            hits = self.g.intersect_disk_surface(mid, axis, math.sqrt(s2))
            if not hits:
                return None
            if vn == 0.0:
                return min(hits)
            return max(hits, key=lambda x: (_dot(_unit(_sub(x, mid)), v) / vn,
                                            (-x[0], -x[1], -x[2])))

        cand, _h = self._solve_local_size(mid, candidate)
        return cand, mid, math.sqrt(ell2) / 2.0

    def _tet_offcentre(self, t, facet_key):
        pa, pb, pc = (self.mesh.points[v] for v in facet_key)
        c0, r0sq = circumcentre_triangle(pa, pb, pc)
        if not math.isfinite(r0sq):
            return None, c0, math.inf
        r0 = math.sqrt(r0sq)
        axis = _sub(t.centre, c0)
        length = _norm(axis)
        if length == 0.0:
            return None, c0, r0
        u = (axis[0] / length, axis[1] / length, axis[2] / length)

        def candidate(h):
            s2 = h * h - r0sq
            if s2 <= 0.0:
                return None
            d = min(math.sqrt(s2), length)
            return (c0[0] + d * u[0], c0[1] + d * u[1], c0[2] + d * u[2])

        cand, _h = self._solve_local_size(c0, candidate)
        return cand, c0, r0

    # ------------------------------------------------------------------
    # queue scanning

    def _pop(self, heap, table, frontal_fn):
        """Next queue entry to refine: (token, frontal?) or None.

        In frontal mode the scan prefers the highest-priority entry with a
        converged neighbour; when the first 64 candidates have none, the
        top entry is refined classically so progress is always possible.
        """
        stash = []
        chosen = None
        frontal = False
        while heap:
            item = heapq.heappop(heap)
            key, token = item[2], item[3]
            if table.get(key) is not token or token.blocked:
                continue
            if self.cfg.mode != "frontal":
                chosen = token
                break
            if frontal_fn(token):
                chosen = token
                frontal = True
                break
            stash.append(item)
            if len(stash) >= 64:
                break
        if chosen is None and stash:
            chosen = stash[0][3]
            stash = stash[1:]
        for item in stash:
            heapq.heappush(heap, item)
        if chosen is None:
            return None
        return chosen, frontal

    # ------------------------------------------------------------------
    # the five cascade stages

    def _step_edges(self):
        while True:
            popped = self._pop(self.q_edges, self.rs.edges,
                               lambda e: self._frontal_vertex(e) is not None)
            if popped is None:
                return False
            token, frontal = popped
            point, ptype = token.centre, "I"
            if frontal:
                x1 = self._frontal_vertex(token)
                c2 = self._edge_offcentre(token, x1)
                point, ptype = select_refinement_point(
                    1, token.centre, c2, self.mesh.points[x1], 0.0)
            st, _vid = self._insert(point, "curve", token.curve_id)
            if st == "inserted":
                self.stats["type2" if ptype == "II" else "type1"] += 1
                # a deferred insertion may leave this edge untouched and
                # still in violation: put it back in line
                if self.rs.edges.get(token.edge) is token:
                    self._queue_edge(token.edge, token)
                return True
            # duplicate / rejected: freeze whatever classification currently
            # stands for this simplex (a rollback may have replaced it)
            cur = self.rs.edges.get(token.edge)
            if cur is not None:
                cur.blocked = True

    def _step_disk1(self):
        while self.dirty1:
            v = next(iter(self.dirty1))
            del self.dirty1[v]
            keys = sorted(self.rs.edges_at_vertex.get(v, ()))
            if not keys:
                continue
            objs = [self.rs.edges[k] for k in keys]
            target = topo_disk_1(objs, self._curve_degree(v))
            if target is None:
                continue
            st, _vid = self._insert(target.centre, "curve", target.curve_id)
            if st == "inserted":
                self.stats["disk1"] += 1
                self.dirty1[v] = None
                return True
        return False

    def _step_tris(self):
        while True:
            popped = self._pop(self.q_tris, self.rs.tris,
                               lambda f: self._tri_frontal_edge(f) is not None)
            if popped is None:
                return False
            token, frontal = popped
            point, ptype = token.centre, "I"
            if frontal:
                pair = self._tri_frontal_edge(token)
                c2, c0, r0 = self._tri_offcentre(token, pair)
                point, ptype = select_refinement_point(
                    2, token.centre, c2, c0, r0)
            ekey = self.rs.edge_balls.find_containing(point)
            if ekey is not None:
                e = self.rs.edges[ekey]
                self.stats["encroach_edge"] += 1
                st, _vid = self._insert(e.centre, "curve", e.curve_id)
            else:
                st, _vid = self._insert(point, "surface", token.patch_id,
                                        gamma_guard=True)
            if st == "inserted":
                self.stats["type2" if ptype == "II" else "type1"] += 1
                if self.rs.tris.get(token.tri) is token:
                    self._queue_tri(token.tri, token)
                return True
            cur = self.rs.tris.get(token.tri)
            if cur is not None:
                cur.blocked = True

    def _step_disk2(self):
        gamma_keys = self.rs.edges.keys()
        while self.dirty2:
            v = next(iter(self.dirty2))
            del self.dirty2[v]
            keys = sorted(self.rs.tris_at_vertex.get(v, ()))
            if not keys:
                continue
            objs = [self.rs.tris[k] for k in keys]
            target = topo_disk_2(v, objs, self._on_surface(v), gamma_keys)
            if target is None:
                continue
            st, _vid = self._insert(target.centre, "surface", target.patch_id)
            if st == "inserted":
                self.stats["disk2"] += 1
                self.dirty2[v] = None
                return True
        return False

    def _step_tets(self):
        while True:
            popped = self._pop(self.q_tets, self.rs.tets,
                               lambda t: self._tet_frontal_facet(t) is not None)
            if popped is None:
                return False
            token, frontal = popped
            point, ptype = token.centre, "I"
            if frontal:
                fkey = self._tet_frontal_facet(token)
                c2, c0, r0 = self._tet_offcentre(token, fkey)
                point, ptype = select_refinement_point(
                    3, token.centre, c2, c0, r0)
            ekey = self.rs.edge_balls.find_containing(point)
            if ekey is not None:
                e = self.rs.edges[ekey]
                self.stats["encroach_edge"] += 1
                st, _vid = self._insert(e.centre, "curve", e.curve_id)
            else:
                tkey = self.rs.tri_balls.find_containing(point)
                if tkey is not None:
                    f = self.rs.tris[tkey]
                    self.stats["encroach_tri"] += 1
                    st, _vid = self._insert(f.centre, "surface", f.patch_id)
                else:
                    st, _vid = self._insert(point, "interior", -1,
                                            gamma_guard=True, sigma_guard=True)
            if st == "inserted":
                self.stats["type2" if ptype == "II" else "type1"] += 1
                if self.rs.tets.get(token.quad) is token:
                    self._queue_tet(token.quad, token)
                return True
            cur = self.rs.tets.get(token.quad)
            if cur is not None:
                cur.blocked = True

    # ------------------------------------------------------------------
    # vertex context

    def _curve_degree(self, v):
        meta = self.mesh.meta[v]
        if meta.kind == "input":
            return self.g.curve_degree(meta.ref)
        if meta.kind == "curve":
            return 2
        return 0

    def _on_surface(self, v):
        meta = self.mesh.meta[v]
        if meta.kind == "surface":
            return True
        if meta.kind == "input":
            return bool(self.g.on_surface[meta.ref])
        if meta.kind == "curve":
            return meta.ref in self.g.embedded_curves
        return False

    # ------------------------------------------------------------------
    # main loop

    def run(self):
        if self.status == "new":
            self.setup()
        try:
            while True:
                if self._step_edges():
                    continue
                if self._step_disk1():
                    continue
                if self._step_tris():
                    continue
                if self._step_disk2():
                    continue
                if self._step_tets():
                    continue
                break
            self.status = "converged"
        except _Budget:
            self.status = "max-points"
        return self.status

    # ------------------------------------------------------------------
    # output certificates

    def audit(self):
        """Post-hoc verification of every convergence certificate."""
        cfg = self.cfg
        sizing = cfg.sizing
        tol = 1e-9
        out = {}
        out["rho_surf_ok"] = all(f.rho <= cfg.rho_surf * (1 + tol)
                                 for f in self.rs.tris.values())
        out["rho_vol_ok"] = all(t.rho <= cfg.rho_vol * (1 + tol)
                                for t in self.rs.tets.values())
        out["eps_ok"] = all(
            e.err <= cfg.eps_rel * sizing.value(e.centre) * (1 + tol)
            for e in self.rs.edges.values()) and all(
            f.err <= cfg.eps_rel * sizing.value(f.centre) * (1 + tol)
            for f in self.rs.tris.values())
        out["size_ok"] = (
            all(2 * e.radius <= cfg.alpha * sizing.value(e.centre) * (1 + tol)
                for e in self.rs.edges.values())
            and all(_SQRT3 * f.radius <= cfg.alpha * sizing.value(f.centre) * (1 + tol)
                    for f in self.rs.tris.values())
            and all(_SQRT83 * t.radius <= cfg.alpha * sizing.value(t.centre) * (1 + tol)
                    for t in self.rs.tets.values()))
        out["vlen_ok"] = all(t.vlen > cfg.vlen_min * (1 - tol)
                             for t in self.rs.tets.values())
        disks = True
        gamma_keys = self.rs.edges.keys()
        for v in range(8, len(self.mesh.points)):
            if not self.mesh.meta[v].alive:
                continue
            ekeys = sorted(self.rs.edges_at_vertex.get(v, ()))
            if ekeys and topo_disk_1([self.rs.edges[k] for k in ekeys],
                                     self._curve_degree(v)) is not None:
                disks = False
                break
            tkeys = sorted(self.rs.tris_at_vertex.get(v, ()))
            if tkeys and topo_disk_2(v, [self.rs.tris[k] for k in tkeys],
                                     self._on_surface(v),
                                     gamma_keys) is not None:
                disks = False
                break
        out["disks_ok"] = disks
        out["protected_ok"] = all(
            self.mesh.edge_exists(a, b) and (a, b) in self.rs.edges
            for (a, b) in self.protected_edges)
        out["converged"] = self.status == "converged"
        return out
