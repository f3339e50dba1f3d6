"""Incremental Delaunay tetrahedralisation with removal and Voronoi duals.

The triangulation always tessellates a large bounding box (10x the
geometry's bounding-box diagonal, carried by 8 shell corner vertices);
every real point is inserted strictly inside it, so there is no infinite
ghost logic -- tets touching a shell corner are simply "ghost" and ignored
by the restricted classification.

Degeneracy policy: every stored point receives a deterministic jitter of
1e-12 x geometry diagonal, keyed on (seed, vertex index).  Combined with
the exact predicates this keeps the point set in general position, so
cavities, removals and dual constructions never meet an exactly
cospherical or coplanar configuration.  ``TetMesh.points`` holds the
jittered coordinates and is the authoritative vertex data for every
downstream consumer.

Single-writer: mutating calls are strictly sequential; read accessors are
safe between mutations.
"""

import math
from itertools import combinations

from .errors import MeshError
from .predicates import insphere, orient3d

# Face i is opposite vertex i and wound so that, for a positively oriented
# tet (v0, v1, v2, v3), orient3d(face_i, v_i) > 0.
_FACES = ((1, 3, 2), (0, 2, 3), (0, 3, 1), (0, 1, 2))

_M64 = (1 << 64) - 1
_WALK_CAP = 20000


def _splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & _M64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return (z ^ (z >> 31)) & _M64


def circumsphere_tet(pa, pb, pc, pd):
    """Circumcentre, squared radius and a reliability flag for a tet.

    The flag drops when the circumradius exceeds 1e6 times the shortest
    edge (nearly degenerate element) or the linear system is singular.
    """
    ux = pb[0] - pa[0]; uy = pb[1] - pa[1]; uz = pb[2] - pa[2]
    vx = pc[0] - pa[0]; vy = pc[1] - pa[1]; vz = pc[2] - pa[2]
    wx = pd[0] - pa[0]; wy = pd[1] - pa[1]; wz = pd[2] - pa[2]
    uu = ux * ux + uy * uy + uz * uz
    vv = vx * vx + vy * vy + vz * vz
    ww = wx * wx + wy * wy + wz * wz
    vwx = vy * wz - vz * wy
    vwy = vz * wx - vx * wz
    vwz = vx * wy - vy * wx
    wux = wy * uz - wz * uy
    wuy = wz * ux - wx * uz
    wuz = wx * uy - wy * ux
    uvx = uy * vz - uz * vy
    uvy = uz * vx - ux * vz
    uvz = ux * vy - uy * vx
    den = 2.0 * (ux * vwx + uy * vwy + uz * vwz)
    if den == 0.0 or not math.isfinite(den):
        cx = (pa[0] + pb[0] + pc[0] + pd[0]) / 4.0
        cy = (pa[1] + pb[1] + pc[1] + pd[1]) / 4.0
        cz = (pa[2] + pb[2] + pc[2] + pd[2]) / 4.0
        return (cx, cy, cz), math.inf, False
    xx = (uu * vwx + vv * wux + ww * uvx) / den
    xy = (uu * vwy + vv * wuy + ww * uvy) / den
    xz = (uu * vwz + vv * wuz + ww * uvz) / den
    r2 = xx * xx + xy * xy + xz * xz
    min_e2 = min(uu, vv, ww,
                 (vx - ux) ** 2 + (vy - uy) ** 2 + (vz - uz) ** 2,
                 (wx - ux) ** 2 + (wy - uy) ** 2 + (wz - uz) ** 2,
                 (wx - vx) ** 2 + (wy - vy) ** 2 + (wz - vz) ** 2)
    reliable = r2 <= (1e6 ** 2) * min_e2 and math.isfinite(r2)
    return (pa[0] + xx, pa[1] + xy, pa[2] + xz), r2, reliable


def circumcentre_triangle(pa, pb, pc):
    """In-plane circumcentre and squared circumradius of a 3D triangle."""
    a2 = ((pb[0] - pc[0]) ** 2 + (pb[1] - pc[1]) ** 2 + (pb[2] - pc[2]) ** 2)
    b2 = ((pa[0] - pc[0]) ** 2 + (pa[1] - pc[1]) ** 2 + (pa[2] - pc[2]) ** 2)
    c2 = ((pa[0] - pb[0]) ** 2 + (pa[1] - pb[1]) ** 2 + (pa[2] - pb[2]) ** 2)
    wa = a2 * (b2 + c2 - a2)
    wb = b2 * (c2 + a2 - b2)
    wc = c2 * (a2 + b2 - c2)
    s = wa + wb + wc
    if s == 0.0 or not math.isfinite(s):
        cx = (pa[0] + pb[0] + pc[0]) / 3.0
        cy = (pa[1] + pb[1] + pc[1]) / 3.0
        cz = (pa[2] + pb[2] + pc[2]) / 3.0
        return (cx, cy, cz), math.inf
    cx = (wa * pa[0] + wb * pb[0] + wc * pc[0]) / s
    cy = (wa * pa[1] + wb * pb[1] + wc * pc[1]) / s
    cz = (wa * pa[2] + wb * pb[2] + wc * pc[2]) / s
    r2 = (cx - pa[0]) ** 2 + (cy - pa[1]) ** 2 + (cz - pa[2]) ** 2
    return (cx, cy, cz), r2


class VertexMeta:
    """Provenance of a mesh vertex (drives the topological-disk rules)."""

    __slots__ = ("kind", "ref", "alive")

    def __init__(self, kind, ref=-1):
        self.kind = kind  # shell | input | curve | surface | interior
        self.ref = ref    # input vertex id / curve id / patch id
        self.alive = True


class InsertRecord:
    __slots__ = ("vid", "duplicate", "destroyed_quads", "created")

    def __init__(self, vid, duplicate, destroyed_quads, created):
        self.vid = vid
        self.duplicate = duplicate
        self.destroyed_quads = destroyed_quads
        self.created = created


class RemoveRecord:
    __slots__ = ("vid", "destroyed_quads", "created")

    def __init__(self, vid, destroyed_quads, created):
        self.vid = vid
        self.destroyed_quads = destroyed_quads
        self.created = created


class VoronoiFace:
    """Ordered dual polygon of a Delaunay edge (circumcentre ring)."""

    __slots__ = ("edge", "polygon", "bounded")

    def __init__(self, edge, polygon, bounded):
        self.edge = edge
        self.polygon = polygon
        self.bounded = bounded


class TetMesh:
    def __init__(self, bounds, seed=0, box_scale=10.0):
        lo, hi = bounds
        cx = (lo[0] + hi[0]) / 2.0
        cy = (lo[1] + hi[1]) / 2.0
        cz = (lo[2] + hi[2]) / 2.0
        diag = math.sqrt((hi[0] - lo[0]) ** 2 + (hi[1] - lo[1]) ** 2
                         + (hi[2] - lo[2]) ** 2) or 1.0
        self.geom_diag = diag
        half = 0.5 * box_scale * diag
        self.box_lo = (cx - half, cy - half, cz - half)
        self.box_hi = (cx + half, cy + half, cz + half)
        # snap must dominate jitter, or re-inserting the same raw point can
        # slip past the duplicate check under a fresh jitter draw
        self.snap_tol = 1e-11 * diag
        self.jitter_scale = 1e-12 * diag
        self.seed = seed

        self.points = []
        self.meta = []
        self.tets = []      # tuple4 or None
        self.neigh = []     # list4 of tet ids, -1 at the outer hull
        self.circum = []    # (centre, r2, reliable)
        self.vert_tet = []
        self._free = []
        self.n_alive_tets = 0
        self._last_tet = -1
        self.audit_cavity = False

        self._init_shell()

    # ------------------------------------------------------------------
    # construction helpers

    def _jitter(self, p, idx):
        s = self.jitter_scale
        out = []
        for axis in range(3):
            h = _splitmix64((self.seed << 32) ^ (idx * 3 + axis))
            u = (h / _M64) * 2.0 - 1.0
            out.append(float(p[axis]) + s * u)
        return tuple(out)

    def _init_shell(self):
        lo = self.box_lo
        hi = self.box_hi
        corners = [(x, y, z) for x in (lo[0], hi[0])
                   for y in (lo[1], hi[1]) for z in (lo[2], hi[2])]
        for i, c in enumerate(corners):
            self.points.append(self._jitter(c, i))
            self.meta.append(VertexMeta("shell"))
            self.vert_tet.append(-1)
        # brute-force Delaunay of the 8 jittered corners
        quads = []
        for quad in combinations(range(8), 4):
            pa, pb, pc, pd = (self.points[q] for q in quad)
            o = orient3d(pa, pb, pc, pd)
            if o == 0:
                raise MeshError("degenerate shell corners")
            others = [q for q in range(8) if q not in quad]
            tup = quad if o > 0 else (quad[0], quad[1], quad[3], quad[2])
            pts = [self.points[q] for q in tup]
            if all(insphere(*pts, self.points[q]) <= 0 for q in others):
                quads.append(tup)
        facet_map = {}
        for tup in quads:
            t = self._alloc_tet(tup)
            for i in range(4):
                key = tuple(sorted(tup[j] for j in _FACES[i]))
                if key in facet_map:
                    ot, oi = facet_map.pop(key)
                    self.neigh[t][i] = ot
                    self.neigh[ot][oi] = t
                else:
                    facet_map[key] = (t, i)
        for (t, i) in facet_map.values():
            self.neigh[t][i] = -1
        self._last_tet = 0

    def _alloc_tet(self, quad):
        quad = self._canonical(quad)
        if self._free:
            t = self._free.pop()
            self.tets[t] = quad
            self.neigh[t] = [-2, -2, -2, -2]
            self.circum[t] = circumsphere_tet(*(self.points[v] for v in quad))
        else:
            t = len(self.tets)
            self.tets.append(quad)
            self.neigh.append([-2, -2, -2, -2])
            self.circum.append(circumsphere_tet(*(self.points[v] for v in quad)))
        for v in quad:
            self.vert_tet[v] = t
        self.n_alive_tets += 1
        self._last_tet = t
        return t

    def _canonical(self, quad):
        q = sorted(quad)
        o = orient3d(*(self.points[v] for v in q))
        if o == 0:
            raise MeshError(f"flat tetrahedron {q}")
        if o < 0:
            q[2], q[3] = q[3], q[2]
        return tuple(q)

    def _kill_tet(self, t):
        self.tets[t] = None
        self.neigh[t] = None
        self.circum[t] = None
        self._free.append(t)
        self.n_alive_tets -= 1

    # ------------------------------------------------------------------
    # queries

    def alive_tets(self):
        return (t for t, q in enumerate(self.tets) if q is not None)

    def is_ghost(self, t):
        return any(v < 8 for v in self.tets[t])

    def tet_points(self, t):
        return tuple(self.points[v] for v in self.tets[t])

    def _contains(self, t, p):
        quad = self.tets[t]
        for i in range(4):
            f = _FACES[i]
            if orient3d(self.points[quad[f[0]]], self.points[quad[f[1]]],
                        self.points[quad[f[2]]], p) < 0:
                return False
        return True

    def locate(self, p):
        """Tet containing p (visibility walk with a linear-scan fallback)."""
        t = self._last_tet
        if t < 0 or self.tets[t] is None:
            t = next(self.alive_tets())
        for step in range(_WALK_CAP):
            quad = self.tets[t]
            moved = False
            rot = (step * 2654435761) % 4
            for k in range(4):
                i = (k + rot) % 4
                f = _FACES[i]
                if orient3d(self.points[quad[f[0]]], self.points[quad[f[1]]],
                            self.points[quad[f[2]]], p) < 0:
                    nt = self.neigh[t][i]
                    if nt == -1:
                        raise MeshError("point outside the bounding shell")
                    t = nt
                    moved = True
                    break
            if not moved:
                return t
        for t in self.alive_tets():
            if self._contains(t, p):
                return t
        raise MeshError("point location failed")

    # ------------------------------------------------------------------
    # insertion

    def probe_insert(self, p, jitter=True):
        """Jitter p and compute its cavity without mutating the mesh.

        Returns (pj, cavity dict, boundary facets, duplicate vertex id).
        """
        pj = self._jitter(p, len(self.points)) if jitter else tuple(map(float, p))
        t0 = self.locate(pj)
        cav = {t0: None}
        stack = [t0]
        while stack:
            t = stack.pop()
            for i in range(4):
                n = self.neigh[t][i]
                if n == -1 or n in cav:
                    continue
                if insphere(*self.tet_points(n), pj) > 0:
                    cav[n] = None
                    stack.append(n)
        # duplicate snap against cavity vertices
        best = None
        for t in cav:
            for v in self.tets[t]:
                q = self.points[v]
                d = max(abs(q[0] - pj[0]), abs(q[1] - pj[1]), abs(q[2] - pj[2]))
                if d <= self.snap_tol and (best is None or d < best[0]):
                    best = (d, v)
        if best is not None:
            return pj, cav, [], best[1]
        if self.audit_cavity:
            for t in cav:
                if insphere(*self.tet_points(t), pj) <= 0:
                    raise MeshError("cavity tet fails the in-ball audit")
        boundary = []
        for t in cav:
            quad = self.tets[t]
            for i in range(4):
                n = self.neigh[t][i]
                if n == -1 or n not in cav:
                    f = _FACES[i]
                    boundary.append(((quad[f[0]], quad[f[1]], quad[f[2]]), n))
        return pj, cav, boundary, None

    def insert_point(self, p, kind="interior", ref=-1, jitter=True, probe=None):
        """Bowyer-Watson insertion; returns an InsertRecord.

        A point within snap tolerance of an existing vertex is not
        inserted; the record flags the duplicate and carries its id.
        """
        if probe is None:
            probe = self.probe_insert(p, jitter=jitter)
        pj, cav, boundary, dup = probe
        if dup is not None:
            return InsertRecord(dup, True, [], [])
        vid = len(self.points)
        self.points.append(pj)
        self.meta.append(VertexMeta(kind, ref))
        self.vert_tet.append(-1)
        destroyed = [self.tets[t] for t in cav]
        for t in cav:
            self._kill_tet(t)
        created = []
        inner = {}
        for (fverts, outer) in boundary:
            nt = self._alloc_tet((fverts[0], fverts[1], fverts[2], vid))
            created.append(nt)
            quad = self.tets[nt]
            fset = frozenset(fverts)
            oi = next(i for i in range(4) if quad[i] not in fset)
            self.neigh[nt][oi] = outer
            if outer != -1:
                oquad = self.tets[outer]
                ooi = next(i for i in range(4) if oquad[i] not in fset)
                self.neigh[outer][ooi] = nt
            for i in range(4):
                if i == oi:
                    continue
                key = tuple(sorted(quad[j] for j in _FACES[i]))
                if key in inner:
                    ot, oi2 = inner.pop(key)
                    self.neigh[nt][i] = ot
                    self.neigh[ot][oi2] = nt
                else:
                    inner[key] = (nt, i)
        if inner:
            raise MeshError("unpaired internal facet after insertion")
        return InsertRecord(vid, False, destroyed, created)

    # ------------------------------------------------------------------
    # removal

    def tets_around_vertex(self, v):
        t0 = self.vert_tet[v]
        if t0 < 0 or self.tets[t0] is None or v not in self.tets[t0]:
            t0 = next((t for t in self.alive_tets() if v in self.tets[t]), None)
            if t0 is None:
                raise MeshError(f"vertex {v} has no incident tets")
        seen = {t0: None}
        stack = [t0]
        while stack:
            t = stack.pop()
            quad = self.tets[t]
            for i in range(4):
                if quad[i] == v:
                    continue
                n = self.neigh[t][i]
                if n != -1 and n not in seen:
                    seen[n] = None
                    stack.append(n)
        return list(seen)

    def remove_point(self, v):
        """Delete vertex v and re-tetrahedralise its star.

        The hole left by the star is filled with the Delaunay tets of the
        link vertices whose circumball strictly contains v -- a local
        rebuild that restores the global Delaunay property.
        """
        if v < 8:
            raise MeshError("cannot remove a bounding-shell vertex")
        if v >= len(self.points) or not self.meta[v].alive:
            raise MeshError(f"unknown vertex {v}")
        star = self.tets_around_vertex(v)
        hole = {}
        link = set()
        for t in star:
            quad = self.tets[t]
            i = quad.index(v)
            f = _FACES[i]
            tri = (quad[f[0]], quad[f[1]], quad[f[2]])
            hole[tuple(sorted(tri))] = self.neigh[t][i]
            link.update(tri)
        w = sorted(link)
        fill = None
        for scale in (10.0, 100.0):
            cand = self._link_fill(v, w, scale)
            if cand is not None and self._fill_matches(cand, set(hole)):
                fill = cand
                break
        if fill is None:
            raise MeshError("removal cavity re-triangulation mismatch")
        destroyed = [self.tets[t] for t in star]
        for t in star:
            self._kill_tet(t)
        created = [self._alloc_tet(quad) for quad in fill]
        inner = {}
        for nt in created:
            quad = self.tets[nt]
            for i in range(4):
                key = tuple(sorted(quad[j] for j in _FACES[i]))
                if key in hole:
                    outer = hole.pop(key)
                    self.neigh[nt][i] = outer
                    if outer != -1:
                        oquad = self.tets[outer]
                        fset = frozenset(key)
                        ooi = next(x for x in range(4) if oquad[x] not in fset)
                        self.neigh[outer][ooi] = nt
                elif key in inner:
                    ot, oi = inner.pop(key)
                    self.neigh[nt][i] = ot
                    self.neigh[ot][oi] = nt
                else:
                    inner[key] = (nt, i)
        if hole or inner:
            raise MeshError("removal adjacency mismatch")  # pragma: no cover
        self.meta[v].alive = False
        self.vert_tet[v] = -1
        return RemoveRecord(v, destroyed, created)

    def _link_fill(self, v, w, scale):
        wl = (min(self.points[x][0] for x in w),
              min(self.points[x][1] for x in w),
              min(self.points[x][2] for x in w))
        wh = (max(self.points[x][0] for x in w),
              max(self.points[x][1] for x in w),
              max(self.points[x][2] for x in w))
        local = TetMesh((wl, wh), seed=_splitmix64(self.seed ^ v),
                        box_scale=scale)
        lmap = {}
        for x in w:
            rec = local.insert_point(self.points[x], jitter=False)
            if rec.duplicate:
                return None
            lmap[rec.vid] = x
        pv = self.points[v]
        fill = []
        for lt in sorted(local.alive_tets()):
            quad = local.tets[lt]
            if any(q < 8 for q in quad):
                continue
            if insphere(*local.tet_points(lt), pv) > 0:
                fill.append(tuple(lmap[q] for q in quad))
        return fill

    @staticmethod
    def _fill_matches(fill, hole_keys):
        # every hole facet used exactly once, every other facet paired
        count = {}
        for quad in fill:
            for i in range(4):
                key = tuple(sorted(quad[j] for j in _FACES[i]))
                count[key] = count.get(key, 0) + 1
        for key, c in count.items():
            if key in hole_keys:
                if c != 1:
                    return False
            elif c != 2:
                return False
        return hole_keys.issubset(count)

    # ------------------------------------------------------------------
    # Voronoi duals

    def voronoi_vertex(self, t):
        """Circumcentre of tet t plus its reliability flag."""
        c, _r2, ok = self.circum[t]
        return c, ok

    def voronoi_edge(self, t, i):
        """Dual of facet i of tet t: a segment, or a box-clipped ray.

        Returns (p, q, bounded).
        """
        c, _ok = self.voronoi_vertex(t)
        n = self.neigh[t][i]
        if n != -1:
            cn, _okn = self.voronoi_vertex(n)
            return c, cn, True
        quad = self.tets[t]
        f = _FACES[i]
        a = self.points[quad[f[0]]]
        b = self.points[quad[f[1]]]
        d = self.points[quad[f[2]]]
        nx = (b[1] - a[1]) * (d[2] - a[2]) - (b[2] - a[2]) * (d[1] - a[1])
        ny = (b[2] - a[2]) * (d[0] - a[0]) - (b[0] - a[0]) * (d[2] - a[2])
        nz = (b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0])
        # _FACES orientation puts the opposite vertex on the positive side,
        # so the outward dual direction is the negative normal
        q = self._clip_ray(c, (-nx, -ny, -nz))
        return c, q, False

    def _clip_ray(self, origin, direction):
        n = math.sqrt(direction[0] ** 2 + direction[1] ** 2 + direction[2] ** 2)
        d = (direction[0] / n, direction[1] / n, direction[2] / n)
        tmax = math.inf
        for ax in range(3):
            if d[ax] > 0:
                tmax = min(tmax, (self.box_hi[ax] - origin[ax]) / d[ax])
            elif d[ax] < 0:
                tmax = min(tmax, (self.box_lo[ax] - origin[ax]) / d[ax])
        tmax = max(tmax, 0.0)
        return (origin[0] + tmax * d[0], origin[1] + tmax * d[1],
                origin[2] + tmax * d[2])

    def find_tet_with_edge(self, u, w):
        for t in self.tets_around_vertex(u):
            if w in self.tets[t]:
                return t
        return None

    def edge_ring(self, u, w, t0=None):
        """Ordered tets around edge (u, w); (ring, closed flag).

        Consecutive ring tets share a face {u, w, pivot}; the walk crosses
        the face opposite the entry pivot each step.
        """
        if t0 is None:
            t0 = self.find_tet_with_edge(u, w)
            if t0 is None:
                raise MeshError(f"edge ({u}, {w}) not in the triangulation")
        quad0 = self.tets[t0]
        oa, ob = (x for x in quad0 if x != u and x != w)

        def walk(first_exit_opposite, first_entry):
            out = []
            t = self.neigh[t0][quad0.index(first_exit_opposite)]
            entry = first_entry
            guard = 0
            while t != -1 and t != t0:
                out.append(t)
                quad = self.tets[t]
                o1, o2 = (x for x in quad if x != u and x != w)
                nxt = self.neigh[t][quad.index(entry)]
                entry = o2 if o1 == entry else o1
                t = nxt
                guard += 1
                if guard > len(self.tets) + 8:
                    raise MeshError("broken ring adjacency")
            return out, t == t0

        fwd, closed = walk(oa, ob)
        ring = [t0] + fwd
        if closed:
            return ring, True
        back, _ = walk(ob, oa)
        back.reverse()
        return back + ring, False

    def voronoi_face(self, u, w):
        """Dual polygon of Delaunay edge (u, w), box-clipped when open."""
        ring, closed = self.edge_ring(u, w)
        poly = [self.voronoi_vertex(t)[0] for t in ring]
        if not closed:
            first_dir = self._open_end_dir(ring[0], u, w, poly, 0)
            last_dir = self._open_end_dir(ring[-1], u, w, poly, -1)
            poly = ([self._clip_ray(poly[0], first_dir)] + poly
                    + [self._clip_ray(poly[-1], last_dir)])
        return VoronoiFace((u, w), poly, closed)

    def _open_end_dir(self, t, u, w, poly, which):
        # outward dual direction of the hull facet containing (u, w)
        quad = self.tets[t]
        for i in range(4):
            if self.neigh[t][i] == -1:
                f = _FACES[i]
                tri = (quad[f[0]], quad[f[1]], quad[f[2]])
                if u in tri and w in tri:
                    a, b, c = (self.points[x] for x in tri)
                    nx = (b[1] - a[1]) * (c[2] - a[2]) - (b[2] - a[2]) * (c[1] - a[1])
                    ny = (b[2] - a[2]) * (c[0] - a[0]) - (b[0] - a[0]) * (c[2] - a[2])
                    nz = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
                    return (-nx, -ny, -nz)
        # no hull facet found (should not happen for an open ring)
        p = poly[which]
        return (p[0] - poly[len(poly) // 2][0] or 1.0,
                p[1] - poly[len(poly) // 2][1],
                p[2] - poly[len(poly) // 2][2])

    def edge_exists(self, u, w):
        return self.find_tet_with_edge(u, w) is not None

    def nearest_vertex(self, p):
        """Vertex of X nearest to p (greedy descent over Delaunay stars)."""
        t = self.locate(p)
        quad = self.tets[t]
        v = min(quad, key=lambda x: ((self.points[x][0] - p[0]) ** 2
                                     + (self.points[x][1] - p[1]) ** 2
                                     + (self.points[x][2] - p[2]) ** 2))
        bd = ((self.points[v][0] - p[0]) ** 2
              + (self.points[v][1] - p[1]) ** 2
              + (self.points[v][2] - p[2]) ** 2)
        while True:
            best = v
            for t2 in self.tets_around_vertex(v):
                for x in self.tets[t2]:
                    q = self.points[x]
                    dx = ((q[0] - p[0]) ** 2 + (q[1] - p[1]) ** 2
                          + (q[2] - p[2]) ** 2)
                    if dx < bd:
                        best = x
                        bd = dx
            if best == v:
                return v
            v = best
