"""Classification of Delaunay simplexes against the input geometry.

An edge / triangle / tet of the ambient tetrahedralisation belongs to the
restricted curve / surface / volume complex when its Voronoi dual (face /
edge / vertex) meets the curve network / surface patches / enclosed
volume.  Restricted edges and triangles carry a surface ball centred on
that dual intersection: when the dual crosses the geometry several times,
the ball of maximum radius is kept.

Classification is pure: it reads the mesh and geometry and returns fresh
records, so re-running it over an unchanged mesh reproduces identical
restricted sets.
"""

import math

from .delaunay import _FACES, circumcentre_triangle

_SQRT3 = math.sqrt(3.0)
_SQRT83 = math.sqrt(8.0 / 3.0)


class RestrictedEdge:
    __slots__ = ("edge", "centre", "radius", "err", "curve_id", "blocked")

    def __init__(self, edge, centre, radius, err, curve_id):
        self.edge = edge          # (u, w) with u < w
        self.centre = centre      # dual-face intersection with the curve net
        self.radius = radius      # surface-ball radius
        self.err = err            # distance ball centre -> edge midpoint
        self.curve_id = curve_id
        self.blocked = False      # set when refinement of it was rejected


class RestrictedTri:
    __slots__ = ("tri", "centre", "radius", "err", "patch_id", "rho",
                 "flagged", "blocked")

    def __init__(self, tri, centre, radius, err, patch_id, rho, flagged):
        self.tri = tri            # sorted vertex triple
        self.centre = centre      # dual-edge intersection with the surface
        self.radius = radius
        self.err = err            # distance ball centre -> in-plane circumcentre
        self.patch_id = patch_id
        self.rho = rho            # circumradius / shortest edge
        self.flagged = flagged    # unreliable dual endpoints
        self.blocked = False


class RestrictedTet:
    __slots__ = ("quad", "tet_id", "centre", "radius", "rho", "vlen",
                 "flagged", "blocked")

    def __init__(self, quad, tet_id, centre, radius, rho, vlen, flagged):
        self.quad = quad          # sorted vertex quadruple
        self.tet_id = tet_id
        self.centre = centre      # circumcentre (interior to the volume)
        self.radius = radius
        self.rho = rho
        self.vlen = vlen          # volume-length quality
        self.flagged = flagged
        self.blocked = False


def element_size(kind, radius):
    """Mean element size from a circumball radius (1=edge, 2=tri, 3=tet).

    The coefficients map radii to edge length for equilateral elements.
    """
    if kind == 1:
        return 2.0 * radius
    if kind == 2:
        return _SQRT3 * radius
    if kind == 3:
        return _SQRT83 * radius
    raise ValueError(f"bad simplex kind {kind}")


def radius_edge_tri(pa, pb, pc):
    """Circumradius over shortest edge for a triangle."""
    _c, r2 = circumcentre_triangle(pa, pb, pc)
    le = min(_d2(pa, pb), _d2(pb, pc), _d2(pa, pc))
    if le == 0.0:
        return math.inf
    return math.sqrt(r2 / le)


def radius_edge_tet(pa, pb, pc, pd):
    """Circumradius over shortest edge for a tetrahedron."""
    from .delaunay import circumsphere_tet
    _c, r2, _ok = circumsphere_tet(pa, pb, pc, pd)
    le = min(_d2(pa, pb), _d2(pa, pc), _d2(pa, pd),
             _d2(pb, pc), _d2(pb, pd), _d2(pc, pd))
    if le == 0.0:
        return math.inf
    return math.sqrt(r2 / le)


def _d2(a, b):
    return (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2


def _dist(a, b):
    return math.sqrt(_d2(a, b))


def volume_length_quad(pa, pb, pc, pd):
    from .quality import volume_length
    return volume_length(pa, pb, pc, pd)


# ----------------------------------------------------------------------
# per-simplex classification


def _face_crossings(mesh, geom, u, w, t0):
    """Verified intersections of the dual face of edge (u, w) with the
    curve network: [(point, curve_id), ...].

    Candidate points come from bisector-plane crossings of nearby curve
    segments; each is accepted only when u / w are its nearest mesh
    vertices, which is the exact membership test for the Voronoi face and
    immune to unreliable circumcentres around sliver rings.
    """
    ring, closed = mesh.edge_ring(u, w, t0=t0)
    if not closed:
        return []
    pu = mesh.points[u]
    pw = mesh.points[w]
    reliable = True
    poly = []
    for t in ring:
        c, ok = mesh.voronoi_vertex(t)
        reliable = reliable and ok
        poly.append(c)
    if reliable and len(poly) >= 3:
        pad = geom.eps
        lo = (min(p[0] for p in poly) - pad, min(p[1] for p in poly) - pad,
              min(p[2] for p in poly) - pad)
        hi = (max(p[0] for p in poly) + pad, max(p[1] for p in poly) + pad,
              max(p[2] for p in poly) + pad)
        cands = geom.seg_tree.query_box(lo, hi)
    else:
        cands = range(len(geom.segments))
    nx = pw[0] - pu[0]
    ny = pw[1] - pu[1]
    nz = pw[2] - pu[2]
    offset = ((pu[0] + pw[0]) * nx + (pu[1] + pw[1]) * ny
              + (pu[2] + pw[2]) * nz) / 2.0
    hits = []
    for sid in sorted(cands):
        i, j, cid = geom.segments[sid]
        a = geom.pts[i]
        b = geom.pts[j]
        da = a[0] * nx + a[1] * ny + a[2] * nz - offset
        db = b[0] * nx + b[1] * ny + b[2] * nz - offset
        dn = db - da
        if abs(dn) <= 1e-300:
            continue
        t = -da / dn
        if t < -1e-12 or t > 1.0 + 1e-12:
            continue
        t = min(max(t, 0.0), 1.0)
        y = (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]),
             a[2] + t * (b[2] - a[2]))
        if mesh.nearest_vertex(y) in (u, w):
            hits.append((y, cid))
    return hits


def classify_edge(mesh, geom, u, w, t0=None):
    """RestrictedEdge when the dual Voronoi face meets the curve network."""
    if not geom.segments:
        return None
    if u < 8 and w < 8:
        return None  # dual faces of pure-shell edges cannot reach the input
    hits = _face_crossings(mesh, geom, u, w, t0)
    if not hits:
        return None
    pu = mesh.points[u]
    pw = mesh.points[w]
    best = max(hits, key=lambda h: _d2(h[0], pu))
    centre, curve_id = best
    radius = _dist(centre, pu)
    mid = ((pu[0] + pw[0]) / 2.0, (pu[1] + pw[1]) / 2.0, (pu[2] + pw[2]) / 2.0)
    return RestrictedEdge((u, w) if u < w else (w, u), centre, radius,
                          _dist(centre, mid), curve_id)


def classify_facet(mesh, geom, t, i):
    """RestrictedTri when the dual Voronoi edge crosses the surface.

    Crossings found along the dual segment are verified by a nearest-vertex
    test (the facet's vertices must be nearest), so unreliable circumcentres
    of near-degenerate tets cannot produce phantom surface membership.
    """
    if not geom.triangles:
        return None
    quad = mesh.tets[t]
    f = _FACES[i]
    tri = (quad[f[0]], quad[f[1]], quad[f[2]])
    if all(v < 8 for v in tri):
        return None
    if mesh.neigh[t][i] == -1:
        return None  # outer-box hull facet
    _c1, ok1 = mesh.voronoi_vertex(t)
    _c2, ok2 = mesh.voronoi_vertex(mesh.neigh[t][i])
    if ok1 and ok2:
        p1, p2, _bounded = mesh.voronoi_edge(t, i)
    else:
        # near-degenerate circumcentre(s): scan along the facet's axis line
        # instead, which is accurate however thin the adjacent tets are
        pa0 = mesh.points[tri[0]]
        pb0 = mesh.points[tri[1]]
        pc0 = mesh.points[tri[2]]
        cc0, _r = circumcentre_triangle(pa0, pb0, pc0)
        e1 = tuple(pb0[k] - pa0[k] for k in range(3))
        e2 = tuple(pc0[k] - pa0[k] for k in range(3))
        n = (e1[1] * e2[2] - e1[2] * e2[1],
             e1[2] * e2[0] - e1[0] * e2[2],
             e1[0] * e2[1] - e1[1] * e2[0])
        nn = math.sqrt(n[0] ** 2 + n[1] ** 2 + n[2] ** 2)
        if nn == 0.0:
            return None
        span = 2.0 * geom.diag + math.dist(cc0, geom.bounds[0])
        p1 = (cc0[0] - span * n[0] / nn, cc0[1] - span * n[1] / nn,
              cc0[2] - span * n[2] / nn)
        p2 = (cc0[0] + span * n[0] / nn, cc0[1] + span * n[1] / nn,
              cc0[2] + span * n[2] / nn)
    hits = geom.intersect_segment_surface(p1, p2)
    hits = [h for h in hits if mesh.nearest_vertex(h[0]) in tri]
    if not hits:
        return None
    pa = mesh.points[tri[0]]
    best = max(hits, key=lambda h: _d2(h[0], pa))
    centre, patch_id = best
    radius = _dist(centre, pa)
    pb = mesh.points[tri[1]]
    pc = mesh.points[tri[2]]
    cc, _r2 = circumcentre_triangle(pa, pb, pc)
    return RestrictedTri(tuple(sorted(tri)), centre, radius,
                         _dist(centre, cc), patch_id,
                         radius_edge_tri(pa, pb, pc),
                         not (ok1 and ok2))


def classify_tet(mesh, geom, t):
    """RestrictedTet when the circumcentre lies inside the volume."""
    if mesh.is_ghost(t):
        return None
    centre, ok = mesh.voronoi_vertex(t)
    if not geom.point_in_volume(centre):
        return None
    quad = mesh.tets[t]
    pts = [mesh.points[v] for v in quad]
    _c, r2, _okc = mesh.circum[t]
    return RestrictedTet(tuple(sorted(quad)), t, centre, math.sqrt(r2),
                         radius_edge_tet(*pts), volume_length_quad(*pts),
                         not ok)


# ----------------------------------------------------------------------
# topological disks


def topo_disk_1(edges, expected_degree, same_curve_required=True):
    """Largest-ball incident edge when the 1-disk condition fails, else None.

    ``edges`` are the restricted edges incident to one vertex;
    ``expected_degree`` is the curve degree the input prescribes there (0
    for vertices that do not lie on the curve network).
    """
    if not edges:
        return None
    k = len(edges)
    if expected_degree == 2 and k == 2:
        if not same_curve_required or edges[0].curve_id == edges[1].curve_id:
            return None
    elif expected_degree not in (0, 2) and k == expected_degree:
        return None
    return max(edges, key=lambda e: (e.radius, e.edge))


def topo_disk_2(p, tris, on_surface, gamma_edges):
    """Largest-ball incident triangle when the 2-disk condition fails.

    ``tris`` are the restricted triangles incident to vertex ``p``,
    ``on_surface`` says whether p lies on the surface geometry, and
    ``gamma_edges`` is the current restricted curve-edge key set.  The fan
    around p must be one edge-connected umbrella: closed for an interior
    vertex, or open with both boundary spokes following restricted curve
    edges.
    """
    if not tris:
        return None

    def failure():
        return max(tris, key=lambda f: (f.radius, f.tri))

    if not on_surface:
        return failure()
    # spoke census: neighbour vertex -> incident triangle indices
    spokes = {}
    for idx, f in enumerate(tris):
        for q in f.tri:
            if q != p:
                spokes.setdefault(q, []).append(idx)
    if any(len(v) > 2 for v in spokes.values()):
        return failure()  # non-manifold spoke
    # edge-connected components over shared spokes
    parent = list(range(len(tris)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for members in spokes.values():
        if len(members) == 2:
            a, b = find(members[0]), find(members[1])
            if a != b:
                parent[a] = b
    if len({find(i) for i in range(len(tris))}) != 1:
        return failure()  # pinched fan
    boundary = [q for q, members in spokes.items() if len(members) == 1]
    if not boundary:
        # closed umbrella: a single cycle has as many triangles as spokes
        if len(tris) == len(spokes):
            return None
        return failure()
    if len(boundary) == 2:
        ok = all(((p, q) if p < q else (q, p)) in gamma_edges
                 for q in boundary)
        if ok:
            return None
    return failure()
