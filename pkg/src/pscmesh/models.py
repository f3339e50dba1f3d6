"""Bundled benchmark geometries.

Three inputs exercise the pipeline end to end: a subdivided icosahedral
sphere (smooth closed surface, no curves), the unit cube with all twelve
edges tagged as crease curves, and a "wedge" -- the unit cube with a free
interior V-shaped curve whose apex subtends 20 degrees, which needs collar
protection.
"""

import math

from .geometry import PiecewiseComplex, write_complex


def icosphere(subdivisions=2, radius=1.0):
    """Closed triangulated sphere as one surface patch, no curves."""
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]

    def normalise(p):
        n = math.sqrt(p[0] ** 2 + p[1] ** 2 + p[2] ** 2)
        return (radius * p[0] / n, radius * p[1] / n, radius * p[2] / n)

    verts = [normalise(p) for p in verts]
    for _ in range(subdivisions):
        cache = {}
        new_faces = []

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                a = verts[i]
                b = verts[j]
                cache[key] = len(verts)
                verts.append(normalise(((a[0] + b[0]) / 2.0,
                                        (a[1] + b[1]) / 2.0,
                                        (a[2] + b[2]) / 2.0)))
            return cache[key]

        for (i, j, k) in faces:
            ij = midpoint(i, j)
            jk = midpoint(j, k)
            ik = midpoint(i, k)
            new_faces.extend([(i, ij, ik), (j, jk, ij), (k, ik, jk),
                              (ij, jk, ik)])
        faces = new_faces
    triangles = [(i, j, k, 0) for (i, j, k) in faces]
    return PiecewiseComplex(verts, [], triangles)


_CUBE_VERTS = [
    (0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (1.0, 1.0, 0.0), (0.0, 1.0, 0.0),
    (0.0, 0.0, 1.0), (1.0, 0.0, 1.0), (1.0, 1.0, 1.0), (0.0, 1.0, 1.0),
]

# two triangles per face, one patch id per face
_CUBE_FACES = [
    (0, 2, 1, 0), (0, 3, 2, 0),   # z = 0
    (4, 5, 6, 1), (4, 6, 7, 1),   # z = 1
    (0, 1, 5, 2), (0, 5, 4, 2),   # y = 0
    (2, 3, 7, 3), (2, 7, 6, 3),   # y = 1
    (1, 2, 6, 4), (1, 6, 5, 4),   # x = 1
    (3, 0, 4, 5), (3, 4, 7, 5),   # x = 0
]

# twelve crease edges, one curve id each
_CUBE_EDGES = [
    (0, 1, 0), (1, 2, 1), (2, 3, 2), (3, 0, 3),
    (4, 5, 4), (5, 6, 5), (6, 7, 6), (7, 4, 7),
    (0, 4, 8), (1, 5, 9), (2, 6, 10), (3, 7, 11),
]


def cube():
    """Unit cube: 6 patches, 12 crease curves, 8 corners."""
    return PiecewiseComplex(_CUBE_VERTS, _CUBE_EDGES, _CUBE_FACES)


def wedge(angle_deg=20.0, wing_length=0.5):
    """Unit cube plus a free interior V-curve with an acute apex.

    The apex angle mirrors sharp CAD inputs; it sits well inside the cube
    so the collar never interacts with the box creases.
    """
    verts = list(_CUBE_VERTS)
    ang = math.radians(angle_deg)
    apex = (0.3, 0.5, 0.5)
    w1 = (apex[0] + wing_length, apex[1], apex[2])
    w2 = (apex[0] + wing_length * math.cos(ang),
          apex[1] + wing_length * math.sin(ang), apex[2])
    base = len(verts)
    verts.extend([apex, w1, w2])
    edges = list(_CUBE_EDGES)
    cid = 12
    edges.append((base + 1, base, cid))
    edges.append((base, base + 2, cid))
    return PiecewiseComplex(verts, edges, _CUBE_FACES)


BENCHMARKS = {
    "icosphere": lambda: icosphere(2),
    "cube": cube,
    "wedge": wedge,
}


def write_benchmarks(directory):
    """Materialise every bundled benchmark as a .psc file."""
    import os
    paths = {}
    for name, make in BENCHMARKS.items():
        path = os.path.join(directory, f"{name}.psc")
        write_complex(make(), path)
        paths[name] = path
    return paths
