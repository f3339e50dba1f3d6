"""Axis-aligned bounding-box tree over geometric primitives.

Static structure built once over the input polylines / triangle soup and
queried read-only afterwards, so concurrent lookups are safe.  Split rule:
median of primitive box centres along the longest node axis, leaves hold
at most 8 primitives.
"""

import numpy as np

_LEAF_SIZE = 8


class AABBTree:
    """Median-split box tree; ``query_box`` returns candidate primitive ids."""

    def __init__(self, boxes):
        boxes = np.asarray(boxes, dtype=np.float64)
        self.n = len(boxes)
        # per-node: (lox, loy, loz, hix, hiy, hiz, left, right, first, count)
        # leaves have left == -1 and reference a slice of self._perm
        self._nodes = []
        self._perm = np.arange(self.n)
        if self.n:
            centres = 0.5 * (boxes[:, :3] + boxes[:, 3:])
            self._build(boxes, centres, 0, self.n)

    def _build(self, boxes, centres, lo, hi):
        idx = self._perm[lo:hi]
        blo = boxes[idx, :3].min(axis=0)
        bhi = boxes[idx, 3:].max(axis=0)
        node = len(self._nodes)
        self._nodes.append(None)
        if hi - lo <= _LEAF_SIZE:
            self._nodes[node] = (*blo, *bhi, -1, -1, lo, hi - lo)
            return node
        axis = int(np.argmax(bhi - blo))
        order = np.argsort(centres[idx, axis], kind="stable")
        self._perm[lo:hi] = idx[order]
        mid = lo + (hi - lo) // 2
        left = self._build(boxes, centres, lo, mid)
        right = self._build(boxes, centres, mid, hi)
        self._nodes[node] = (*blo, *bhi, left, right, 0, 0)
        return node

    def query_box(self, lo, hi):
        """Primitive ids whose boxes overlap the axis-aligned box [lo, hi]."""
        if not self.n:
            return []
        qx0, qy0, qz0 = lo
        qx1, qy1, qz1 = hi
        out = []
        stack = [0]
        nodes = self._nodes
        perm = self._perm
        while stack:
            nd = nodes[stack.pop()]
            if (nd[3] < qx0 or nd[0] > qx1 or nd[4] < qy0 or
                    nd[1] > qy1 or nd[5] < qz0 or nd[2] > qz1):
                continue
            if nd[6] < 0:
                first, count = nd[8], nd[9]
                out.extend(perm[first:first + count])
            else:
                stack.append(nd[7])
                stack.append(nd[6])
        return out

    def query_segment(self, p, q, pad=0.0):
        """Candidates for the segment p-q, expanded by ``pad`` on all sides."""
        lo = (min(p[0], q[0]) - pad, min(p[1], q[1]) - pad, min(p[2], q[2]) - pad)
        hi = (max(p[0], q[0]) + pad, max(p[1], q[1]) + pad, max(p[2], q[2]) + pad)
        return self.query_box(lo, hi)

    def query_sphere(self, centre, radius):
        lo = (centre[0] - radius, centre[1] - radius, centre[2] - radius)
        hi = (centre[0] + radius, centre[1] + radius, centre[2] + radius)
        return self.query_box(lo, hi)


def boxes_for_segments(points, segments, pad=0.0):
    """(n,6) bounds array for vertex-indexed segments."""
    out = np.empty((len(segments), 6))
    for k, seg in enumerate(segments):
        a = points[seg[0]]
        b = points[seg[1]]
        out[k, :3] = np.minimum(a, b) - pad
        out[k, 3:] = np.maximum(a, b) + pad
    return out


def boxes_for_triangles(points, triangles, pad=0.0):
    """(n,6) bounds array for vertex-indexed triangles."""
    out = np.empty((len(triangles), 6))
    for k, tri in enumerate(triangles):
        p = points[list(tri[:3])]
        out[k, :3] = p.min(axis=0) - pad
        out[k, 3:] = p.max(axis=0) + pad
    return out
