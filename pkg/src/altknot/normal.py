"""Normal surface coordinates over a triangulated knot manifold.

A surface is a 7t-vector of non-negative integers: for tetrahedron i,
positions 7i..7i+3 count the four triangle types (triangle v cuts off
vertex v) and positions 7i+4..7i+6 count the three quadrilateral types.
Quadrilateral q separates the vertex pair QUAD_PAIRS[q][0] from
QUAD_PAIRS[q][1].

Euler characteristic, connectedness and orientability are read off an
explicitly identified cell complex: disk corners are points on edge
classes, disk sides are arcs identified across face gluings.  The same
stacking conventions drive the geometric pair realization in dtcode.
"""

from __future__ import annotations

from dataclasses import dataclass

from .triangulation import FACE_VERTICES, TriangulationError

QUAD_PAIRS = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))

# quad type separating vertices a and b (i.e. {a,b} is one of its pairs)
_SEP = {}
for _q, (_p1, _p2) in enumerate(QUAD_PAIRS):
    _SEP[frozenset(_p1)] = _q
    _SEP[frozenset(_p2)] = _q


def quad_separating(a, b):
    return _SEP[frozenset((a, b))]


def quad_crosses(q, a, b):
    p1, p2 = QUAD_PAIRS[q]
    return (a in p1) != (b in p1)


def quad_cut_corner(q, f):
    """Corner cut by quad q's arc in face f: the vertex of f that the
    quad separates from the other two."""
    p1, p2 = QUAD_PAIRS[q]
    if f in p1:
        return p1[0] if p1[1] == f else p1[1]
    return p2[0] if p2[1] == f else p2[1]


def tri_index(tet, v):
    return 7 * tet + v


def quad_index(tet, q):
    return 7 * tet + 4 + q


def coordinate_length(tri):
    return 7 * tri.tet_count


def arc_count(x, tet, f, v):
    """Arcs of type (face f, corner v) contributed by tetrahedron tet."""
    return x[tri_index(tet, v)] + x[quad_index(tet, quad_separating(v, f))]


# ---------------------------------------------------------------------------
# linear structure

def matching_system(tri):
    """One row per arc type per interior face class; 6t-3 rows for a
    one-vertex knot manifold triangulation."""
    n = coordinate_length(tri)
    rows = []
    for (i, f), (j, g), p in tri.interior_faces:
        for v in FACE_VERTICES[f]:
            row = [0] * n
            row[tri_index(i, v)] += 1
            row[quad_index(i, quad_separating(v, f))] += 1
            row[tri_index(j, p[v])] -= 1
            row[quad_index(j, quad_separating(p[v], g))] -= 1
            rows.append(row)
    return rows


def is_admissible(x):
    """At most one quadrilateral type per tetrahedron."""
    if len(x) % 7:
        raise ValueError("coordinate length must be a multiple of 7")
    for base in range(0, len(x), 7):
        if sum(1 for q in range(3) if x[base + 4 + q] > 0) > 1:
            return False
    return True


def satisfies_matching(tri, x):
    for (i, f), (j, g), p in tri.interior_faces:
        for v in FACE_VERTICES[f]:
            if arc_count(x, i, f, v) != arc_count(x, j, g, p[v]):
                return False
    return True


def check_solution(tri, x):
    if len(x) != coordinate_length(tri):
        raise ValueError("expected %d coordinates" % coordinate_length(tri))
    if min(x) < 0:
        raise ValueError("negative coordinate")
    if not satisfies_matching(tri, x):
        raise ValueError("matching equations violated")
    if not is_admissible(x):
        raise ValueError("admissibility violated")


def present_quad(x, tet):
    """The single quad type present in a tetrahedron, or None."""
    for q in range(3):
        if x[quad_index(tet, q)] > 0:
            return q
    return None


def haken_sum(x, w):
    """Componentwise sum of compatible solutions."""
    if len(x) != len(w):
        raise ValueError("length mismatch")
    for base in range(0, len(x), 7):
        qa = [q for q in range(3) if x[base + 4 + q] > 0]
        qb = [q for q in range(3) if w[base + 4 + q] > 0]
        if qa and qb and qa != qb:
            raise ValueError(
                "incompatible quadrilateral types in tetrahedron %d" % (base // 7))
    return tuple(a + b for a, b in zip(x, w))


def vertex_link_vector(tri):
    """The link of the single vertex: one disk of every triangle type."""
    x = [0] * coordinate_length(tri)
    for i in range(tri.tet_count):
        for v in range(4):
            x[tri_index(i, v)] = 1
    return tuple(x)


# ---------------------------------------------------------------------------
# boundary coordinates

def boundary_arc_counts(tri, x, face):
    """Arc counts of the surface in a boundary face, ascending corner order."""
    i, f = face
    return tuple(arc_count(x, i, f, v) for v in FACE_VERTICES[f])


def is_closed(tri, x):
    return all(max(boundary_arc_counts(tri, x, face), default=0) == 0
               for face in tri.boundary_faces)


def boundary_coords(tri, x):
    """(y1, y2, y3) at the designated face phi, ascending corner order.

    The counts in the other boundary face are derived from the shared edge
    crossing numbers and checked against the surface.
    """
    bdry = tri.boundary
    triple = boundary_arc_counts(tri, x, bdry.phi)
    n = bdry.n_from_triple(bdry.phi, triple)
    other = bdry.faces[1]
    expect = bdry.triple_from_n(other, n)
    actual = boundary_arc_counts(tri, x, other)
    if expect != actual:
        raise TriangulationError(
            "boundary matching violated: %r vs %r" % (expect, actual))
    return triple


# ---------------------------------------------------------------------------
# the identified cell complex of a normal surface

class SurfaceComplex:
    """Instantiated disks of a normal solution, with identified corner
    points and side arcs.

    Stacking conventions (normal order): triangle copies nest toward
    their vertex innermost-first; quadrilateral copies stack between the
    triangle families, ordered away from the pair containing vertex 0.
    """

    def __init__(self, tri, x, check=True):
        check_solution(tri, x)
        self.tri = tri
        self.x = tuple(x)
        self.edge_total = {}
        for cls in tri.edge_classes:
            counts = {self._incidence_count(i, a, b) for (i, a, b) in cls.reps}
            if check and len(counts) != 1:
                raise AssertionError("edge point counts disagree on class %d"
                                     % cls.index)
            self.edge_total[cls.index] = counts.pop()
        self.disks = []
        for tet in range(tri.tet_count):
            for dt in range(7):
                for k in range(1, x[7 * tet + dt] + 1):
                    self.disks.append((tet, dt, k))

    def _incidence_count(self, tet, a, b):
        base = 7 * tet
        total = self.x[base + a] + self.x[base + b]
        for q in range(3):
            if quad_crosses(q, a, b):
                total += self.x[base + 4 + q]
        return total

    # -- point and arc identities ------------------------------------------

    def point(self, tet, a, b, dtype, k):
        """Global id (edge class, rank) of a disk corner on directed edge
        a->b of a tetrahedron.  Rank is 1-based along the canonical
        direction of the edge class."""
        base = 7 * tet
        x = self.x
        if dtype < 4:
            if dtype == a:
                pos = k
            elif dtype == b:
                pos = self._incidence_count(tet, a, b) - k + 1
            else:
                raise ValueError("triangle %d has no corner on edge (%d,%d)"
                                 % (dtype, a, b))
        else:
            q = dtype - 4
            if not quad_crosses(q, a, b):
                raise ValueError("quad %d has no corner on edge (%d,%d)"
                                 % (q, a, b))
            p1 = QUAD_PAIRS[q][0]
            nq = x[base + dtype]
            level = k if a in p1 else nq - k + 1
            pos = x[base + a] + level
        cls, sgn = self.tri.edge_lookup(tet, a, b)
        total = self.edge_total[cls]
        rank = pos if sgn > 0 else total - pos + 1
        return (cls, rank)

    def arc_rank(self, tet, f, v, dtype, k):
        """Nesting rank (1 = innermost) of a disk's arc among the arcs of
        type (face f, corner v) on the tet side."""
        if dtype < 4:
            return k
        q = dtype - 4
        nq = self.x[quad_index(tet, q)]
        level = k if v in QUAD_PAIRS[q][0] else nq - k + 1
        return self.x[tri_index(tet, v)] + level

    def disk_boundary(self, disk):
        """Boundary cycle: list of (tet_face, corner, rank, pt_from, pt_to)
        for each side arc, traversed in a fixed cyclic order."""
        tet, dt, k = disk
        out = []
        if dt < 4:
            v = dt
            others = [w for w in range(4) if w != v]
            a_, b_, c_ = others
            cyc = [(a_, b_, c_), (b_, c_, a_), (c_, a_, b_)]
            for w1, w2, fopp in cyc:
                p_from = self.point(tet, v, w1, dt, k)
                p_to = self.point(tet, v, w2, dt, k)
                out.append(((tet, fopp), v, self.arc_rank(tet, fopp, v, dt, k),
                            p_from, p_to))
        else:
            q = dt - 4
            (p0, p1), (r0, r1) = QUAD_PAIRS[q]
            corners = [(p0, r0), (p0, r1), (p1, r1), (p1, r0)]
            faces = [p1, r0, p0, r1]
            for idx in range(4):
                ca = corners[idx]
                cb = corners[(idx + 1) % 4]
                f = faces[idx]
                v = quad_cut_corner(q, f)
                p_from = self.point(tet, ca[0], ca[1], dt, k)
                p_to = self.point(tet, cb[0], cb[1], dt, k)
                out.append(((tet, f), v, self.arc_rank(tet, f, v, dt, k),
                            p_from, p_to))
        return out

    def arc_incidences(self):
        """Map (face class key, canonical corner, rank) ->
        [(disk, pt_from, pt_to), ...] with one entry per side."""
        canon = {}
        for (i, f), (j, g), p in self.tri.interior_faces:
            pinv = tuple(p.index(v) for v in range(4))
            canon[(i, f)] = ((i, f), None)
            canon[(j, g)] = ((i, f), pinv)
        for bf in self.tri.boundary_faces:
            canon[bf] = (bf, None)
        arcs = {}
        for disk in self.disks:
            for (tf, v, rank, p_from, p_to) in self.disk_boundary(disk):
                key_face, pinv = canon[tf]
                cv = v if pinv is None else pinv[v]
                arcs.setdefault((key_face, cv, rank), []).append(
                    (disk, p_from, p_to))
        return arcs


def euler_characteristic(tri, x):
    """V - E + F of the identified cell complex carried by x."""
    if max(x, default=0) == 0:
        return 0
    sc = SurfaceComplex(tri, x)
    v_cells = sum(sc.edge_total.values())
    e_cells = 0
    for (i, f), (j, g), p in tri.interior_faces:
        for v in FACE_VERTICES[f]:
            e_cells += arc_count(x, i, f, v)
    for (i, f) in tri.boundary_faces:
        for v in FACE_VERTICES[f]:
            e_cells += arc_count(x, i, f, v)
    f_cells = sum(x)
    return v_cells - e_cells + f_cells


def _disk_adjacency(sc):
    arcs = sc.arc_incidences()
    pairs = []
    for key, sides in arcs.items():
        face = key[0]
        is_boundary = sc.tri.gluings[face[0]][face[1]] is None
        if is_boundary:
            if len(sides) != 1:
                raise AssertionError("boundary arc with %d sides" % len(sides))
        else:
            if len(sides) != 2:
                raise AssertionError("interior arc with %d sides" % len(sides))
            pairs.append(sides)
    return pairs


def is_connected(tri, x):
    """Connectivity of the carried surface via disk adjacency."""
    sc = SurfaceComplex(tri, x)
    if not sc.disks:
        return False
    parent = {d: d for d in sc.disks}

    def find(d):
        while parent[d] != d:
            parent[d] = parent[parent[d]]
            d = parent[d]
        return d

    for sides in _disk_adjacency(sc):
        (d1, _, _), (d2, _, _) = sides
        r1, r2 = find(d1), find(d2)
        if r1 != r2:
            parent[r2] = r1
    roots = {find(d) for d in sc.disks}
    return len(roots) == 1


def is_orientable_surface(tri, x):
    """Whether the carried surface is orientable (parity propagation of
    disk orientations across identified arcs)."""
    sc = SurfaceComplex(tri, x)
    parent = {d: d for d in sc.disks}
    parity = {d: 0 for d in sc.disks}

    def find_full(d):
        root = d
        acc = 0
        while parent[root] != root:
            acc ^= parity[root]
            root = parent[root]
        return root, acc

    ok = True
    for sides in _disk_adjacency(sc):
        (d1, f1, t1), (d2, f2, t2) = sides
        # compatible orientations traverse the shared arc oppositely
        rel = 0 if (f1, t1) == (t2, f2) else 1
        if (f1, t1) != (t2, f2) and (f1, t1) != (f2, t2):
            raise AssertionError("arc endpoints disagree across the gluing")
        r1, p1 = find_full(d1)
        r2, p2 = find_full(d2)
        if r1 == r2:
            if (p1 ^ p2) != rel:
                ok = False
                break
        else:
            parent[r2] = r1
            parity[r2] = p1 ^ p2 ^ rel
    return ok


# ---------------------------------------------------------------------------
# spanning surfaces

FAMILY_ONE_ZERO = "ONE_ZERO"
FAMILY_ZERO_ONE = "ZERO_ONE"


@dataclass(frozen=True)
class SpanningSurfaceRecord:
    """A connected-boundary normal spanning surface: boundary meets the
    meridian exactly once."""

    coords: tuple
    euler: int
    connected: bool
    family: str
    y: int

    def boundary_triple(self):
        if self.family == FAMILY_ONE_ZERO:
            return (self.y, 1, 0)
        return (self.y, 0, 1)


def classify_spanning(tri, x, marking=None):
    """SpanningSurfaceRecord when the boundary is (y,1,0) or (y,0,1) in
    the meridian-normalized corner order; None otherwise."""
    marking = marking or tri.meridian
    if marking is None:
        raise TriangulationError("classification needs a meridian marking")
    order = tri.boundary.spanning_order(marking)
    raw = boundary_coords(tri, x)
    y1, y2, y3 = (raw[order[0]], raw[order[1]], raw[order[2]])
    if y2 + y3 != 1:
        return None
    family = FAMILY_ONE_ZERO if y2 == 1 else FAMILY_ZERO_ONE
    rec = SpanningSurfaceRecord(
        coords=tuple(x),
        euler=euler_characteristic(tri, x),
        connected=is_connected(tri, x),
        family=family,
        y=y1,
    )
    # single essential curve: second/third coordinate one rules out parallel
    # copies, and a zero coordinate rules out trivial components
    assert min(raw) == 0
    return rec


def intersection_number(a, b):
    """Minimal geometric intersection number of the boundary curves of two
    spanning surface records on the boundary torus."""
    if a.family == b.family:
        return abs(a.y - b.y)
    return a.y + b.y + 1
