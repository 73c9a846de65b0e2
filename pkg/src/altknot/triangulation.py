"""One-vertex triangulations of knot manifolds.

A triangulation is a list of tetrahedra with face gluings.  Tetrahedron
vertices are labelled 0..3 and face k is the face opposite vertex k.  A
gluing of face k of tetrahedron i is a pair (j, perm) where perm is a
4-tuple sending vertex labels of tetrahedron i to vertex labels of
tetrahedron j; face k lands on face perm[k] of tetrahedron j.  Unglued
faces form the boundary.

Text format (one tetrahedron per line, `b` marks a boundary face):

    tets 2
    meridian 1 0 0
    tet 0: b 1:0123 1:1230 b
    tet 1: 0:0123 b b 0:2013

The meridian may instead be given as `meridian slope a/b basis e1 e2`,
where e1 and e2 index boundary edge classes in canonical order.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .linalg import quotient_group


class TriangulationError(ValueError):
    """Malformed or invalid triangulation data."""


# ---------------------------------------------------------------------------
# permutations on {0,1,2,3}

def perm_inverse(p):
    q = [0, 0, 0, 0]
    for i, v in enumerate(p):
        q[v] = i
    return tuple(q)


def perm_compose(p, q):
    """(p after q): x -> p[q[x]]."""
    return tuple(p[q[x]] for x in range(4))


def perm_parity(p):
    """+1 for even, -1 for odd."""
    inv = 0
    for i in range(4):
        for j in range(i + 1, 4):
            if p[i] > p[j]:
                inv += 1
    return 1 if inv % 2 == 0 else -1


FACE_VERTICES = {f: tuple(v for v in range(4) if v != f) for f in range(4)}
TET_EDGES = [(a, b) for a in range(4) for b in range(a + 1, 4) ]


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        p = self.parent
        root = x
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[ry] = rx

    def classes(self):
        groups = {}
        for x in self.parent:
            groups.setdefault(self.find(x), []).append(x)
        return list(groups.values())


@dataclass(frozen=True)
class MeridianMarking:
    """Marked meridian: either arc counts at the designated face phi
    (`triple`) or a slope over two boundary edge classes (`slope`,
    `basis`)."""

    triple: tuple | None = None
    slope: tuple | None = None
    basis: tuple | None = None

    def __post_init__(self):
        if (self.triple is None) == (self.slope is None):
            raise TriangulationError("marking needs a triple or a slope")
        if self.slope is not None:
            a, b = self.slope
            if a == b == 0 or gcd(a, b) != 1:
                raise TriangulationError("meridian slope must be coprime")
            if self.basis is None or len(self.basis) != 2 \
                    or self.basis[0] == self.basis[1]:
                raise TriangulationError("slope marking needs two distinct basis edges")


class EdgeClass:
    """An edge of the triangulation: an orbit of directed tetrahedron
    edges.  `reps` lists the directed representatives (tet, a, b) of the
    canonical direction; the reversed orbit is implicit."""

    def __init__(self, index, reps, boundary):
        self.index = index
        self.reps = reps              # sorted list of (tet, a, b)
        self.boundary = boundary

    @property
    def degree(self):
        return len(self.reps)

    def __repr__(self):
        return "EdgeClass(%d, %s%s)" % (
            self.index, self.reps[0], ", bdry" if self.boundary else "")


class Triangulation:
    """Immutable face-gluing data plus derived combinatorial structure."""

    def __init__(self, gluings, meridian=None):
        self.gluings = tuple(tuple(face for face in tet) for tet in gluings)
        self.tet_count = len(self.gluings)
        self.meridian = meridian
        if self.tet_count == 0:
            raise TriangulationError("empty triangulation")
        self._check_gluings()
        self._build_edges()
        self._build_vertices()
        self._build_faces()
        self._orient()
        self._boundary = None

    # -- construction checks ------------------------------------------------

    def _check_gluings(self):
        t = self.tet_count
        for i, tet in enumerate(self.gluings):
            if len(tet) != 4:
                raise TriangulationError("tet %d needs 4 face records" % i)
            for f, g in enumerate(tet):
                if g is None:
                    continue
                j, p = g
                if not (0 <= j < t):
                    raise TriangulationError(
                        "tet %d face %d glued to missing tet %d" % (i, f, j))
                if sorted(p) != [0, 1, 2, 3]:
                    raise TriangulationError(
                        "tet %d face %d: bad permutation %r" % (i, f, p))
                if j == i and p[f] == f:
                    raise TriangulationError(
                        "tet %d face %d glued to itself" % (i, f))
                back = self.gluings[j][p[f]]
                if back is None or back[0] != i or back[1] != perm_inverse(p):
                    raise TriangulationError(
                        "gluing of tet %d face %d is not involutive" % (i, f))

    # -- derived structure ---------------------------------------------------

    def _build_edges(self):
        directed = [(i, a, b)
                    for i in range(self.tet_count)
                    for a in range(4) for b in range(4) if a != b]
        uf = _UnionFind(directed)
        for i, tet in enumerate(self.gluings):
            for f, g in enumerate(tet):
                if g is None:
                    continue
                j, p = g
                for a, b in TET_EDGES:
                    if a == f or b == f:
                        continue
                    uf.union((i, a, b), (j, p[a], p[b]))
                    uf.union((i, b, a), (j, p[b], p[a]))
        orbit_of = {}
        for cls in uf.classes():
            key = min(cls)
            for d in cls:
                orbit_of[d] = key
        self.invalid_edges = []
        seen = {}
        classes = []
        direction = {}
        for i in range(self.tet_count):
            for a, b in TET_EDGES:
                k1 = orbit_of[(i, a, b)]
                k2 = orbit_of[(i, b, a)]
                if k1 == k2:
                    if k1 not in self.invalid_edges:
                        self.invalid_edges.append(k1)
        bdry_faces = [(i, f) for i, tet in enumerate(self.gluings)
                      for f, g in enumerate(tet) if g is None]
        bdry_face_set = set(bdry_faces)
        for cls in sorted(uf.classes(), key=min):
            key = min(cls)
            rev_key = orbit_of[(key[0], key[2], key[1])]
            if rev_key == key:
                continue  # invalid edge, already recorded
            if rev_key in seen:
                continue  # this is the reversed copy of an earlier class
            seen[key] = len(classes)
            on_bdry = any(
                (i, f) in bdry_face_set
                for (i, a, b) in cls
                for f in range(4) if f != a and f != b)
            ec = EdgeClass(len(classes), sorted(cls), on_bdry)
            classes.append(ec)
            for (i, a, b) in cls:
                direction[(i, a, b)] = (ec.index, 1)
                direction[(i, b, a)] = (ec.index, -1)
        self.edge_classes = classes
        self._edge_dir = direction   # directed tet edge -> (class, sign)

    def edge_lookup(self, tet, a, b):
        """(edge class, sign) of the directed tetrahedron edge a->b."""
        return self._edge_dir[(tet, a, b)]

    def _build_vertices(self):
        corners = [(i, v) for i in range(self.tet_count) for v in range(4)]
        uf = _UnionFind(corners)
        for i, tet in enumerate(self.gluings):
            for f, g in enumerate(tet):
                if g is None:
                    continue
                j, p = g
                for v in FACE_VERTICES[f]:
                    uf.union((i, v), (j, p[v]))
        self.vertex_classes = sorted(uf.classes(), key=min)
        self._vertex_of = {}
        for idx, cls in enumerate(self.vertex_classes):
            for c in cls:
                self._vertex_of[c] = idx

    def _build_faces(self):
        self.boundary_faces = []
        interior = []
        seen = set()
        for i, tet in enumerate(self.gluings):
            for f, g in enumerate(tet):
                if g is None:
                    self.boundary_faces.append((i, f))
                elif (i, f) not in seen:
                    j, p = g
                    seen.add((i, f))
                    seen.add((j, p[f]))
                    interior.append(((i, f), (j, p[f]), p))
        self.interior_faces = interior
        self.face_class_count = len(interior) + len(self.boundary_faces)

    def _orient(self):
        sign = [0] * self.tet_count
        ok = True
        for start in range(self.tet_count):
            if sign[start]:
                continue
            sign[start] = 1
            stack = [start]
            while stack:
                i = stack.pop()
                for f, g in enumerate(self.gluings[i]):
                    if g is None:
                        continue
                    j, p = g
                    want = -sign[i] * perm_parity(p)
                    if sign[j] == 0:
                        sign[j] = want
                        stack.append(j)
                    elif sign[j] != want:
                        ok = False
        self.orientable = ok
        self.orientation = tuple(sign) if ok else None

    # -- reports -------------------------------------------------------------

    def is_connected(self):
        uf = _UnionFind(range(self.tet_count))
        for i, tet in enumerate(self.gluings):
            for g in tet:
                if g is not None:
                    uf.union(i, g[0])
        return len(uf.classes()) == 1

    def _vertex_link_stats(self):
        """Per vertex class: (chi, connected, has_boundary)."""
        stats = []
        for cls in self.vertex_classes:
            pieces = set(cls)
            uf = _UnionFind(pieces)
            n_sides = 0
            boundary_sides = 0
            counted = set()
            for (i, v) in pieces:
                for f in range(4):
                    if f == v:
                        continue
                    g = self.gluings[i][f]
                    if g is None:
                        n_sides += 1
                        boundary_sides += 1
                    else:
                        j, p = g
                        key = frozenset(((i, v, f), (j, p[v], p[f])))
                        if key in counted:
                            continue
                        counted.add(key)
                        n_sides += 1
                        uf.union((i, v), (j, p[v]))
            # corners of the link pieces are directed tet edges (tail = v);
            # their classes are the directed edge orbits.
            corner_keys = set()
            for (i, v) in pieces:
                for w in range(4):
                    if w == v:
                        continue
                    corner_keys.add(self._directed_orbit_key(i, v, w))
            chi = len(corner_keys) - n_sides + len(pieces)
            connected = len(uf.classes()) == 1
            stats.append((chi, connected, boundary_sides > 0))
        return stats

    def _directed_orbit_key(self, i, a, b):
        cls, sgn = self._edge_dir[(i, a, b)]
        return (cls, sgn)

    def validate_knot_manifold(self):
        """Diagnostics report; all checks must pass for a one-vertex knot
        manifold triangulation with a two-face torus boundary."""
        report = {}
        report["connected"] = self.is_connected()
        report["orientable"] = self.orientable
        report["valid_edges"] = not self.invalid_edges
        report["one_vertex"] = len(self.vertex_classes) == 1
        if report["valid_edges"]:
            links = self._vertex_link_stats()
            report["vertex_links_ok"] = all(
                (chi == 1 and conn and bdry) or (chi == 2 and conn and not bdry)
                for chi, conn, bdry in links)
            report["material_vertex_disk"] = all(
                chi == 1 and conn and bdry for chi, conn, bdry in links) \
                if report["one_vertex"] else False
        else:
            report["vertex_links_ok"] = False
            report["material_vertex_disk"] = False
        report["boundary_faces_2"] = len(self.boundary_faces) == 2
        bdry_edges = [e for e in self.edge_classes if e.boundary]
        report["boundary_edges_3"] = len(bdry_edges) == 3
        report["has_boundary"] = len(self.boundary_faces) > 0
        report["boundary_torus"] = (
            report["boundary_faces_2"] and report["boundary_edges_3"]
            and report["one_vertex"] and report["material_vertex_disk"]
            and report["orientable"])
        report["ok"] = all((
            report["connected"], report["orientable"], report["valid_edges"],
            report["one_vertex"], report["material_vertex_disk"],
            report["boundary_torus"]))
        return report

    def require_knot_manifold(self):
        rep = self.validate_knot_manifold()
        if not rep["ok"]:
            failed = sorted(k for k, v in rep.items() if v is False)
            raise TriangulationError("not a knot manifold triangulation: "
                                     + ", ".join(failed))

    # -- boundary structure ----------------------------------------------------

    @property
    def boundary(self):
        if self._boundary is None:
            self._boundary = BoundaryTriangulation(self)
        return self._boundary

    # -- homology ---------------------------------------------------------------

    def _boundary_map_rows(self):
        """One signed edge-class row per face class (2-chain boundary)."""
        rows = []
        n = len(self.edge_classes)
        reps = [pair[0] for pair in self.interior_faces] + self.boundary_faces
        for (i, f) in reps:
            verts = FACE_VERTICES[f]
            row = [0] * n
            cyc = [(verts[0], verts[1]), (verts[1], verts[2]),
                   (verts[2], verts[0])]
            for a, b in cyc:
                cls, sgn = self._edge_dir[(i, a, b)]
                row[cls] += sgn
            rows.append(row)
        return rows

    def homology(self):
        """H1 of the manifold as (free rank, torsion coefficients)."""
        if self.invalid_edges:
            raise TriangulationError("homology needs valid edges")
        if len(self.vertex_classes) != 1:
            raise TriangulationError("homology shortcut needs one vertex")
        return quotient_group(self._boundary_map_rows(),
                              len(self.edge_classes))

    def filled_homology(self, marking=None):
        """H1 of the Dehn filling along the marked curve."""
        marking = marking or self.meridian
        if marking is None:
            raise TriangulationError("no meridian marking")
        a, b, basis = self.boundary.signed_slope(marking)
        row = [0] * len(self.edge_classes)
        row[basis[0]] += a
        row[basis[1]] += b
        rows = self._boundary_map_rows()
        rows.append(row)
        return quotient_group(rows, len(self.edge_classes))

    def meridian_homology_check(self, marking=None):
        """Necessary condition for the marking to be a knot meridian: the
        filled manifold must be a homology sphere."""
        free, torsion = self.filled_homology(marking)
        return free == 0 and not torsion

    # -- mutations (return new values) -----------------------------------------

    def layer(self, edge_index):
        """Glue a fresh tetrahedron over the given boundary edge class: a
        (2,2) move on the boundary triangulation."""
        bdry = self.boundary
        e = self.edge_classes[edge_index]
        if not e.boundary:
            raise TriangulationError("edge %d is not on the boundary" % edge_index)
        sides = bdry.edge_sides(edge_index)
        if len(sides) != 2:
            raise TriangulationError("boundary edge with %d sides" % len(sides))
        (i1, f1, (a1, b1)), (i2, f2, (a2, b2)) = sides
        if (i1, f1) == (i2, f2):
            raise TriangulationError("cannot layer: edge meets one boundary face twice")
        c1 = next(v for v in FACE_VERTICES[f1] if v not in (a1, b1))
        c2 = next(v for v in FACE_VERTICES[f2] if v not in (a2, b2))
        t = self.tet_count
        new = [list(tet) for tet in self.gluings]
        new.append([None] * 4)
        # new tet face 3 ({0,1,2}) onto (i1, f1); face 2 ({0,1,3}) onto (i2, f2)
        p1 = (a1, b1, c1, f1)
        p2 = (a2, b2, f2, c2)
        new[t][3] = (i1, p1)
        new[i1][f1] = (t, perm_inverse(p1))
        new[t][2] = (i2, p2)
        new[i2][f2] = (t, perm_inverse(p2))
        marking = None
        if self.meridian is not None:
            n_old = bdry.meridian_n(self.meridian)
            result = Triangulation(new)
            marking = _transport_marking(bdry, n_old, edge_index, result)
            return Triangulation(new, marking)
        return Triangulation(new)

    def normalize_boundary(self):
        """Layer until the marked meridian is the single-arc curve (1,0,0)
        at the designated face.  Idempotent; requires a marking."""
        if self.meridian is None:
            raise TriangulationError("normalize_boundary needs a meridian marking")
        tri = self
        tri.boundary.check_marking(tri.meridian)
        guard = 0
        while True:
            bdry = tri.boundary
            n = bdry.meridian_n(tri.meridian)
            if min(n) == 0:
                return tri
            order = sorted(range(3), key=lambda k: (-n[k], k))
            k = order[0]
            if n[k] != n[order[1]] + n[order[2]]:
                raise TriangulationError(
                    "inconsistent boundary crossing numbers %r" % (n,))
            tri = tri.layer(bdry.edge_indices[k])
            guard += 1
            if guard > 10000:
                raise TriangulationError("normalization did not terminate")

    def relabeled(self, tet_perm):
        """New triangulation with tetrahedron i renamed tet_perm[i]."""
        t = self.tet_count
        new = [[None] * 4 for _ in range(t)]
        for i, tet in enumerate(self.gluings):
            for f, g in enumerate(tet):
                if g is not None:
                    j, p = g
                    new[tet_perm[i]][f] = (tet_perm[j], p)
        return Triangulation(new, self.meridian)

    # -- misc -------------------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, Triangulation) and \
            self.gluings == other.gluings and self.meridian == other.meridian

    def __hash__(self):
        return hash((self.gluings, self.meridian))

    def __repr__(self):
        return "Triangulation(t=%d, boundary_faces=%d)" % (
            self.tet_count, len(self.boundary_faces))


def _transport_marking(old_bdry, n_old, flipped_index, new_tri):
    """Carry boundary crossing numbers of a curve through one layering."""
    new_bdry = new_tri.boundary
    n_new = []
    for idx in new_bdry.edge_indices:
        cls = new_tri.edge_classes[idx]
        old = _match_old_edge(old_bdry, cls)
        if old is not None and old != flipped_index:
            n_new.append(n_old[old_bdry.edge_indices.index(old)])
        else:
            n_new.append(None)
    survivors = [v for v in n_new if v is not None]
    if len(survivors) != 2 or n_new.count(None) != 1:
        raise TriangulationError("layering did not preserve two boundary edges")
    pos = n_new.index(None)
    ng, nh = survivors
    ne = n_old[old_bdry.edge_indices.index(flipped_index)]
    if ne == ng + nh:
        n_new[pos] = abs(ng - nh)
    else:
        n_new[pos] = ng + nh
    phi = new_bdry.phi
    triple = new_bdry.triple_from_n(phi, tuple(n_new))
    return MeridianMarking(triple=tuple(triple))


def _match_old_edge(old_bdry, new_cls):
    """Identify a new edge class with an old boundary one via shared
    directed representatives."""
    tri = old_bdry.tri
    for (i, a, b) in new_cls.reps:
        if i < tri.tet_count:
            cls, _ = tri.edge_lookup(i, a, b)
            if tri.edge_classes[cls].boundary:
                return cls
    return None


class BoundaryTriangulation:
    """The induced triangulation of the boundary torus: two faces, three
    edges, one vertex, with a deterministically designated face phi."""

    def __init__(self, tri):
        self.tri = tri
        if len(tri.boundary_faces) != 2:
            raise TriangulationError("boundary is not two faces")
        self.faces = sorted(tri.boundary_faces)
        self.phi = self.faces[0]
        bdry = sorted(e.index for e in tri.edge_classes if e.boundary)
        if len(bdry) != 3:
            raise TriangulationError("boundary does not have three edge classes")
        self.edge_indices = bdry          # canonical order
        self._sides = {idx: [] for idx in bdry}
        for (i, f) in self.faces:
            verts = FACE_VERTICES[f]
            for p in range(3):
                a, b = [verts[q] for q in range(3) if q != p]
                cls, sgn = tri.edge_lookup(i, a, b)
                if sgn < 0:
                    a, b = b, a
                self._sides[cls].append((i, f, (a, b)))
        for idx, occ in self._sides.items():
            if len(occ) != 2:
                raise TriangulationError("boundary edge %d has %d sides"
                                         % (idx, len(occ)))

    def edge_sides(self, edge_index):
        """The two (tet, face, directed pair) occurrences of a boundary
        edge, directions aligned with the edge class."""
        return self._sides[edge_index]

    def face_side_edges(self, face):
        """Edge class index of the side opposite each corner position."""
        i, f = face
        verts = FACE_VERTICES[f]
        out = []
        for p in range(3):
            a, b = [verts[q] for q in range(3) if q != p]
            cls, _ = self.tri.edge_lookup(i, a, b)
            out.append(cls)
        return out

    def corners(self, face):
        return FACE_VERTICES[face[1]]

    # -- curve coordinate conversions ------------------------------------------

    def n_from_triple(self, face, triple):
        """Edge crossing numbers (canonical edge order) from corner counts."""
        side_edges = self.face_side_edges(face)
        n = {}
        for p in range(3):
            qa, qb = [q for q in range(3) if q != p]
            n[side_edges[p]] = triple[qa] + triple[qb]
        return tuple(n[idx] for idx in self.edge_indices)

    def triple_from_n(self, face, n):
        side_edges = self.face_side_edges(face)
        m = [n[self.edge_indices.index(c)] for c in side_edges]
        triple = []
        for p in range(3):
            qa, qb = [q for q in range(3) if q != p]
            v = m[qa] + m[qb] - m[p]
            if v < 0 or v % 2:
                raise TriangulationError(
                    "crossing numbers %r are not a normal curve" % (n,))
            triple.append(v // 2)
        return tuple(triple)

    # -- slopes ------------------------------------------------------------------

    def _edge_slopes(self, basis):
        """Slope vectors for the three boundary edges: basis edges get
        (1,0) and (0,1); the third follows from the face relation."""
        e1, e2 = basis
        if e1 not in self.edge_indices or e2 not in self.edge_indices:
            raise TriangulationError("basis edges must be boundary edge classes")
        slopes = {e1: (1, 0), e2: (0, 1)}
        third = next(c for c in self.edge_indices if c not in (e1, e2))
        i, f = self.phi
        verts = FACE_VERTICES[f]
        cyc = [(verts[0], verts[1]), (verts[1], verts[2]), (verts[2], verts[0])]
        coeff = {c: 0 for c in self.edge_indices}
        for a, b in cyc:
            cls, sgn = self.tri.edge_lookup(i, a, b)
            coeff[cls] += sgn
        if coeff[third] == 0:
            raise TriangulationError("degenerate boundary face relation")
        cx = -(coeff[e1] * slopes[e1][0] + coeff[e2] * slopes[e2][0])
        cy = -(coeff[e1] * slopes[e1][1] + coeff[e2] * slopes[e2][1])
        if abs(coeff[third]) != 1 or cx % coeff[third] or cy % coeff[third]:
            raise TriangulationError("boundary face relation is not unimodular")
        slopes[third] = (cx // coeff[third], cy // coeff[third])
        return slopes, third

    def meridian_n(self, marking):
        """Edge crossing numbers of the marked meridian."""
        if marking.triple is not None:
            return self.n_from_triple(self.phi, marking.triple)
        slopes, _ = self._edge_slopes(marking.basis)
        a, b = marking.slope
        out = []
        for c in self.edge_indices:
            sx, sy = slopes[c]
            out.append(abs(a * sy - b * sx))
        return tuple(out)

    def signed_slope(self, marking):
        """The marked curve as a signed combination of two boundary edge
        classes (determined up to overall sign), for homology fillings."""
        if marking.slope is not None:
            return marking.slope[0], marking.slope[1], marking.basis
        basis = (self.edge_indices[0], self.edge_indices[1])
        slopes, third = self._edge_slopes(basis)
        n = self.meridian_n(marking)
        nb = dict(zip(self.edge_indices, n))
        a_abs, b_abs = nb[basis[1]], nb[basis[0]]
        sx, sy = slopes[third]
        for a, b in ((a_abs, b_abs), (a_abs, -b_abs)):
            if abs(a * sy - b * sx) == nb[third]:
                return a, b, basis
        raise TriangulationError("crossing numbers do not fit any slope")

    def check_marking(self, marking):
        """The marking must be a single essential curve."""
        n = self.meridian_n(marking)
        if max(n) == 0:
            raise TriangulationError("meridian marking is empty")
        triple = self.triple_from_n(self.phi, n)
        if min(triple) > 0:
            raise TriangulationError("meridian marking contains a trivial curve")
        if gcd(gcd(n[0], n[1]), n[2]) != 1:
            raise TriangulationError("meridian marking is not a single curve")
        return True

    def spanning_order(self, marking):
        """Corner positions of phi as (meridian corner, low, high): in a
        normalized triangulation the meridian is one arc at phi."""
        n = self.meridian_n(marking)
        triple = self.triple_from_n(self.phi, n)
        if sorted(triple) != [0, 0, 1]:
            raise TriangulationError("triangulation is not boundary-normalized")
        mu = triple.index(1)
        rest = [p for p in range(3) if p != mu]
        return (mu, rest[0], rest[1])


# ---------------------------------------------------------------------------
# parsing and serialization

def parse_triangulation(text):
    """Parse the text format; returns a Triangulation (with meridian
    marking attached when the file carries one)."""
    tets = None
    rows = {}
    marking = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "tets":
            if len(parts) != 2 or not parts[1].isdigit() or int(parts[1]) < 1:
                raise TriangulationError("line %d: bad tets header" % lineno)
            tets = int(parts[1])
        elif parts[0] == "meridian":
            marking = _parse_meridian(parts[1:], lineno)
        elif parts[0] == "tet":
            if len(parts) != 6 or not parts[1].rstrip(":").isdigit():
                raise TriangulationError("line %d: bad tet record" % lineno)
            idx = int(parts[1].rstrip(":"))
            if idx in rows:
                raise TriangulationError("line %d: duplicate tet %d" % (lineno, idx))
            rows[idx] = [_parse_face(tok, lineno) for tok in parts[2:]]
        else:
            raise TriangulationError("line %d: unknown record %r" % (lineno, parts[0]))
    if tets is None:
        raise TriangulationError("missing tets header")
    if sorted(rows) != list(range(tets)):
        raise TriangulationError("tet records do not match header count")
    return Triangulation([rows[i] for i in range(tets)], marking)


def _parse_face(tok, lineno):
    if tok == "b":
        return None
    if ":" not in tok:
        raise TriangulationError("line %d: bad face token %r" % (lineno, tok))
    j, p = tok.split(":", 1)
    if not j.isdigit() or len(p) != 4 or not p.isdigit():
        raise TriangulationError("line %d: bad face token %r" % (lineno, tok))
    perm = tuple(int(c) for c in p)
    if sorted(perm) != [0, 1, 2, 3]:
        raise TriangulationError("line %d: bad permutation %r" % (lineno, tok))
    return (int(j), perm)


def _parse_meridian(parts, lineno):
    if len(parts) == 3 and all(w.lstrip("-").isdigit() for w in parts):
        triple = tuple(int(w) for w in parts)
        if min(triple) < 0:
            raise TriangulationError("line %d: negative meridian counts" % lineno)
        return MeridianMarking(triple=triple)
    if len(parts) == 5 and parts[0] == "slope" and parts[2] == "basis":
        try:
            a, b = parts[1].split("/")
            slope = (int(a), int(b))
            basis = (int(parts[3]), int(parts[4]))
        except ValueError:
            raise TriangulationError("line %d: bad slope marking" % lineno)
        return MeridianMarking(slope=slope, basis=basis)
    raise TriangulationError("line %d: bad meridian record" % lineno)


def serialize_triangulation(tri):
    lines = ["tets %d" % tri.tet_count]
    m = tri.meridian
    if m is not None:
        if m.triple is not None:
            lines.append("meridian %d %d %d" % m.triple)
        else:
            lines.append("meridian slope %d/%d basis %d %d"
                         % (m.slope[0], m.slope[1], m.basis[0], m.basis[1]))
    for i, tet in enumerate(tri.gluings):
        toks = []
        for g in tet:
            if g is None:
                toks.append("b")
            else:
                j, p = g
                toks.append("%d:%s" % (j, "".join(str(v) for v in p)))
        lines.append("tet %d: %s" % (i, " ".join(toks)))
    return "\n".join(lines) + "\n"
