"""Enumeration of vertex and fundamental normal surfaces.

Admissibility is non-convex, so enumeration runs over the 3^t admissible
patterns (one allowed quad type per tetrahedron); each pattern cone is a
face of the full solution cone, so its extreme rays are vertex surfaces.
Fundamental surfaces are the union of the pattern Hilbert bases: extreme
rays plus half-open parallelepiped points of simplicial subcones, then a
global irreducibility reduction.

All arithmetic is exact (Python integers and Fractions).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import gcd

from . import normal
from .linalg import kernel_basis, smith_normal_form
from .normal import (boundary_coords, euler_characteristic, is_connected,
                     matching_system, quad_index)

KIND_VERTEX = "VERTEX"
KIND_FUNDAMENTAL = "FUNDAMENTAL"


class ResourceExhausted(RuntimeError):
    """An enumeration cap was hit; results would be incomplete."""


@dataclass(frozen=True)
class EnumerationOptions:
    max_rays: int = 10 ** 6          # intermediate rays per pattern
    max_index: int = 10 ** 6         # parallelepiped points per pattern
    workers: int = 1

    def __post_init__(self):
        if self.max_rays <= 0 or self.max_index <= 0 or self.workers <= 0:
            raise ValueError("caps must be positive")


@dataclass(frozen=True)
class SurfaceInfo:
    coords: tuple
    euler: int
    connected: bool
    boundary: tuple


@dataclass(frozen=True)
class SurfaceSet:
    kind: str
    surfaces: tuple

    def vectors(self):
        return [s.coords for s in self.surfaces]

    def __len__(self):
        return len(self.surfaces)


def _primitive(vec):
    g = 0
    for v in vec:
        g = gcd(g, abs(v))
    if g <= 1:
        return tuple(vec)
    return tuple(v // g for v in vec)


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _rank(rows):
    """Rank over Q by fraction-free elimination."""
    mat = [list(map(Fraction, r)) for r in rows]
    n = len(mat[0]) if mat else 0
    rank = 0
    col = 0
    while rank < len(mat) and col < n:
        piv = next((r for r in range(rank, len(mat)) if mat[r][col]), None)
        if piv is None:
            col += 1
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        pv = mat[rank][col]
        for r in range(rank + 1, len(mat)):
            if mat[r][col]:
                f = mat[r][col] / pv
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[rank])]
        rank += 1
        col += 1
    return rank


# ---------------------------------------------------------------------------
# double description over one admissible pattern

def _pattern_zero_dims(tri, pattern):
    """Coordinates forced to zero: the two quad types not chosen."""
    zeros = []
    for tet, q in enumerate(pattern):
        for other in range(3):
            if other != q:
                zeros.append(quad_index(tet, other))
    return zeros


def _extreme_rays(equalities, n, zero_dims, free_dims, max_rays):
    """Extreme rays of {x >= 0, Ex = 0, x[zero_dims] = 0}, primitive and
    sorted.

    Double description: the lineality space of the equality system is
    killed first using independent coordinate constraints (leaving a
    simplicial cone whose generators are all extreme), then the remaining
    non-negativity constraints are added with the combinatorial adjacency
    test, which is exact because the ray pool stays minimal throughout.
    """
    rows = [list(r) for r in equalities]
    for dim in zero_dims:
        row = [0] * n
        row[dim] = 1
        rows.append(row)
    lin = [list(v) for v in kernel_basis(rows)]
    rays = []
    remaining = list(free_dims)
    processed = []

    while lin:
        i = next((k for k in remaining if any(v[k] for v in lin)), None)
        if i is None:
            raise AssertionError("cone has positive-dimensional lineality")
        piv = next(v for v in lin if v[i] != 0)
        if piv[i] < 0:
            piv = [-a for a in piv]
        d0 = piv[i]
        lin = [list(_primitive([a * d0 - v[i] * b for a, b in zip(v, piv)]))
               for v in lin if v is not piv]
        rays = [list(_primitive([a * d0 - r[i] * b for a, b in zip(r, piv)]))
                for r in rays]
        rays.append(list(_primitive(piv)))
        remaining.remove(i)
        processed.append(i)

    for i in remaining:
        pos = [r for r in rays if r[i] > 0]
        neg = [r for r in rays if r[i] < 0]
        zero = [r for r in rays if r[i] == 0]
        zsets = {id(r): frozenset(k for k in processed if r[k] == 0)
                 for r in rays}
        new_rays = pos + zero
        for rp in pos:
            for rn in neg:
                inter = zsets[id(rp)] & zsets[id(rn)]
                blocked = False
                for other in rays:
                    if other is rp or other is rn:
                        continue
                    if inter <= zsets[id(other)]:
                        blocked = True
                        break
                if not blocked:
                    w = [rp[i] * b - rn[i] * a for a, b in zip(rp, rn)]
                    new_rays.append(list(_primitive(w)))
        rays = new_rays
        processed.append(i)
        if len(rays) > max_rays:
            raise ResourceExhausted(
                "ray count %d exceeds cap %d" % (len(rays), max_rays))
    return sorted(tuple(r) for r in rays)


def _pattern_rays(tri, equalities, pattern, options):
    n = normal.coordinate_length(tri)
    zero_dims = _pattern_zero_dims(tri, pattern)
    free = [i for i in range(n) if i not in set(zero_dims)]
    rays = _extreme_rays(equalities, n, zero_dims, free, options.max_rays)
    for r in rays:
        if any(v >= 2 ** 63 for v in r):
            raise ResourceExhausted("ray coordinate exceeds 2^63")
    return rays


def _all_patterns(t):
    pattern = [0] * t
    while True:
        yield tuple(pattern)
        k = t - 1
        while k >= 0 and pattern[k] == 2:
            pattern[k] = 0
            k -= 1
        if k < 0:
            return
        pattern[k] += 1


# ---------------------------------------------------------------------------
# Hilbert basis of one pattern cone

def _solve_in_basis(basis, target):
    """Integer coefficients expressing target in the given lattice basis."""
    cols = len(basis)
    rows = len(target)
    mat = [[Fraction(basis[j][i]) for j in range(cols)] for i in range(rows)]
    rhs = [Fraction(v) for v in target]
    piv_cols = []
    r = 0
    for c in range(cols):
        piv = next((k for k in range(r, rows) if mat[k][c]), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        rhs[r], rhs[piv] = rhs[piv], rhs[r]
        pv = mat[r][c]
        for k in range(rows):
            if k != r and mat[k][c]:
                f = mat[k][c] / pv
                mat[k] = [a - f * b for a, b in zip(mat[k], mat[r])]
                rhs[k] -= f * rhs[r]
        piv_cols.append(c)
        r += 1
    sol = [Fraction(0)] * cols
    for idx, c in enumerate(piv_cols):
        sol[c] = rhs[idx] / mat[idx][c]
    for k in range(r, rows):
        if rhs[k] != 0:
            raise AssertionError("vector not in lattice span")
    out = []
    for v in sol:
        if v.denominator != 1:
            raise AssertionError("vector not in lattice (fractional coeff)")
        out.append(int(v))
    return out


def _parallelepiped_points(subset, max_index):
    """Integer points of the half-open parallelepiped spanned by an
    independent set of integer vectors (ambient coordinates)."""
    d = len(subset)
    n = len(subset[0])
    ortho = kernel_basis([list(s) for s in subset])  # orthogonal... no: Ax=0
    # kernel_basis(rows=subset) returns x with subset . x = 0, i.e. the
    # orthogonal complement of span(subset).
    if ortho:
        lattice = kernel_basis(ortho)
    else:
        lattice = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    if len(lattice) != d:
        raise AssertionError("lattice dimension mismatch")
    M = []  # columns: subset vectors in lattice coords
    for s in subset:
        M.append(_solve_in_basis(lattice, s))
    Mt = [[M[j][i] for j in range(d)] for i in range(d)]  # d x d, cols = coeffs
    D, U, V = smith_normal_form(Mt)
    diag = [D[i][i] for i in range(d)]
    index = 1
    for v in diag:
        index *= max(v, 1)
    if index > max_index:
        raise ResourceExhausted(
            "parallelepiped index %d exceeds cap %d" % (index, max_index))
    if index == 1:
        return []
    # residue tuples c of Z^d / M Z^d lift to w0 = U^-1 c; renormalize into
    # the half-open parallelepiped via lambda = M^-1 w
    from itertools import product as iproduct
    uinv = _int_inverse(U)
    minv = _fraction_inverse(Mt)
    points = []
    ranges = [range(max(v, 1)) for v in diag]
    for c in iproduct(*ranges):
        if all(v == 0 for v in c):
            continue
        w0 = [sum(uinv[i][k] * c[k] for k in range(d)) for i in range(d)]
        lam = [sum(minv[i][k] * w0[k] for k in range(d)) for i in range(d)]
        flo = [v.numerator // v.denominator for v in lam]
        w = [w0[i] - sum(Mt[i][k] * flo[k] for k in range(d)) for i in range(d)]
        x = [sum(lattice[k][i] * w[k] for k in range(d)) for i in range(n)]
        points.append(tuple(x))
    return points


def _int_inverse(U):
    n = len(U)
    mat = [[Fraction(U[i][j]) for j in range(n)] for i in range(n)]
    inv = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next(k for k in range(c, n) if mat[k][c])
        mat[c], mat[piv] = mat[piv], mat[c]
        inv[c], inv[piv] = inv[piv], inv[c]
        pv = mat[c][c]
        mat[c] = [a / pv for a in mat[c]]
        inv[c] = [a / pv for a in inv[c]]
        for k in range(n):
            if k != c and mat[k][c]:
                f = mat[k][c]
                mat[k] = [a - f * b for a, b in zip(mat[k], mat[c])]
                inv[k] = [a - f * b for a, b in zip(inv[k], inv[c])]
    out = []
    for row in inv:
        out.append([int(v) if v.denominator == 1 else None for v in row])
        if None in out[-1]:
            raise AssertionError("matrix is not unimodular")
    return out


def _fraction_inverse(M):
    n = len(M)
    mat = [[Fraction(M[i][j]) for j in range(n)] for i in range(n)]
    inv = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next(k for k in range(c, n) if mat[k][c])
        mat[c], mat[piv] = mat[piv], mat[c]
        inv[c], inv[piv] = inv[piv], inv[c]
        pv = mat[c][c]
        mat[c] = [a / pv for a in mat[c]]
        inv[c] = [a / pv for a in inv[c]]
        for k in range(n):
            if k != c and mat[k][c]:
                f = mat[k][c]
                mat[k] = [a - f * b for a, b in zip(mat[k], mat[c])]
                inv[k] = [a - f * b for a, b in zip(inv[k], inv[c])]
    return inv


def _pattern_hilbert(tri, equalities, pattern, options):
    """Hilbert basis of one admissible pattern cone."""
    rays = _pattern_rays(tri, equalities, pattern, options)
    if not rays:
        return []
    d = _rank(rays)
    candidates = set(rays)
    for subset in combinations(rays, d):
        if _rank(subset) < d:
            continue
        for p in _parallelepiped_points(subset, options.max_index):
            if min(p) >= 0 and any(p):
                candidates.add(tuple(p))
    ordered = sorted(candidates, key=lambda v: (sum(v), v))
    basis = []
    for h in ordered:
        reducible = False
        for g in ordered:
            if g == h or sum(g) >= sum(h) + 1:
                continue
            if all(a <= b for a, b in zip(g, h)) and any(a < b for a, b in zip(g, h)):
                # h - g stays in the pattern cone automatically
                reducible = True
                break
        if not reducible:
            basis.append(h)
    return basis


# ---------------------------------------------------------------------------
# public enumeration API

def _collect_infos(tri, vectors):
    infos = []
    for x in sorted(set(vectors)):
        normal.check_solution(tri, x)
        infos.append(SurfaceInfo(
            coords=tuple(x),
            euler=euler_characteristic(tri, x),
            connected=is_connected(tri, x),
            boundary=boundary_coords(tri, x),
        ))
    return tuple(infos)


def _run_patterns(tri, kind, options):
    equalities = matching_system(tri)
    patterns = list(_all_patterns(tri.tet_count))
    if options.workers == 1:
        vectors = []
        for pattern in patterns:
            vectors.extend(_compute_pattern(tri, equalities, pattern, kind,
                                            options))
        return vectors
    from concurrent.futures import ProcessPoolExecutor
    chunks = [patterns[k::options.workers] for k in range(options.workers)]
    args = [(tri.gluings, chunk, kind, options.max_rays, options.max_index)
            for chunk in chunks if chunk]
    vectors = []
    with ProcessPoolExecutor(max_workers=options.workers) as pool:
        for part in pool.map(_pattern_chunk_worker, args):
            vectors.extend(part)
    return vectors


def _compute_pattern(tri, equalities, pattern, kind, options):
    if kind == KIND_VERTEX:
        return _pattern_rays(tri, equalities, pattern, options)
    return _pattern_hilbert(tri, equalities, pattern, options)


def _pattern_chunk_worker(args):
    from .triangulation import Triangulation
    gluings, patterns, kind, max_rays, max_index = args
    tri = Triangulation(gluings)
    options = EnumerationOptions(max_rays=max_rays, max_index=max_index)
    equalities = matching_system(tri)
    out = []
    for pattern in patterns:
        out.extend(_compute_pattern(tri, equalities, pattern, kind, options))
    return out


def enumerate_vertex_surfaces(tri, options=None):
    """Admissible extreme rays of the solution cone, scaled to their
    minimal integer points."""
    options = options or EnumerationOptions()
    tri.require_knot_manifold()
    vectors = _run_patterns(tri, KIND_VERTEX, options)
    infos = _collect_infos(tri, vectors)
    if not infos:
        raise AssertionError("vertex enumeration lost the vertex link")
    return SurfaceSet(KIND_VERTEX, infos)


def enumerate_fundamental_surfaces(tri, options=None):
    """Union of the pattern-cone Hilbert bases: every normal surface is a
    non-negative integer combination of these."""
    options = options or EnumerationOptions()
    tri.require_knot_manifold()
    vectors = _run_patterns(tri, KIND_FUNDAMENTAL, options)
    infos = _collect_infos(tri, vectors)
    return SurfaceSet(KIND_FUNDAMENTAL, infos)


# ---------------------------------------------------------------------------
# independent brute-force oracle (bounded exhaustive lattice walk)

def _fm_eliminate(rows, k):
    """Project coeffs.z + const >= 0 onto variables < k."""
    keep = []
    pos = []
    neg = []
    for coeffs, const in rows:
        if coeffs[k] == 0:
            keep.append((coeffs, const))
        elif coeffs[k] > 0:
            pos.append((coeffs, const))
        else:
            neg.append((coeffs, const))
    for pc, pa in pos:
        for nc, na in neg:
            mp = -nc[k]
            mn = pc[k]
            coeffs = tuple(mp * a + mn * b for a, b in zip(pc, nc))
            const = mp * pa + mn * na
            g = 0
            for v in coeffs:
                g = gcd(g, abs(v))
            g = gcd(g, abs(const))
            if g > 1:
                coeffs = tuple(v // g for v in coeffs)
                const = const // g
            if all(v == 0 for v in coeffs):
                if const < 0:
                    return None  # infeasible
                continue
            keep.append((coeffs, const))
    return sorted(set(keep))


def _bounded_solutions(tri, bound):
    """All x >= 0 with matching equations, 0 < sum(x) <= bound."""
    n = normal.coordinate_length(tri)
    basis = kernel_basis(matching_system(tri))
    d = len(basis)
    rows = []
    for i in range(n):
        rows.append((tuple(basis[k][i] for k in range(d)), 0))
    rows.append((tuple(-sum(basis[k][i] for i in range(n)) for k in range(d)),
                 bound))
    systems = [None] * (d + 1)
    systems[d] = sorted(set(rows))
    for k in range(d - 1, 0, -1):
        nxt = _fm_eliminate(systems[k + 1], k)
        if nxt is None:
            return []
        systems[k] = nxt
    out = []
    z = [0] * d

    def descend(level):
        sys_rows = systems[level + 1]
        lo = None
        hi = None
        for coeffs, const in sys_rows:
            ck = coeffs[level]
            if ck == 0:
                continue
            val = const + sum(coeffs[j] * z[j] for j in range(level))
            if ck > 0:
                b = -(val // ck)          # z_level >= ceil(-val / ck)
                lo = b if lo is None else max(lo, b)
            else:
                b = val // (-ck)          # z_level <= floor(val / -ck)
                hi = b if hi is None else min(hi, b)
        if lo is None or hi is None:
            raise ResourceExhausted("oracle polytope is unbounded")
        for v in range(lo, hi + 1):
            z[level] = v
            if level + 1 == d:
                x = tuple(sum(basis[k][i] * z[k] for k in range(d))
                          for i in range(n))
                if min(x) >= 0 and 0 < sum(x) <= bound:
                    out.append(x)
            else:
                descend(level + 1)
        z[level] = 0

    if d:
        descend(0)
    return out


def brute_force_fundamental_oracle(tri, bound):
    """Exhaustive fundamental surfaces with coordinate sum <= bound:
    admissible matching solutions not expressible as a sum of two nonzero
    admissible solutions (checked within the same bounded set)."""
    tri.require_knot_manifold()
    if bound <= 0:
        return SurfaceSet(KIND_FUNDAMENTAL, ())
    sols = [x for x in _bounded_solutions(tri, bound) if normal.is_admissible(x)]
    sols.sort(key=lambda v: (sum(v), v))
    keep = []
    for h in sols:
        reducible = False
        for g in sols:
            if sum(g) >= sum(h):
                break
            if all(a <= b for a, b in zip(g, h)):
                reducible = True
                break
        if not reducible:
            keep.append(h)
    return SurfaceSet(KIND_FUNDAMENTAL, _collect_infos(tri, keep))


# ---------------------------------------------------------------------------
# cache files

class CacheMismatch(RuntimeError):
    pass


def save_surface_set(path, sset, content_hash):
    lines = ["hash %s" % content_hash, "kind %s" % sset.kind]
    for info in sset.surfaces:
        lines.append("x7t: " + " ".join(str(v) for v in info.coords))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_surface_set(path, tri, content_hash):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 2 or not lines[0].startswith("hash ") \
            or not lines[1].startswith("kind "):
        raise CacheMismatch("malformed cache file %s" % path)
    if lines[0].split()[1] != content_hash:
        raise CacheMismatch("stale cache (input hash changed)")
    kind = lines[1].split()[1]
    vectors = []
    for ln in lines[2:]:
        if not ln.startswith("x7t:"):
            raise CacheMismatch("malformed cache line %r" % ln)
        vectors.append(tuple(int(v) for v in ln[4:].split()))
    return SurfaceSet(kind, _collect_infos(tri, vectors))


def content_hash(text):
    return hashlib.sha256(text.encode()).hexdigest()
