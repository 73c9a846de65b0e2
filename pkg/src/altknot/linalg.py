"""Exact integer matrix routines: Smith normal form, kernels, homology ranks.

Everything here works on plain lists of Python ints, so there is no
coefficient overflow anywhere in the pipeline.
"""

from __future__ import annotations


def _identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def smith_normal_form(A):
    """Return (D, U, V) with D = U*A*V, U and V unimodular, D diagonal.

    The diagonal entries of D are non-negative and satisfy the divisibility
    chain d1 | d2 | ... .  A is a list of rows and is not modified.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    D = [row[:] for row in A]
    U = _identity(m)
    V = _identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):
        # row dst += c * row src
        Ds, Dd = D[src], D[dst]
        for k in range(n):
            Dd[k] += c * Ds[k]
        Us, Ud = U[src], U[dst]
        for k in range(m):
            Ud[k] += c * Us[k]

    def add_col(src, dst, c):
        for row in D:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    def negate_row(i):
        D[i] = [-x for x in D[i]]
        U[i] = [-x for x in U[i]]

    t = 0
    while t < m and t < n:
        # locate smallest nonzero entry in the remaining submatrix
        piv = None
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = D[i][j]
                if v != 0 and (best is None or abs(v) < best):
                    best = abs(v)
                    piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        if D[t][t] < 0:
            negate_row(t)
        # clear row and column t; restart if a remainder shrinks the pivot
        while True:
            p = D[t][t]
            dirty = False
            for i in range(t + 1, m):
                if D[i][t] != 0:
                    q = D[i][t] // p
                    add_row(t, i, -q)
                    if D[i][t] != 0:
                        swap_rows(t, i)
                        if D[t][t] < 0:
                            negate_row(t)
                        dirty = True
                        break
            if dirty:
                continue
            for j in range(t + 1, n):
                if D[t][j] != 0:
                    q = D[t][j] // p
                    add_col(t, j, -q)
                    if D[t][j] != 0:
                        swap_cols(t, j)
                        dirty = True
                        break
            if not dirty:
                break
        t += 1

    # enforce the divisibility chain
    r = t
    changed = True
    while changed:
        changed = False
        for i in range(r - 1):
            a, b = D[i][i], D[i + 1][i + 1]
            if a and b % a != 0:
                # fold entry b into position i via the standard 2x2 trick
                add_col(i + 1, i, 1)
                while True:
                    p = D[i][i]
                    if p == 0:
                        swap_rows(i, i + 1)
                        continue
                    q = D[i + 1][i] // p
                    add_row(i, i + 1, -q)
                    if D[i + 1][i] == 0:
                        break
                    swap_rows(i, i + 1)
                    if D[i][i] < 0:
                        negate_row(i)
                # now clear the (i, i+1) entry
                p = D[i][i]
                q = D[i][i + 1] // p
                add_col(i, i + 1, -q)
                if D[i][i + 1] != 0 or D[i + 1][i] != 0:
                    raise AssertionError("SNF divisibility pass failed")
                if D[i][i] < 0:
                    negate_row(i)
                if D[i + 1][i + 1] < 0:
                    negate_row(i + 1)
                changed = True
    return D, U, V


def elementary_divisors(A):
    """Nonzero diagonal entries of the Smith form, in divisibility order."""
    D, _, _ = smith_normal_form(A)
    out = []
    for i in range(min(len(D), len(D[0]) if D else 0)):
        if D[i][i] != 0:
            out.append(D[i][i])
    return out


def integer_rank(A):
    return len(elementary_divisors(A))


def kernel_basis(A):
    """Basis of the saturated integer kernel {x in Z^n : A x = 0}.

    Returned as a list of length-n integer vectors; the basis spans every
    integer solution (SNF right transform guarantees saturation).
    """
    m = len(A)
    n = len(A[0]) if m else 0
    if m == 0:
        return [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    D, _, V = smith_normal_form(A)
    rank = 0
    for i in range(min(m, n)):
        if D[i][i] != 0:
            rank += 1
    basis = []
    for j in range(rank, n):
        basis.append([V[i][j] for i in range(n)])
    return basis


def matvec(A, x):
    return [sum(a * b for a, b in zip(row, x)) for row in A]


def quotient_group(rows, n):
    """Invariant factors of Z^n / <rows>, split as (free_rank, torsion list).

    Torsion entries are the elementary divisors that are > 1.
    """
    if not rows:
        return n, []
    divs = elementary_divisors(rows)
    torsion = [d for d in divs if d > 1]
    free = n - len(divs)
    return free, torsion
