"""Vectorized pure-numpy kernel implementations.

Fallback backend (``NULLFEM_BACKEND=numpy``). Products and permutation
kernels are fully vectorized; the factorizations keep an outer Python loop
(they are inherently sequential) but vectorize every inner update with
fancy indexing. All functions operate on raw CSR arrays: ``indptr`` int64
of length ``nrows+1``, ``indices`` int64, ``data`` float64, assumed
canonical (sorted, deduplicated). Index arrays used as CSC carriers for
factors follow the same conventions.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"

_EMPTY_I = np.empty(0, np.int64)
_EMPTY_F = np.empty(0, np.float64)


def coo_to_csr(nrows, ncols, rows, cols, vals):
    """Canonical CSR from unsorted COO: sort, sum duplicates, drop exact zeros."""
    if rows.size == 0:
        return np.zeros(nrows + 1, np.int64), _EMPTY_I.copy(), _EMPTY_F.copy()
    order = np.lexsort((cols, rows))
    rows = rows[order]
    cols = cols[order]
    vals = vals[order]
    fresh = np.empty(rows.size, bool)
    fresh[0] = True
    fresh[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
    starts = np.flatnonzero(fresh)
    sums = np.add.reduceat(vals, starts)
    keep = sums != 0.0
    urows = rows[starts][keep]
    ucols = cols[starts][keep]
    sums = sums[keep]
    indptr = np.zeros(nrows + 1, np.int64)
    np.cumsum(np.bincount(urows, minlength=nrows), out=indptr[1:])
    return indptr, ucols.astype(np.int64, copy=False), sums


def _expand_rows(nrows, indptr):
    return np.repeat(np.arange(nrows, dtype=np.int64), np.diff(indptr))


def csr_matvec(nrows, indptr, indices, data, x):
    if data.size == 0:
        return np.zeros(nrows)
    return np.bincount(
        _expand_rows(nrows, indptr), weights=data * x[indices], minlength=nrows
    )


def csr_matvec_t(nrows, ncols, indptr, indices, data, x):
    if data.size == 0:
        return np.zeros(ncols)
    return np.bincount(
        indices, weights=data * x[_expand_rows(nrows, indptr)], minlength=ncols
    )


def csr_transpose(nrows, ncols, indptr, indices, data):
    row_ids = _expand_rows(nrows, indptr)
    order = np.lexsort((row_ids, indices))
    indptr_t = np.zeros(ncols + 1, np.int64)
    np.cumsum(np.bincount(indices, minlength=ncols), out=indptr_t[1:])
    return indptr_t, row_ids[order], data[order]


def csr_matmul(anrows, ap, ai, ax, bncols, bp, bi, bx):
    # COO expansion: every A entry contributes the matching B row.
    cnt = bp[ai + 1] - bp[ai]
    total = int(cnt.sum())
    if total == 0:
        return np.zeros(anrows + 1, np.int64), _EMPTY_I.copy(), _EMPTY_F.copy()
    ends = np.cumsum(cnt)
    offs = np.repeat(ends - cnt, cnt)
    idx = np.arange(total, dtype=np.int64) - offs + np.repeat(bp[ai], cnt)
    out_rows = np.repeat(_expand_rows(anrows, ap), cnt)
    out_cols = bi[idx]
    out_vals = np.repeat(ax, cnt) * bx[idx]
    return coo_to_csr(anrows, bncols, out_rows, out_cols, out_vals)


def csr_add(nrows, ncols, ap, ai, ax, bp, bi, bx):
    rows = np.concatenate([_expand_rows(nrows, ap), _expand_rows(nrows, bp)])
    cols = np.concatenate([ai, bi])
    vals = np.concatenate([ax, bx])
    return coo_to_csr(nrows, ncols, rows, cols, vals)


# ---------------------------------------------------------------------------
# Cholesky: up-looking LL^T on the lower triangle, factor stored by columns.
# ---------------------------------------------------------------------------


def chol_etree(n, indptr, indices):
    """Elimination tree of a symmetric matrix given by its CSR pattern."""
    parent = np.full(n, -1, np.int64)
    ancestor = np.full(n, -1, np.int64)
    for k in range(n):
        for p in range(indptr[k], indptr[k + 1]):
            i = indices[p]
            while i != -1 and i < k:
                nxt = ancestor[i]
                ancestor[i] = k
                if nxt == -1:
                    parent[i] = k
                i = nxt
    return parent


def _ereach(indptr, indices, k, parent, mark, path, stack, n):
    # Row pattern of L(k, :) in topological order at stack[top:n].
    top = n
    mark[k] = k
    for p in range(indptr[k], indptr[k + 1]):
        i = indices[p]
        if i >= k:
            continue
        depth = 0
        while i != -1 and mark[i] != k:
            path[depth] = i
            depth += 1
            mark[i] = k
            i = parent[i]
        while depth > 0:
            depth -= 1
            top -= 1
            stack[top] = path[depth]
    return top


def chol_counts(n, indptr, indices, parent):
    """Entries per column of the Cholesky factor (diagonal included)."""
    counts = np.ones(n, np.int64)
    mark = np.full(n, -1, np.int64)
    for k in range(n):
        mark[k] = k
        for p in range(indptr[k], indptr[k + 1]):
            i = indices[p]
            if i >= k:
                continue
            while i != -1 and mark[i] != k:
                counts[i] += 1
                mark[i] = k
                i = parent[i]
    return counts


def chol_factor(n, indptr, indices, data, parent, colptr):
    """Numeric up-looking factorization. Returns (Li, Lx, fail).

    ``colptr`` comes from :func:`chol_counts`; columns of L are emitted with
    the diagonal entry first. ``fail`` is the pivot row (permuted numbering)
    where a non-positive pivot appeared, or -1 on success.
    """
    nnz = int(colptr[n])
    Li = np.empty(nnz, np.int64)
    Lx = np.empty(nnz, np.float64)
    nxt = colptr[:n].astype(np.int64)
    x = np.zeros(n)
    mark = np.full(n, -1, np.int64)
    path = np.empty(n, np.int64)
    stack = np.empty(n, np.int64)
    for k in range(n):
        top = _ereach(indptr, indices, k, parent, mark, path, stack, n)
        d = 0.0
        for p in range(indptr[k], indptr[k + 1]):
            j = indices[p]
            if j < k:
                x[j] = data[p]
            elif j == k:
                d = data[p]
        for t in range(top, n):
            i = stack[t]
            lki = x[i] / Lx[colptr[i]]
            x[i] = 0.0
            s0 = colptr[i] + 1
            s1 = nxt[i]
            x[Li[s0:s1]] -= Lx[s0:s1] * lki
            d -= lki * lki
            Li[nxt[i]] = k
            Lx[nxt[i]] = lki
            nxt[i] += 1
        if d <= 0.0:
            return Li, Lx, k
        Li[nxt[k]] = k
        Lx[nxt[k]] = np.sqrt(d)
        nxt[k] += 1
    return Li, Lx, -1


def chol_solve(n, colptr, Li, Lx, b):
    """Solve L L^T x = b with the factor from :func:`chol_factor`."""
    x = b.astype(np.float64).copy()
    for j in range(n):
        xj = x[j] / Lx[colptr[j]]
        x[j] = xj
        s0 = colptr[j] + 1
        s1 = colptr[j + 1]
        x[Li[s0:s1]] -= Lx[s0:s1] * xj
    for j in range(n - 1, -1, -1):
        s0 = colptr[j] + 1
        s1 = colptr[j + 1]
        if s1 > s0:
            x[j] -= np.dot(Lx[s0:s1], x[Li[s0:s1]])
        x[j] /= Lx[colptr[j]]
    return x


# ---------------------------------------------------------------------------
# LU: left-looking with partial pivoting on CSC input.
# ---------------------------------------------------------------------------


def _dfs(j, Gp, Gi, top, xi, pstack, pinv, marked):
    head = 0
    xi[0] = j
    while head >= 0:
        j = xi[head]
        jnew = pinv[j]
        if not marked[j]:
            marked[j] = True
            pstack[head] = 0 if jnew < 0 else Gp[jnew]
        done = True
        p2 = 0 if jnew < 0 else Gp[jnew + 1]
        for p in range(pstack[head], p2):
            i = Gi[p]
            if marked[i]:
                continue
            pstack[head] = p
            head += 1
            xi[head] = i
            done = False
            break
        if done:
            head -= 1
            top -= 1
            xi[top] = j
    return top


def _splsolve(Lp, Li, Lx, Ap, Ai, Ax, col, xi, pstack, x, pinv, marked, n):
    # x = L \ A(:, col); pattern returned in xi[top:n] (topological order).
    top = n
    for p in range(Ap[col], Ap[col + 1]):
        if not marked[Ai[p]]:
            top = _dfs(Ai[p], Lp, Li, top, xi, pstack, pinv, marked)
    for p in range(top, n):
        x[xi[p]] = 0.0
    for p in range(Ap[col], Ap[col + 1]):
        x[Ai[p]] = Ax[p]
    for px in range(top, n):
        j = xi[px]
        J = pinv[j]
        if J < 0:
            continue
        x[j] /= Lx[Lp[J]]
        s0 = Lp[J] + 1
        s1 = Lp[J + 1]
        if s1 > s0:
            x[Li[s0:s1]] -= Lx[s0:s1] * x[j]
    for p in range(top, n):
        marked[xi[p]] = False
    return top


def _grow(arr, need):
    if need <= arr.shape[0]:
        return arr
    out = np.empty(max(need, 2 * arr.shape[0]), arr.dtype)
    out[: arr.shape[0]] = arr
    return out


def lu_factor(n, Ap, Ai, Ax, abs_pivot_tol):
    """Left-looking LU with partial pivoting of a CSC matrix.

    Returns ``(Lp, Li, Lx, Up, Ui, Ux, pinv, fail)``. L has unit diagonal
    stored first per column; U columns end with their diagonal. ``pinv``
    maps original row -> pivot position. ``fail`` is the elimination step
    with no pivot above ``abs_pivot_tol``, or -1 on success.
    """
    cap = max(4 * Ax.size + n, 16)
    Lp = np.zeros(n + 1, np.int64)
    Up = np.zeros(n + 1, np.int64)
    Li = np.empty(cap, np.int64)
    Lx = np.empty(cap, np.float64)
    Ui = np.empty(cap, np.int64)
    Ux = np.empty(cap, np.float64)
    pinv = np.full(n, -1, np.int64)
    marked = np.zeros(n, bool)
    x = np.zeros(n)
    xi = np.empty(n, np.int64)
    pstack = np.empty(n, np.int64)
    lnz = 0
    unz = 0
    for k in range(n):
        Lp[k] = lnz
        Up[k] = unz
        Li = _grow(Li, lnz + n + 1)
        Lx = _grow(Lx, lnz + n + 1)
        Ui = _grow(Ui, unz + n + 1)
        Ux = _grow(Ux, unz + n + 1)
        top = _splsolve(Lp, Li, Lx, Ap, Ai, Ax, k, xi, pstack, x, pinv, marked, n)
        ipiv = -1
        a = -1.0
        for p in range(top, n):
            i = xi[p]
            if pinv[i] < 0:
                t = abs(x[i])
                if t > a:
                    a = t
                    ipiv = i
            else:
                Ui[unz] = pinv[i]
                Ux[unz] = x[i]
                unz += 1
        if ipiv == -1 or a <= abs_pivot_tol:
            return Lp, Li, Lx, Up, Ui, Ux, pinv, k
        pivot = x[ipiv]
        Ui[unz] = k
        Ux[unz] = pivot
        unz += 1
        pinv[ipiv] = k
        Li[lnz] = ipiv
        Lx[lnz] = 1.0
        lnz += 1
        for p in range(top, n):
            i = xi[p]
            if pinv[i] < 0:
                Li[lnz] = i
                Lx[lnz] = x[i] / pivot
                lnz += 1
            x[i] = 0.0
    Lp[n] = lnz
    Up[n] = unz
    for p in range(lnz):
        Li[p] = pinv[Li[p]]
    return Lp, Li[:lnz], Lx[:lnz], Up, Ui[:unz], Ux[:unz], pinv, -1


def lu_solve_factored(n, Lp, Li, Lx, Up, Ui, Ux, pinv, b):
    """Solve with an :func:`lu_factor` result (column order handled by caller)."""
    x = np.empty(n)
    x[pinv] = b
    for j in range(n):
        xj = x[j]
        s0 = Lp[j] + 1
        s1 = Lp[j + 1]
        if xj != 0.0 and s1 > s0:
            x[Li[s0:s1]] -= Lx[s0:s1] * xj
    for j in range(n - 1, -1, -1):
        s0 = Up[j]
        s1 = Up[j + 1] - 1
        x[j] /= Ux[s1]
        xj = x[j]
        if xj != 0.0 and s1 > s0:
            x[Ui[s0:s1]] -= Ux[s0:s1] * xj
    return x
