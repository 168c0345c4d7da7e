"""Numba-compiled kernel implementations.

Default backend. Same call surface as :mod:`nullfem._kernels_numpy`, but
every kernel is an ``@njit`` scalar loop; see that module for the array
conventions. Compilation is lazy with on-disk caching, so the first call
of each kernel in a fresh environment pays a one-time compile cost.
"""

from __future__ import annotations

import numpy as np
from numba import njit

BACKEND_NAME = "numba"


@njit(cache=True)
def csr_matvec(nrows, indptr, indices, data, x):
    y = np.zeros(nrows)
    for i in range(nrows):
        s = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            s += data[p] * x[indices[p]]
        y[i] = s
    return y


@njit(cache=True)
def csr_matvec_t(nrows, ncols, indptr, indices, data, x):
    y = np.zeros(ncols)
    for i in range(nrows):
        xi = x[i]
        if xi != 0.0:
            for p in range(indptr[i], indptr[i + 1]):
                y[indices[p]] += data[p] * xi
    return y


@njit(cache=True)
def csr_transpose(nrows, ncols, indptr, indices, data):
    nnz = indices.shape[0]
    indptr_t = np.zeros(ncols + 1, np.int64)
    for p in range(nnz):
        indptr_t[indices[p] + 1] += 1
    for j in range(ncols):
        indptr_t[j + 1] += indptr_t[j]
    indices_t = np.empty(nnz, np.int64)
    data_t = np.empty(nnz, np.float64)
    nxt = indptr_t[:ncols].copy()
    for i in range(nrows):
        for p in range(indptr[i], indptr[i + 1]):
            q = nxt[indices[p]]
            indices_t[q] = i
            data_t[q] = data[p]
            nxt[indices[p]] += 1
    return indptr_t, indices_t, data_t


@njit(cache=True)
def csr_matmul(anrows, ap, ai, ax, bncols, bp, bi, bx):
    # Pass 1: pattern size per row via a marker array.
    mark = np.full(bncols, -1, np.int64)
    cp = np.zeros(anrows + 1, np.int64)
    for i in range(anrows):
        cnt = 0
        for p in range(ap[i], ap[i + 1]):
            k = ai[p]
            for q in range(bp[k], bp[k + 1]):
                j = bi[q]
                if mark[j] != i:
                    mark[j] = i
                    cnt += 1
        cp[i + 1] = cp[i] + cnt
    nnz = cp[anrows]
    ci = np.empty(nnz, np.int64)
    cx = np.empty(nnz, np.float64)
    # Pass 2: numeric accumulation, then sort each row by column.
    acc = np.zeros(bncols)
    mark[:] = -1
    for i in range(anrows):
        length = 0
        base = cp[i]
        for p in range(ap[i], ap[i + 1]):
            k = ai[p]
            av = ax[p]
            for q in range(bp[k], bp[k + 1]):
                j = bi[q]
                if mark[j] != i:
                    mark[j] = i
                    ci[base + length] = j
                    length += 1
                    acc[j] = av * bx[q]
                else:
                    acc[j] += av * bx[q]
        row = np.sort(ci[base : base + length])
        for t in range(length):
            ci[base + t] = row[t]
            cx[base + t] = acc[row[t]]
    # Compact away exact zeros so stored patterns stay minimal.
    out = 0
    for i in range(anrows):
        row_start = cp[i]
        row_stop = cp[i + 1]
        cp[i] = out
        for p in range(row_start, row_stop):
            if cx[p] != 0.0:
                ci[out] = ci[p]
                cx[out] = cx[p]
                out += 1
    cp[anrows] = out
    return cp, ci[:out].copy(), cx[:out].copy()


@njit(cache=True)
def csr_add(nrows, ncols, ap, ai, ax, bp, bi, bx):
    cp = np.zeros(nrows + 1, np.int64)
    cap = ai.shape[0] + bi.shape[0]
    ci = np.empty(cap, np.int64)
    cx = np.empty(cap, np.float64)
    nnz = 0
    for i in range(nrows):
        pa = ap[i]
        pb = bp[i]
        ea = ap[i + 1]
        eb = bp[i + 1]
        while pa < ea or pb < eb:
            if pb >= eb or (pa < ea and ai[pa] < bi[pb]):
                v = ax[pa]
                j = ai[pa]
                pa += 1
            elif pa >= ea or bi[pb] < ai[pa]:
                v = bx[pb]
                j = bi[pb]
                pb += 1
            else:
                v = ax[pa] + bx[pb]
                j = ai[pa]
                pa += 1
                pb += 1
            if v != 0.0:
                ci[nnz] = j
                cx[nnz] = v
                nnz += 1
        cp[i + 1] = nnz
    return cp, ci[:nnz].copy(), cx[:nnz].copy()


# ---------------------------------------------------------------------------
# Cholesky
# ---------------------------------------------------------------------------


@njit(cache=True)
def chol_etree(n, indptr, indices):
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


@njit(cache=True)
def _ereach(indptr, indices, k, parent, mark, path, stack, n):
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


@njit(cache=True)
def chol_counts(n, indptr, indices, parent):
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


@njit(cache=True)
def chol_factor(n, indptr, indices, data, parent, colptr):
    nnz = colptr[n]
    Li = np.empty(nnz, np.int64)
    Lx = np.empty(nnz, np.float64)
    nxt = colptr[:n].copy()
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
            for p in range(colptr[i] + 1, nxt[i]):
                x[Li[p]] -= Lx[p] * lki
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


@njit(cache=True)
def chol_solve(n, colptr, Li, Lx, b):
    x = b.astype(np.float64)
    for j in range(n):
        xj = x[j] / Lx[colptr[j]]
        x[j] = xj
        for p in range(colptr[j] + 1, colptr[j + 1]):
            x[Li[p]] -= Lx[p] * xj
    for j in range(n - 1, -1, -1):
        s = x[j]
        for p in range(colptr[j] + 1, colptr[j + 1]):
            s -= Lx[p] * x[Li[p]]
        x[j] = s / Lx[colptr[j]]
    return x


# ---------------------------------------------------------------------------
# LU
# ---------------------------------------------------------------------------


@njit(cache=True)
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


@njit(cache=True)
def _splsolve(Lp, Li, Lx, Ap, Ai, Ax, col, xi, pstack, x, pinv, marked, n):
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
        for p in range(Lp[J] + 1, Lp[J + 1]):
            x[Li[p]] -= Lx[p] * x[j]
    for p in range(top, n):
        marked[xi[p]] = False
    return top


@njit(cache=True)
def _grow_i(arr, need):
    if need <= arr.shape[0]:
        return arr
    cap = 2 * arr.shape[0]
    if cap < need:
        cap = need
    out = np.empty(cap, np.int64)
    out[: arr.shape[0]] = arr
    return out


@njit(cache=True)
def _grow_f(arr, need):
    if need <= arr.shape[0]:
        return arr
    cap = 2 * arr.shape[0]
    if cap < need:
        cap = need
    out = np.empty(cap, np.float64)
    out[: arr.shape[0]] = arr
    return out


@njit(cache=True)
def lu_factor(n, Ap, Ai, Ax, abs_pivot_tol):
    cap = 4 * Ax.shape[0] + n
    if cap < 16:
        cap = 16
    Lp = np.zeros(n + 1, np.int64)
    Up = np.zeros(n + 1, np.int64)
    Li = np.empty(cap, np.int64)
    Lx = np.empty(cap, np.float64)
    Ui = np.empty(cap, np.int64)
    Ux = np.empty(cap, np.float64)
    pinv = np.full(n, -1, np.int64)
    marked = np.zeros(n, np.bool_)
    x = np.zeros(n)
    xi = np.empty(n, np.int64)
    pstack = np.empty(n, np.int64)
    lnz = 0
    unz = 0
    for k in range(n):
        Lp[k] = lnz
        Up[k] = unz
        Li = _grow_i(Li, lnz + n + 1)
        Lx = _grow_f(Lx, lnz + n + 1)
        Ui = _grow_i(Ui, unz + n + 1)
        Ux = _grow_f(Ux, unz + n + 1)
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
            return Lp, Li[:lnz], Lx[:lnz], Up, Ui[:unz], Ux[:unz], pinv, k
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
    return Lp, Li[:lnz].copy(), Lx[:lnz].copy(), Up, Ui[:unz].copy(), Ux[:unz].copy(), pinv, -1


@njit(cache=True)
def lu_solve_factored(n, Lp, Li, Lx, Up, Ui, Ux, pinv, b):
    x = np.empty(n)
    for i in range(n):
        x[pinv[i]] = b[i]
    for j in range(n):
        xj = x[j]
        if xj != 0.0:
            for p in range(Lp[j] + 1, Lp[j + 1]):
                x[Li[p]] -= Lx[p] * xj
    for j in range(n - 1, -1, -1):
        x[j] /= Ux[Up[j + 1] - 1]
        xj = x[j]
        if xj != 0.0:
            for p in range(Up[j], Up[j + 1] - 1):
                x[Ui[p]] -= Ux[p] * xj
    return x
