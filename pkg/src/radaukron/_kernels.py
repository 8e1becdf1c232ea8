"""Hot numerical loops with twin implementations.

Each kernel exists as a numba ``@njit`` version (``*_numba``) and a
vectorized numpy version (``*_numpy``); the public dispatchers pick one via
:func:`radaukron.backend.use_numba`.  Both produce identical output ordering
so results can be compared bit-for-bit-ish in tests and benchmarks.

Kernels:

* ``q1_triplets`` -- COO triplets for bilinear-element mass/stiffness
  assembly on a uniform square grid (values for unit spacing; the mass
  entries are scaled by h^2 by the caller).
* ``branch_values_batch`` -- for a batch of spectral parameters mu, the
  q-1 deflated roots of the characteristic polynomial of the reduced
  coupling block R(mu) = (I + mu*Linv)^{-1} Uhat.
"""

import numpy as np

from . import backend

# Element matrices for bilinear shape functions on a square cell, local node
# order (0,0), (1,0), (0,1), (1,1).  Stiffness is spacing-independent; the
# mass block must be multiplied by h^2.
KLOC = np.array([
    [ 4.0, -1.0, -1.0, -2.0],
    [-1.0,  4.0, -2.0, -1.0],
    [-1.0, -2.0,  4.0, -1.0],
    [-2.0, -1.0, -1.0,  4.0],
]) / 6.0
MLOC = np.array([
    [4.0, 2.0, 2.0, 1.0],
    [2.0, 4.0, 1.0, 2.0],
    [2.0, 1.0, 4.0, 2.0],
    [1.0, 2.0, 2.0, 4.0],
]) / 36.0

_OMEGA = complex(-0.5, 0.5 * np.sqrt(3.0))


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def q1_triplets_numpy(n_side):
    nc = n_side - 1
    cy, cx = np.meshgrid(np.arange(nc), np.arange(nc), indexing="ij")
    base = (cy * n_side + cx).ravel()
    offs = np.array([0, 1, n_side, n_side + 1], dtype=np.int64)
    nodes = base[:, None] + offs[None, :]                 # (ncells, 4)
    rows = np.repeat(nodes, 4, axis=1).ravel()
    cols = np.tile(nodes, (1, 4)).ravel()
    kvals = np.tile(KLOC.ravel(), nodes.shape[0])
    mvals = np.tile(MLOC.ravel(), nodes.shape[0])
    return rows, cols, kvals, mvals


def _reduced_blocks_numpy(mu, Linv, Uhat):
    """R(mu) = (I + mu*Linv)^{-1} Uhat by forward substitution, batched."""
    m = mu.shape[0]
    q = Linv.shape[0]
    B = np.eye(q)[None, :, :] + mu[:, None, None] * Linv[None, :, :]
    R = np.empty((m, q, q))
    for i in range(q):
        acc = Uhat[None, i, :].repeat(m, axis=0)
        if i:
            acc = acc - np.einsum("mj,mjk->mk", B[:, i, :i], R[:, :i, :])
        R[:, i, :] = acc / B[:, i, i, None]
    return R


def _char_coeffs_numpy(R):
    """Faddeev-LeVerrier: char(l) = l^q + c0 l^{q-1} + ... + c_{q-1}."""
    m, q, _ = R.shape
    coeffs = np.empty((m, q))
    eye = np.eye(q)
    Mk = R.copy()
    c = -np.einsum("mii->m", Mk)
    coeffs[:, 0] = c
    for k in range(2, q + 1):
        Mk = R @ (Mk + c[:, None, None] * eye)
        c = -np.einsum("mii->m", Mk) / k
        coeffs[:, k - 1] = c
    return coeffs


def _quadratic_roots_numpy(b, c):
    disc = b * b - 4.0 * c
    out = np.empty((b.shape[0], 2), dtype=np.complex128)
    neg = disc < 0.0
    s = np.sqrt(np.abs(disc))
    # complex pair
    out[neg, 0] = -0.5 * b[neg] + 0.5j * s[neg]
    out[neg, 1] = -0.5 * b[neg] - 0.5j * s[neg]
    # real pair, cancellation-safe via Vieta
    pos = ~neg
    t = -0.5 * (b[pos] + np.where(b[pos] >= 0.0, s[pos], -s[pos]))
    r2 = np.divide(c[pos], t, out=np.zeros_like(t), where=t != 0.0)
    out[pos, 0] = t
    out[pos, 1] = r2
    return out


def _cubic_roots_numpy(a, b, c):
    p = b - a * a / 3.0
    qq = 2.0 * a**3 / 27.0 - a * b / 3.0 + c
    s = np.sqrt((0.25 * qq * qq + p**3 / 27.0).astype(np.complex128))
    u3 = np.where(np.abs(-0.5 * qq + s) >= np.abs(-0.5 * qq - s),
                  -0.5 * qq + s, -0.5 * qq - s)
    u = u3 ** (1.0 / 3.0)
    roots = np.empty((a.shape[0], 3), dtype=np.complex128)
    for k in range(3):
        uk = u * _OMEGA**k
        tk = np.where(uk != 0.0, uk - p / np.where(uk != 0.0, 3.0 * uk, 1.0), 0.0)
        roots[:, k] = tk - a / 3.0
    # two Newton steps against the monic cubic tighten Cardano's rounding
    for _ in range(2):
        lam = roots
        f = ((lam + a[:, None]) * lam + b[:, None]) * lam + c[:, None]
        fp = (3.0 * lam + 2.0 * a[:, None]) * lam + b[:, None]
        roots = lam - np.where(fp != 0.0, f / np.where(fp != 0.0, fp, 1.0), 0.0)
    return roots


def _companion_roots_numpy(coeffs):
    m, d = coeffs.shape
    comp = np.zeros((m, d, d), dtype=np.complex128)
    comp[:, 0, :] = -coeffs
    idx = np.arange(1, d)
    comp[:, idx, idx - 1] = 1.0
    return np.linalg.eigvals(comp)


def branch_values_numpy(mu, Linv, Uhat):
    mu = np.ascontiguousarray(mu, dtype=np.float64)
    q = Linv.shape[0]
    R = _reduced_blocks_numpy(mu, Linv, Uhat)
    coeffs = _char_coeffs_numpy(R)
    d = q - 1  # the trivial root l=0 is deflated by dropping the last coefficient
    if d == 1:
        return (-coeffs[:, :1]).astype(np.complex128)
    if d == 2:
        return _quadratic_roots_numpy(coeffs[:, 0], coeffs[:, 1])
    if d == 3:
        return _cubic_roots_numpy(coeffs[:, 0], coeffs[:, 1], coeffs[:, 2])
    return _companion_roots_numpy(coeffs[:, :d])


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if backend.HAVE_NUMBA:
    from numba import njit

    @njit(cache=True)
    def _q1_triplets_jit(n_side, kloc, mloc):
        nc = n_side - 1
        nnz = 16 * nc * nc
        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        kvals = np.empty(nnz, dtype=np.float64)
        mvals = np.empty(nnz, dtype=np.float64)
        pos = 0
        for cy in range(nc):
            for cx in range(nc):
                g = cy * n_side + cx
                n0 = g
                n1 = g + 1
                n2 = g + n_side
                n3 = g + n_side + 1
                local = (n0, n1, n2, n3)
                for a in range(4):
                    for b in range(4):
                        rows[pos] = local[a]
                        cols[pos] = local[b]
                        kvals[pos] = kloc[a, b]
                        mvals[pos] = mloc[a, b]
                        pos += 1
        return rows, cols, kvals, mvals

    @njit(cache=True)
    def _branch_values_jit(mu, Linv, Uhat):
        m = mu.shape[0]
        q = Linv.shape[0]
        d = q - 1
        out = np.empty((m, d), dtype=np.complex128)
        omega = _OMEGA
        for s in range(m):
            # forward substitution for R = (I + mu Linv)^{-1} Uhat
            B = mu[s] * Linv
            for i in range(q):
                B[i, i] += 1.0
            R = np.empty((q, q))
            for i in range(q):
                for k in range(q):
                    acc = Uhat[i, k]
                    for j in range(i):
                        acc -= B[i, j] * R[j, k]
                    R[i, k] = acc / B[i, i]
            # Faddeev-LeVerrier coefficients
            coeffs = np.empty(q)
            Mk = R.copy()
            tr = 0.0
            for i in range(q):
                tr += Mk[i, i]
            c = -tr
            coeffs[0] = c
            for k in range(2, q + 1):
                for i in range(q):
                    Mk[i, i] += c
                Mk = R @ Mk
                tr = 0.0
                for i in range(q):
                    tr += Mk[i, i]
                c = -tr / k
                coeffs[k - 1] = c
            # roots of the deflated monic polynomial of degree d
            if d == 1:
                out[s, 0] = -coeffs[0]
            elif d == 2:
                b = coeffs[0]
                cc = coeffs[1]
                disc = b * b - 4.0 * cc
                if disc < 0.0:
                    sq = np.sqrt(-disc)
                    out[s, 0] = complex(-0.5 * b, 0.5 * sq)
                    out[s, 1] = complex(-0.5 * b, -0.5 * sq)
                else:
                    sq = np.sqrt(disc)
                    if b >= 0.0:
                        t = -0.5 * (b + sq)
                    else:
                        t = -0.5 * (b - sq)
                    out[s, 0] = t
                    out[s, 1] = cc / t if t != 0.0 else 0.0
            elif d == 3:
                a = coeffs[0]
                b = coeffs[1]
                cc = coeffs[2]
                p = b - a * a / 3.0
                qq = 2.0 * a**3 / 27.0 - a * b / 3.0 + cc
                sq = np.sqrt(complex(0.25 * qq * qq + p**3 / 27.0, 0.0))
                u3a = -0.5 * qq + sq
                u3b = -0.5 * qq - sq
                u3 = u3a if abs(u3a) >= abs(u3b) else u3b
                u = u3 ** (1.0 / 3.0)
                for k in range(3):
                    uk = u * omega**k
                    if uk != 0.0:
                        tk = uk - p / (3.0 * uk)
                    else:
                        tk = 0.0 + 0.0j
                    lam = tk - a / 3.0
                    for _ in range(2):
                        f = ((lam + a) * lam + b) * lam + cc
                        fp = (3.0 * lam + 2.0 * a) * lam + b
                        if fp != 0.0:
                            lam = lam - f / fp
                    out[s, k] = lam
            else:
                comp = np.zeros((d, d), dtype=np.complex128)
                for k in range(d):
                    comp[0, k] = -coeffs[k]
                for k in range(1, d):
                    comp[k, k - 1] = 1.0
                out[s, :] = np.linalg.eigvals(comp)
        return out

    def q1_triplets_numba(n_side):
        return _q1_triplets_jit(n_side, KLOC, MLOC)

    def branch_values_numba(mu, Linv, Uhat):
        mu = np.ascontiguousarray(mu, dtype=np.float64)
        return _branch_values_jit(mu, np.ascontiguousarray(Linv),
                                  np.ascontiguousarray(Uhat))
else:  # pragma: no cover
    def q1_triplets_numba(n_side):
        raise RuntimeError("numba backend requested but numba is unavailable")

    def branch_values_numba(mu, Linv, Uhat):
        raise RuntimeError("numba backend requested but numba is unavailable")


# ---------------------------------------------------------------------------
# dispatchers
# ---------------------------------------------------------------------------

def q1_triplets(n_side):
    """COO triplets (rows, cols, kvals, mvals) for all cells of the grid."""
    if backend.use_numba():
        return q1_triplets_numba(n_side)
    return q1_triplets_numpy(n_side)


def branch_values_batch(mu, Linv, Uhat):
    """Deflated eigenvalue branches of R(mu) for an array of mu values.

    Returns a complex array of shape ``(len(mu), q-1)``.
    """
    if backend.use_numba():
        return branch_values_numba(mu, Linv, Uhat)
    return branch_values_numpy(mu, Linv, Uhat)
