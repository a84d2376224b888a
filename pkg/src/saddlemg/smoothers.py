"""Pointwise and patch smoothers.

Damped Jacobi is the smoother the two-grid analysis covers; it runs on
the transformed system where both diagonal blocks are definite.  The
Vanka smoother is the comparison baseline on the untransformed saddle
system: one local saddle solve per pressure unknown, multiplicative,
in lexicographic order with damping 1.
"""

from __future__ import annotations

import time
from typing import List, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numba import njit
from numba.typed import List as TypedList

from .multigrid import SolveResult, build_prolongations
from .structured import galerkin_triple
from .system import StokesSystem


def jacobi_apply(matrix: sp.spmatrix, omega: float, b: np.ndarray,
                 x: np.ndarray, sweeps: int = 1) -> np.ndarray:
    """Damped Jacobi: x <- x + omega * D^-1 (b - M x), `sweeps` times."""
    diag = np.asarray(matrix.diagonal(), dtype=float)
    if np.any(diag == 0.0):
        raise ValueError("zero diagonal entry")
    y = np.array(x, dtype=float, copy=True)
    for _ in range(sweeps):
        y += omega * (b - matrix @ y) / diag
    return y


@njit(cache=True)
def _patch_fingerprints(indptr, indices, data, pidx, pptr):
    """Cheap content hash of every patch's local matrix.

    Patches whose local matrices coincide get equal fingerprints, so the
    dense factorization work collapses to one solve per distinct patch
    shape (the structured grid repeats interior patches verbatim).
    """
    npatch = pptr.size - 1
    out = np.empty(npatch)
    for jp in range(npatch):
        s = pptr[jp]
        k = pptr[jp + 1] - s
        acc = float(k)
        for a in range(k):
            row = pidx[s + a]
            for pos in range(indptr[row], indptr[row + 1]):
                col = indices[pos]
                for c in range(k):
                    if pidx[s + c] == col:
                        acc += data[pos] * np.sin(0.731 * (a * 131 + c * 17 + 1))
                        break
        out[jp] = acc
    return out


@njit(cache=True)
def _vanka_sweep(cindptr, cindices, cdata, x, r, pidx, pptr, pcls, invs,
                 kmax, damping):
    rloc = np.empty(kmax)
    dloc = np.empty(kmax)
    for jp in range(pptr.size - 1):
        s = pptr[jp]
        k = pptr[jp + 1] - s
        inv = invs[pcls[jp]]
        for a in range(k):
            rloc[a] = r[pidx[s + a]]
        for a in range(k):
            acc = 0.0
            for c in range(k):
                acc += inv[a, c] * rloc[c]
            dloc[a] = damping * acc
        for a in range(k):
            d = dloc[a]
            if d == 0.0:
                continue
            col = pidx[s + a]
            x[col] += d
            for pos in range(cindptr[col], cindptr[col + 1]):
                r[cindices[pos]] -= cdata[pos] * d


class VankaSmoother:
    """Multiplicative patch smoother on a saddle matrix [[A, B^T], [B, -C]].

    Patch j holds every velocity unknown with a nonzero coefficient in
    pressure row j, plus that pressure unknown.  Each visit solves the
    local saddle system on the current residual and updates in place.
    """

    def __init__(self, matrix: sp.spmatrix, velocity_size: int,
                 damping: float = 1.0):
        csr = matrix.tocsr()
        self.matrix = csr
        self.damping = damping
        self.csc = matrix.tocsc()
        nall = csr.shape[0]
        npatch = nall - velocity_size

        idx_parts = []
        ptr = np.zeros(npatch + 1, dtype=np.int64)
        for j in range(npatch):
            row = velocity_size + j
            cols = csr.indices[csr.indptr[row]:csr.indptr[row + 1]]
            vel = cols[cols < velocity_size].astype(np.int64)
            dofs = np.concatenate([vel, [row]])
            idx_parts.append(dofs)
            ptr[j + 1] = ptr[j] + dofs.size
        self.pidx = np.concatenate(idx_parts)
        self.pptr = ptr
        self.kmax = int(np.max(np.diff(ptr)))

        prints = _patch_fingerprints(csr.indptr, csr.indices, csr.data,
                                     self.pidx, self.pptr)
        keys = np.round(prints, 9)
        uniq, cls = np.unique(keys, return_inverse=True)
        self.pcls = cls.astype(np.int64)
        invs = TypedList()
        for g in range(uniq.size):
            jp = int(np.argmax(self.pcls == g))
            dofs = self.pidx[self.pptr[jp]:self.pptr[jp + 1]]
            local = csr[np.ix_(dofs, dofs)].toarray()
            invs.append(np.ascontiguousarray(np.linalg.inv(local)))
        self.invs = invs

    def apply(self, b: np.ndarray, x: np.ndarray, sweeps: int = 1) -> np.ndarray:
        y = np.array(x, dtype=float, copy=True)
        r = b - self.matrix @ y
        for _ in range(sweeps):
            _vanka_sweep(self.csc.indptr, self.csc.indices, self.csc.data,
                         y, r, self.pidx, self.pptr, self.pcls, self.invs,
                         self.kmax, self.damping)
        return y


def vanka_apply(system: StokesSystem, b: np.ndarray, x: np.ndarray,
                sweeps: int = 1) -> np.ndarray:
    """Vanka sweeps on a freshly assembled system matrix."""
    sm = VankaSmoother(system.full_sparse(), system.velocity_size)
    return sm.apply(b, x, sweeps)


class VankaHierarchy:
    """Level stack on the untransformed saddle system.

    The grid transfer is the block-diagonal velocity/pressure pair also
    used by the transformed method.  Coarse operators come either from
    the variational triple product ("galerkin") or from reassembling
    the blocks at each coarser size ("rediscretize").
    """

    def __init__(self, system: StokesSystem, min_coarse: int = 9,
                 max_levels: Optional[int] = None,
                 coarsening: str = "galerkin", damping: float = 1.0):
        if coarsening not in ("galerkin", "rediscretize"):
            raise ValueError(f"unknown coarsening {coarsening!r}")
        self.system = system
        mats = [system.full_sparse()]
        vsizes = [system.velocity_size]
        sizes_n = [system.n]
        prolongs: List[sp.csr_matrix] = []
        n = system.n
        while n > min_coarse and (max_levels is None or
                                  len(mats) < max_levels):
            p_vel, p_c, k = build_prolongations(n)
            p_blk = sp.block_diag((p_vel, p_c), format="csr")
            prolongs.append(p_blk)
            level = len(mats)
            if coarsening == "galerkin":
                mats.append((p_blk.T @ mats[-1] @ p_blk).tocsr())
                vsizes.append(p_vel.shape[1])
            else:
                # fixed-entry blocks at every size, so the divergence
                # coupling must double per level to stay consistent
                # with the fine-grid scale convention
                cs = StokesSystem(k)
                w = 2.0 ** level
                mats.append(sp.bmat([[cs.a, w * cs.bt], [w * cs.b, None]],
                                    format="csr"))
                vsizes.append(cs.velocity_size)
            n = k
            sizes_n.append(n)
        self.mats = mats
        self.vsizes = vsizes
        self.sizes_n = sizes_n
        self.prolongs = prolongs
        self.smoothers = [VankaSmoother(m, v, damping)
                          for m, v in zip(mats[:-1], vsizes[:-1])]
        self.coarse_lu = spla.splu(mats[-1].tocsc())
        self.depth = len(mats)

    def cycle(self, b: np.ndarray, x: np.ndarray, depth: int,
              pre: int, post: int, gamma: int = 1) -> np.ndarray:
        return self._cycle(0, b, x, depth, pre, post, gamma)

    def _cycle(self, ell: int, b, x, depth, pre, post, gamma):
        if ell == depth - 1 or ell == self.depth - 1:
            return self.coarse_solve(ell, b)
        sm = self.smoothers[ell]
        if pre > 0:
            x = sm.apply(b, x, pre)
        r = b - self.mats[ell] @ x
        p = self.prolongs[ell]
        bc = p.T @ r
        ec = np.zeros(p.shape[1])
        for _ in range(gamma):
            ec = self._cycle(ell + 1, bc, ec, depth, pre, post, gamma)
        x = x + p @ ec
        if post > 0:
            x = sm.apply(b, x, post)
        return x

    def coarse_solve(self, ell: int, b: np.ndarray) -> np.ndarray:
        if ell == self.depth - 1:
            return self.coarse_lu.solve(b)
        return spla.splu(self.mats[ell].tocsc()).solve(b)


def vanka_solve(hierarchy: VankaHierarchy, b: np.ndarray,
                cycle: str = "v", pre: int = 2, post: int = 2,
                tol: float = 1e-6, max_iter: int = 200,
                x0: Optional[np.ndarray] = None) -> SolveResult:
    """Iterate Vanka-smoothed cycles on the untransformed system."""
    if cycle not in ("tgm", "v", "w"):
        raise ValueError(f"unknown cycle {cycle!r}")
    depth = 2 if cycle == "tgm" else hierarchy.depth
    gamma = 2 if cycle == "w" else 1
    m = hierarchy.mats[0]
    norm_b = np.linalg.norm(b)
    if norm_b == 0.0:
        return SolveResult(np.zeros(m.shape[0]), 0, True, 0.0, [], [], 0.0, [])
    t_start = time.perf_counter()
    x = np.zeros(m.shape[0]) if x0 is None else np.array(x0, dtype=float)
    history: List[float] = []
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        x = hierarchy.cycle(b, x, depth, pre, post, gamma)
        rel = np.linalg.norm(b - m @ x) / norm_b
        history.append(rel)
        if rel < tol:
            converged = True
            break
    seconds = time.perf_counter() - t_start
    return SolveResult(x, it, converged, history[-1] if history else 0.0,
                       history, history, seconds, [])
