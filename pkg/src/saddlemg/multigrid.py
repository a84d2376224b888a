"""Multigrid cycles for the structured saddle-point system.

Each level stores the saddle blocks (A, B, C) of

    [ A   B^T ]
    [ B   -C  ].

A triangular congruence built from the velocity diagonal D and a scaling
alpha turns the level matrix into one with a positive pressure block,

    A_hat = [ A        M12     ]      M12 = (I - alpha A D^{-1}) B^T,
            [ -M12^T   C_hat   ]      C_hat = C + B (2 alpha D^{-1}
                                              - alpha^2 D^{-1} A D^{-1}) B^T,

on which damped Jacobi smoothing is effective.  The relaxation weight of
the pressure rows is not a free parameter: each level fixes it at the
inverse of the diagonally scaled sup of its transformed pressure block
(the same self-calibration rule that produces alpha), because pushing the
pressure weight with the velocity one past roughly 3/5 re-excites error
components at the mirror frequencies that the coarse space cannot see.
The user-facing weights steer the velocity rows only.  Coarsening uses a
three-factor Galerkin product that lands back in saddle form, so the same
transformation is applied recursively:

    A'  = P_v^T A P_v,
    B'  = P_p^T B (I - alpha D^{-1} A) P_v,
    C'  = P_p^T C_hat P_p,

with P_v the velocity interpolation (one copy per direction) and P_p the
pressure interpolation, both of the form T_n(symbol) times a grid cut.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import stokes_symbols as ss
from .structured import CuttingMatrix, galerkin_triple, toeplitz
from .system import StokesSystem

POWER_ITERATION_STEPS = 20
DEFAULT_MIN_COARSE = 3
DEFAULT_OMEGA_PRE = 0.6
DEFAULT_OMEGA_POST = 0.8


def estimate_scaled_lambda_max(a: sp.spmatrix, d_inv: np.ndarray,
                               steps: int = POWER_ITERATION_STEPS) -> float:
    """Largest eigenvalue of D^{-1} A, D = diag(A), by power iteration.

    Works on the symmetrized form D^{-1/2} A D^{-1/2} and starts from the
    all-ones vector so repeated runs build identical hierarchies.
    """
    root = np.sqrt(d_inv)
    v = np.ones(a.shape[0])
    v /= np.linalg.norm(v)
    lam = 1.0
    for _ in range(steps):
        w = root * (a @ (root * v))
        lam = float(v @ w)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
    return lam


class Level:
    """One grid level: saddle blocks plus the transformed pieces."""

    def __init__(self, n: int, a: sp.spmatrix, b: sp.spmatrix,
                 c: sp.spmatrix, alpha: Optional[float] = None):
        self.n = int(n)
        self.a = a.tocsr()
        self.b = b.tocsr()
        self.bt = self.b.T.tocsr()
        self.c = c.tocsr()
        self.velocity_size = self.a.shape[0]
        self.pressure_size = self.b.shape[0]
        self.size = self.velocity_size + self.pressure_size

        diag = self.a.diagonal()
        if np.any(diag <= 0.0):
            raise ValueError("velocity diagonal must be positive")
        self.d_inv = 1.0 / diag
        if alpha is None:
            # half the admissible scaling, from the level's own blocks
            alpha = 1.0 / estimate_scaled_lambda_max(self.a, self.d_inv)
        self.alpha = float(alpha)

        dinv = sp.diags(self.d_inv)
        self.m12 = (self.bt - self.alpha * (self.a @ dinv @ self.bt)).tocsr()
        corr = 2.0 * self.alpha * dinv \
            - (self.alpha ** 2) * (dinv @ self.a @ dinv)
        self.c_trans = (self.c + self.b @ corr @ self.bt).tocsr()
        self.a_hat = sp.bmat([[self.a, self.m12],
                              [-self.m12.T, self.c_trans]], format="csr")
        self.diag_hat = np.concatenate([diag, self.c_trans.diagonal()])
        if np.any(self.diag_hat <= 0.0):
            raise ValueError("transformed diagonal must be positive")
        p_diag_inv = 1.0 / self.c_trans.diagonal()
        self.omega_pressure = 1.0 / estimate_scaled_lambda_max(
            self.c_trans, p_diag_inv)

        # prolongations from the next coarser level, set by the hierarchy
        self.p_vel: Optional[sp.csr_matrix] = None
        self.p_c: Optional[sp.csr_matrix] = None
        self._lu = None

    def saddle_matrix(self) -> sp.csr_matrix:
        return sp.bmat([[self.a, self.bt], [self.b, -self.c]], format="csr")

    # left factor: [u, p] -> [u, alpha B D^{-1} u - p]; an involution
    def apply_l(self, x: np.ndarray) -> np.ndarray:
        u = x[:self.velocity_size]
        p = x[self.velocity_size:]
        return np.concatenate([u, self.alpha * (self.b @ (self.d_inv * u)) - p])

    # right factor: [u, p] -> [u - alpha D^{-1} B^T p, p]
    def apply_u(self, x: np.ndarray) -> np.ndarray:
        u = x[:self.velocity_size]
        p = x[self.velocity_size:]
        return np.concatenate([u - self.alpha * (self.d_inv * (self.bt @ p)), p])

    def apply_u_inv(self, x: np.ndarray) -> np.ndarray:
        u = x[:self.velocity_size]
        p = x[self.velocity_size:]
        return np.concatenate([u + self.alpha * (self.d_inv * (self.bt @ p)), p])

    def smooth(self, x: np.ndarray, b_hat: np.ndarray,
               omega: float) -> np.ndarray:
        """One damped Jacobi sweep on the transformed system.

        omega drives the velocity rows; the pressure rows use the level's
        self-calibrated weight.
        """
        r = b_hat - self.a_hat @ x
        r[:self.velocity_size] *= omega
        r[self.velocity_size:] *= self.omega_pressure
        return x + r / self.diag_hat

    def ensure_lu(self):
        if self._lu is None:
            self._lu = spla.splu(self.a_hat.tocsc())
        return self._lu


def build_prolongations(n: int):
    """Velocity and pressure prolongations from the coarsened grid.

    Returns (p_vel, p_c, k): p_vel covers both velocity directions.
    """
    cut = CuttingMatrix((n, n))
    k = cut.k[0]
    comp = (toeplitz(ss.interp_symbol_2d(), (n, n)).to_sparse()
            @ cut.as_sparse(4)).tocsr()
    p_vel = sp.block_diag((comp, comp), format="csr")
    p_c = (toeplitz(ss.pressure_interp_symbol(), (n, n)).to_sparse()
           @ cut.as_sparse()).tocsr()
    return p_vel, p_c, k


class Hierarchy:
    """Level stack built by the symmetrized three-factor coarsening."""

    def __init__(self, system: StokesSystem, alpha: Optional[float] = None,
                 min_coarse: int = DEFAULT_MIN_COARSE,
                 max_levels: Optional[int] = None):
        if alpha is None:
            alpha = ss.default_velocity_scaling()
        self.system = system
        zero_c = sp.csr_matrix((system.pressure_size, system.pressure_size))
        levels: List[Level] = [Level(system.n, system.a, system.b, zero_c,
                                     alpha)]
        while levels[-1].n > min_coarse and \
                (max_levels is None or len(levels) < max_levels):
            lv = levels[-1]
            p_vel, p_c, k = build_prolongations(lv.n)
            lv.p_vel, lv.p_c = p_vel, p_c
            a_c = galerkin_triple(p_vel.T, lv.a, p_vel)
            b_c = galerkin_triple(p_c.T, lv.m12.T, p_vel)
            c_c = galerkin_triple(p_c.T, lv.c_trans, p_c)
            levels.append(Level(k, a_c, b_c, c_c))
        self.levels = levels
        self._full: Optional[sp.csr_matrix] = None

    @property
    def depth(self) -> int:
        return len(self.levels)

    def full_matrix(self) -> sp.csr_matrix:
        if self._full is None:
            self._full = self.system.full_sparse()
        return self._full

    def describe(self) -> List[dict]:
        out = []
        for lv in self.levels:
            out.append({"n": lv.n, "unknowns": lv.size,
                        "alpha": lv.alpha,
                        "omega_pressure": lv.omega_pressure,
                        "nnz": int(lv.a_hat.nnz)})
        return out

    # ------------------------------------------------------------------
    def cycle(self, b_hat: np.ndarray, x: np.ndarray, depth: int,
              pre: int, post: int, omega_pre: float, omega_post: float,
              gamma: int) -> np.ndarray:
        """One cycle on the transformed system, recursing gamma times."""
        depth = min(depth, len(self.levels))
        if depth < 2:
            raise ValueError("need at least two levels")
        return self._cycle(0, depth, b_hat, x, pre, post,
                           omega_pre, omega_post, gamma)

    def _cycle(self, ell, depth, b_hat, x, pre, post, w_pre, w_post, gamma):
        lv = self.levels[ell]
        if ell == depth - 1:
            return lv.ensure_lu().solve(b_hat)
        for _ in range(pre):
            x = lv.smooth(x, b_hat, w_pre)
        r = b_hat - lv.a_hat @ x
        nxt = self.levels[ell + 1]
        r_u = lv.p_vel.T @ r[:lv.velocity_size]
        r_p = lv.p_c.T @ r[lv.velocity_size:]
        b_coarse = nxt.apply_l(np.concatenate([r_u, -r_p]))
        e = np.zeros(nxt.size)
        for _ in range(gamma):
            e = self._cycle(ell + 1, depth, b_coarse, e, pre, post,
                            w_pre, w_post, gamma)
        corr = nxt.apply_u(e)
        x = x + np.concatenate([lv.p_vel @ corr[:nxt.velocity_size],
                                lv.p_c @ corr[nxt.velocity_size:]])
        for _ in range(post):
            x = lv.smooth(x, b_hat, w_post)
        return x


CYCLE_KINDS = ("tgm", "v", "w")


@dataclass
class SolveResult:
    x: np.ndarray
    iterations: int
    converged: bool
    final_relres: float
    history: List[float] = field(default_factory=list)
    history_original: List[float] = field(default_factory=list)
    seconds: float = 0.0
    level_info: List[dict] = field(default_factory=list)


def solve(hierarchy: Hierarchy, b: np.ndarray, cycle: str = "tgm",
          pre: int = 2, post: int = 2,
          omega_pre: float = DEFAULT_OMEGA_PRE,
          omega_post: float = DEFAULT_OMEGA_POST,
          tol: float = 1e-6, max_iter: int = 500,
          x0: Optional[np.ndarray] = None) -> SolveResult:
    """Iterate cycles until the transformed residual drops below tol.

    The iteration runs on the transformed system; the returned x solves
    the original one.  Both relative residual histories are recorded.
    """
    if cycle not in CYCLE_KINDS:
        raise ValueError(f"unknown cycle {cycle!r}")
    depth = 2 if cycle == "tgm" else hierarchy.depth
    gamma = 2 if cycle == "w" else 1
    lv0 = hierarchy.levels[0]
    full = hierarchy.full_matrix()

    t_start = time.perf_counter()
    b_hat = lv0.apply_l(b)
    norm_hat = np.linalg.norm(b_hat)
    norm_orig = np.linalg.norm(b)
    if norm_hat == 0.0 or norm_orig == 0.0:
        return SolveResult(np.zeros(lv0.size), 0, True, 0.0, [], [], 0.0,
                           hierarchy.describe())

    y = np.zeros(lv0.size) if x0 is None else lv0.apply_u_inv(x0)
    history: List[float] = []
    history_orig: List[float] = []
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        y = hierarchy.cycle(b_hat, y, depth, pre, post,
                            omega_pre, omega_post, gamma)
        rel = np.linalg.norm(b_hat - lv0.a_hat @ y) / norm_hat
        x = lv0.apply_u(y)
        rel_orig = np.linalg.norm(b - full @ x) / norm_orig
        history.append(rel)
        history_orig.append(rel_orig)
        if rel < tol:
            converged = True
            break
    seconds = time.perf_counter() - t_start
    x = lv0.apply_u(y)
    return SolveResult(x, it, converged, history[-1], history,
                       history_orig, seconds, hierarchy.describe())


# ----------------------------------------------------------------------
# analysis helpers
# ----------------------------------------------------------------------

def coarse_transfer_matrices(hierarchy: Hierarchy, ell: int):
    """Sparse factors reproducing one coarsening step on the saddle form.

    Returns (r, mid, p) with

        [ A'   B'^T ]
        [ B'   -C'  ]  =  r  @  mid  @  p,

    mid the fine saddle matrix with its second block row negated.  The
    outer factors combine the triangular congruence with the block
    transfers, giving the coarse saddle matrix in one product.
    """
    lv = hierarchy.levels[ell]
    if lv.p_vel is None:
        raise ValueError("level has no coarser neighbor")
    dinv = sp.diags(lv.d_inv)
    r = sp.bmat([[lv.p_vel.T, None],
                 [-lv.alpha * (lv.p_c.T @ lv.b @ dinv), -lv.p_c.T]],
                format="csr")
    mid = sp.bmat([[lv.a, lv.bt], [-lv.b, lv.c]], format="csr")
    p = sp.bmat([[lv.p_vel, -lv.alpha * (dinv @ lv.bt @ lv.p_c)],
                 [None, lv.p_c]], format="csr")
    return r, mid, p


def iteration_matrix(hierarchy: Hierarchy, depth: int = 2,
                     pre: int = 0, post: int = 1,
                     omega_pre: float = DEFAULT_OMEGA_PRE,
                     omega_post: float = DEFAULT_OMEGA_POST,
                     gamma: int = 1, cap: int = 2500) -> np.ndarray:
    """Dense error-propagation matrix of one cycle, built column by column.

    The cycle map with zero right-hand side is linear in the iterate, so
    applying it to unit vectors yields exactly the matrix the implemented
    iteration realizes.
    """
    m = hierarchy.levels[0].size
    if m > cap:
        raise ValueError(f"iteration matrix of size {m} exceeds cap {cap}")
    zero = np.zeros(m)
    out = np.empty((m, m))
    for j in range(m):
        v = np.zeros(m)
        v[j] = 1.0
        out[:, j] = hierarchy.cycle(zero, v, depth, pre, post,
                                    omega_pre, omega_post, gamma)
    return out


def spectral_radius_power(mat, steps: int = 200, tol: float = 1e-10,
                          seed: int = 1234) -> float:
    """Spectral radius estimate by power iteration with a fixed seed."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(mat.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(steps):
        w = mat @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        new = norm
        v = w / norm
        if abs(new - lam) < tol * max(1.0, new):
            lam = new
            break
        lam = new
    return lam
