"""Dense primal-dual interior-point solver and certified lower bounds.

The moment SDP ``min c.y + c0  s.t.  G(y) >= 0, E y = f, lo <= y <= hi`` is
reduced to inequality form by eliminating the equalities,

    min c~.z + c0~   s.t.   G~(z) = G0 + sum_j z_j G_j  >= 0,

(box rows become a diagonal block).  Its dual is
``max -<G0, X>  s.t.  <G_j, X> = c~_j,  X >= 0``.  Any ``X >= 0`` yields the
lower bound ``c0~ - <G0, X> - sum_j |<G_j, X> - c~_j|``, using that every
free variable is a moment of a product of +-1 observables, so ``|z_j| <= 1``.
The residual term makes the bound safe for approximate solver output.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla

from .. import kernels
from .moments import SdpInstance

log = logging.getLogger(__name__)

CERT_EIG_TOL = 1e-8
OPTIMAL_GAP = 1e-6


@dataclass
class CooBlock:
    size: int
    const: np.ndarray
    ptr: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    var_ids: np.ndarray
    entry_var: np.ndarray

    def coef(self, j: int) -> np.ndarray:
        """Dense ``G_j`` restricted to this block."""
        out = np.zeros((self.size, self.size))
        hit = np.nonzero(self.var_ids == j)[0]
        if hit.size:
            sl = slice(self.ptr[hit[0]], self.ptr[hit[0] + 1])
            np.add.at(out, (self.rows[sl], self.cols[sl]), self.vals[sl])
        return out


@dataclass
class StandardForm:
    """Inequality-form data after eliminating equalities.  ``y = y0 + N z``."""

    blocks: list
    c: np.ndarray
    c0: float
    zbound: np.ndarray
    y0: np.ndarray
    N: np.ndarray
    names: list

    @property
    def n_vars(self) -> int:
        return self.c.size

    def apply(self, X: list) -> np.ndarray:
        """``<G_j, X>`` for every ``j``."""
        out = np.zeros(self.n_vars)
        for blk, x in zip(self.blocks, X):
            np.add.at(out, blk.entry_var, blk.vals * x[blk.rows, blk.cols])
        return out

    def adjoint(self, z: np.ndarray) -> list:
        """``sum_j z_j G_j`` per block."""
        out = []
        for blk in self.blocks:
            m = np.zeros((blk.size, blk.size))
            np.add.at(m, (blk.rows, blk.cols), blk.vals * z[blk.entry_var])
            out.append(m)
        return out

    def slack(self, z: np.ndarray) -> list:
        return [blk.const + g for blk, g in zip(self.blocks, self.adjoint(z))]


def _eliminate(inst: SdpInstance):
    m = inst.n_vars
    if not inst.equalities:
        return np.zeros(m), np.eye(m)
    E = np.zeros((len(inst.equalities), m))
    f = np.zeros(len(inst.equalities))
    for i, (row, rhs) in enumerate(inst.equalities):
        for k, c in row.items():
            E[i, k] += c
        f[i] = rhs
    pivots = []
    r = 0
    for i in range(E.shape[0]):
        col = int(np.argmax(np.abs(E[r])))
        if abs(E[r, col]) <= 1e-12:
            if abs(f[r]) > 1e-9:
                raise ValueError("inconsistent equality constraints")
            E = np.delete(E, r, axis=0)
            f = np.delete(f, r)
            continue
        piv = E[r, col]
        E[r] /= piv
        f[r] /= piv
        for other in range(E.shape[0]):
            if other != r and E[other, col] != 0.0:
                fac = E[other, col]
                E[other] -= fac * E[r]
                f[other] -= fac * f[r]
        pivots.append(col)
        r += 1
    E[np.abs(E) < 1e-15] = 0.0
    free = [k for k in range(m) if k not in set(pivots)]
    y0 = np.zeros(m)
    N = np.zeros((m, len(free)))
    for j, k in enumerate(free):
        N[k, j] = 1.0
    for i, p in enumerate(pivots):
        y0[p] = f[i]
        N[p] = -E[i, free]
    return y0, N


def _coo(name: str, size: int, const: np.ndarray, mats: dict) -> CooBlock:
    ptr = [0]
    rows, cols, vals, var_ids = [], [], [], []
    for j in sorted(mats):
        r, c = np.nonzero(mats[j])
        if r.size == 0:
            continue
        rows.append(r)
        cols.append(c)
        vals.append(mats[j][r, c])
        var_ids.append(j)
        ptr.append(ptr[-1] + r.size)
    cat = lambda parts, dt: np.concatenate(parts).astype(dt) if parts else np.zeros(0, dt)
    ptr_a = np.asarray(ptr, dtype=np.int64)
    var_a = np.asarray(var_ids, dtype=np.int64)
    entry_var = np.repeat(var_a, np.diff(ptr_a)) if var_ids else np.zeros(0, np.int64)
    return CooBlock(
        size,
        np.ascontiguousarray(const, dtype=float),
        ptr_a,
        cat(rows, np.int64),
        cat(cols, np.int64),
        cat(vals, float),
        var_a,
        entry_var.astype(np.int64),
    )


def to_standard_form(inst: SdpInstance) -> StandardForm:
    y0, N = _eliminate(inst)
    nz = N.shape[1]
    blocks, names = [], []
    for b in inst.blocks:
        const = b.const + sum((y0[k] * m for k, m in b.coefs.items()), np.zeros_like(b.const))
        mats: dict = {}
        for k, m in b.coefs.items():
            for j in np.nonzero(N[k])[0]:
                mats[int(j)] = mats.get(int(j), 0.0) + N[k, j] * m
        blocks.append(_coo(b.name, b.size, const, mats))
        names.append(b.name)
    if inst.boxes:
        size = 2 * len(inst.boxes)
        const = np.zeros((size, size))
        mats = {}
        for i, (k, lo, hi) in enumerate(inst.boxes):
            const[2 * i, 2 * i] = y0[k] - lo
            const[2 * i + 1, 2 * i + 1] = hi - y0[k]
            for j in np.nonzero(N[k])[0]:
                mm = mats.setdefault(int(j), np.zeros((size, size)))
                mm[2 * i, 2 * i] += N[k, j]
                mm[2 * i + 1, 2 * i + 1] -= N[k, j]
        blocks.append(_coo("box", size, const, mats))
        names.append("box")
    c = N.T @ inst.objective
    c0 = inst.objective_const + float(inst.objective @ y0)
    # each z_j is the moment of a word in +-1 observables, hence |z_j| <= 1
    zbound = np.ones(nz)
    return StandardForm(blocks, c, c0, zbound, y0, N, names)


# ---------------------------------------------------------------- IPM backend


def _schur(sf: StandardForm, X: list, Sinv: list) -> np.ndarray:
    M = np.zeros((sf.n_vars, sf.n_vars))
    for blk, x, si in zip(sf.blocks, X, Sinv):
        if blk.var_ids.size:
            kernels.schur_block(blk.ptr, blk.rows, blk.cols, blk.vals, blk.var_ids, x, si, M)
    return M


def _max_step(X: list, dX: list) -> float:
    alpha = math.inf
    for x, dx in zip(X, dX):
        try:
            L = np.linalg.cholesky(x)
        except np.linalg.LinAlgError:
            return 0.0
        W = sla.solve_triangular(L, sla.solve_triangular(L, dx, lower=True).T, lower=True)
        lam = np.linalg.eigvalsh((W + W.T) / 2).min()
        if lam < 0:
            alpha = min(alpha, -1.0 / lam)
    return alpha


def _inner(A: list, B: list) -> float:
    return float(sum(np.vdot(a, b) for a, b in zip(A, B)))


def solve_ipm(sf: StandardForm, max_iter: int = 120, tol: float = 1e-10, step: float = 0.95):
    """HKM predictor-corrector method on the dual pair.

    Works on ``S = G0 + sum z_j G_j`` (moment side) and ``X`` (certificate
    side) with ``<G_j, X> = c_j``.  Returns ``(X, z, info)`` where ``X`` is the
    iterate with the best certified bound: without a strictly feasible moment
    point the dual optimum is not attained and late iterates can drift.
    """
    # variables of the textbook form  max b.y  s.t.  C - sum y_j A_j = S
    b = -sf.c
    C = [blk.const for blk in sf.blocks]
    sizes = [blk.size for blk in sf.blocks]
    n_tot = sum(sizes)
    normC = math.sqrt(sum(float(np.sum(c * c)) for c in C))
    normb = float(np.linalg.norm(b))
    scale = max(10.0, math.sqrt(n_tot), normC)
    X = [scale * np.eye(n) for n in sizes]
    S = [scale * np.eye(n) for n in sizes]
    z = np.zeros(sf.n_vars)

    info = {"iterations": 0, "converged": False, "backend": f"ipm/{kernels.BACKEND}"}
    best = (-math.inf, X, z)
    for it in range(max_iter):
        info["iterations"] = it
        cert = certify(sf, X)["bound"]
        if cert > best[0]:
            best = (cert, X, z)
        elif cert < best[0] - 1e-3 and it > 10:
            info["failure"] = "certificate diverging"
            break
        # A_j = -G_j: A(X) = -<G, X>, A*(y) = -sum y G
        rp = b + sf.apply(X)
        Gz = sf.adjoint(z)
        Rd = [c + g - s for c, g, s in zip(C, Gz, S)]
        pobj = _inner(C, X)
        dobj = float(b @ z)
        mu = _inner(X, S) / n_tot
        relgap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        pinf = float(np.linalg.norm(rp)) / (1 + normb)
        dinf = math.sqrt(sum(float(np.sum(r * r)) for r in Rd)) / (1 + normC)
        info.update(relgap=relgap, pinf=pinf, dinf=dinf, pobj=pobj, dobj=dobj, mu=mu)
        log.debug("it %d pobj %.10g dobj %.10g gap %.2e pinf %.2e dinf %.2e", it, pobj, dobj, relgap, pinf, dinf)
        if relgap < tol and pinf < tol and dinf < tol:
            info["converged"] = True
            break
        try:
            Sinv = [sla.cho_solve(sla.cho_factor(s), np.eye(s.shape[0])) for s in S]
        except np.linalg.LinAlgError:
            info["failure"] = "slack lost definiteness"
            break
        M = _schur(sf, X, Sinv)
        try:
            fac = sla.cho_factor(M)
            solve = lambda h: sla.cho_solve(fac, h)
        except np.linalg.LinAlgError:
            solve = lambda h: np.linalg.lstsq(M, h, rcond=None)[0]

        def direction(Rc):
            # A(W) = -<G, W>
            W = [rc @ si - x - x @ rd @ si for rc, si, x, rd in zip(Rc, Sinv, X, Rd)]
            h = rp + sf.apply(W)
            dz = solve(h)
            dS = [rd + g for rd, g in zip(Rd, sf.adjoint(dz))]
            dX = [rc @ si - x - x @ ds @ si for rc, si, x, ds in zip(Rc, Sinv, X, dS)]
            dX = [(d + d.T) / 2 for d in dX]
            return dX, dz, dS

        zero = [np.zeros((n, n)) for n in sizes]
        dXa, dza, dSa = direction(zero)
        ap = min(1.0, _max_step(X, dXa))
        ad = min(1.0, _max_step(S, dSa))
        mu_aff = _inner([x + ap * d for x, d in zip(X, dXa)], [s + ad * d for s, d in zip(S, dSa)]) / n_tot
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
        Rc = [sigma * mu * np.eye(n) - da @ db for n, da, db in zip(sizes, dXa, dSa)]
        dX, dz, dS = direction(Rc)
        ap = min(1.0, step * _max_step(X, dX))
        ad = min(1.0, step * _max_step(S, dS))
        X = [x + ap * d for x, d in zip(X, dX)]
        X = [(x + x.T) / 2 for x in X]
        z = z + ad * dz
        S = [s + ad * d for s, d in zip(S, dS)]
        S = [(s + s.T) / 2 for s in S]
        if max(ap, ad) < 1e-8:
            info["failure"] = "step length collapsed"
            break
    if certify(sf, X)["bound"] < best[0]:
        X = best[1]
    return X, z, info


def solve_cvxpy(sf: StandardForm, solver: Optional[str] = None):
    """External backend through cvxpy; the dual of each PSD constraint is the certificate."""
    import cvxpy as cp

    z = cp.Variable(sf.n_vars)
    cons = []
    for blk in sf.blocks:
        n = blk.size
        stack = np.zeros((n * n, sf.n_vars))
        np.add.at(stack, (blk.rows * n + blk.cols, blk.entry_var), blk.vals)
        expr = cp.reshape(blk.const.ravel(order="F") + _fortran_rows(stack, n) @ z, (n, n), order="F")
        cons.append((expr + expr.T) / 2 >> 0)
    prob = cp.Problem(cp.Minimize(sf.c @ z + sf.c0), cons)
    prob.solve(solver=solver or ("CLARABEL" if "CLARABEL" in cp.installed_solvers() else "SCS"))
    X = [np.asarray(c.dual_value, dtype=float) for c in cons]
    X = [(x + x.T) / 2 for x in X]
    info = {"backend": f"cvxpy/{prob.solver_stats.solver_name}", "converged": prob.status == "optimal", "cvxpy_status": prob.status}
    zval = np.asarray(z.value, dtype=float) if z.value is not None else np.zeros(sf.n_vars)
    return X, zval, info


def _fortran_rows(stack: np.ndarray, n: int) -> np.ndarray:
    # reorder C-order (r*n+c) rows to Fortran order (c*n+r)
    idx = np.arange(n * n).reshape(n, n).T.ravel()
    return stack[idx]


BACKENDS: dict = {"ipm": solve_ipm, "cvxpy": solve_cvxpy}


def register_backend(name: str, fn: Callable):
    """Add a solver: ``fn(StandardForm, **opts) -> (X_blocks, z, info)``."""
    BACKENDS[name] = fn


# ---------------------------------------------------------------- certificates


@dataclass
class FidelityBound:
    """Certified lower bound on the swap fidelity.

    ``status`` is ``optimal``, ``near-optimal``, ``infeasible`` or
    ``numerical-failure``.  ``bound`` is always backed by a PSD dual matrix.
    """

    bound: float
    primal: float
    gap: float
    status: str
    diagnostics: dict = field(default_factory=dict)

    def row(self, epsilon: float) -> dict:
        return {"epsilon": epsilon, "bound": self.bound, "primal": self.primal, "gap": self.gap, "status": self.status}


def certify(sf: StandardForm, X: list) -> dict:
    """Safe lower bound from a candidate dual matrix ``X``."""
    min_eig = math.inf
    Xp = []
    for x in X:
        x = (x + x.T) / 2
        w, v = np.linalg.eigh(x)
        min_eig = min(min_eig, float(w.min()) / max(1.0, float(np.abs(w).max())))
        Xp.append((v * np.clip(w, 0.0, None)) @ v.T)
    resid = sf.apply(Xp) - sf.c
    weighted = np.abs(resid) * sf.zbound
    weighted[np.abs(resid) == 0.0] = 0.0
    correction = float(np.sum(weighted))
    bound = sf.c0 - _inner([b.const for b in sf.blocks], Xp) - correction
    return {
        "bound": bound,
        "dual_min_eig": min_eig,
        "dual_residual": float(np.linalg.norm(resid)),
        "correction": correction,
        "verified": min_eig >= -CERT_EIG_TOL and math.isfinite(bound),
    }


def solve_lower_bound(inst: SdpInstance, backend: str = "ipm", **opts) -> FidelityBound:
    """Solve ``inst`` and return a bound certified by an eigenvalue-checked dual matrix."""
    sf = to_standard_form(inst)
    try:
        X, z, info = BACKENDS[backend](sf, **opts)
    except KeyError:
        raise ValueError(f"unknown backend {backend!r}; have {sorted(BACKENDS)}") from None
    cert = certify(sf, X)
    primal = float(sf.c @ z + sf.c0)
    slack_min = min(float(np.linalg.eigvalsh(s).min()) for s in sf.slack(z))
    diag = dict(info)
    diag.update(cert)
    diag["primal_min_eig"] = slack_min
    diag["n_vars"] = sf.n_vars
    diag["blocks"] = [blk.size for blk in sf.blocks]
    bound = cert["bound"]
    gap = primal - bound
    if not cert["verified"]:
        status = "numerical-failure"
    elif gap <= OPTIMAL_GAP and slack_min >= -1e-7:
        status = "optimal"
    elif gap <= 1e-3:
        status = "near-optimal"
    elif info.get("cvxpy_status", "").startswith("infeasible"):
        status = "infeasible"
    else:
        status = "numerical-failure"
    return FidelityBound(bound, primal, gap, status, diag)
