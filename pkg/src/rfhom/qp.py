"""Dense primal active-set solver for small linearly constrained least squares.

Solves

    minimize    0.5 ||M x - d||^2
    subject to  A_eq x  = b_eq
                A_in x >= b_in

from a feasible starting point. Subproblems are solved on ``M`` directly
rather than on the normal matrix ``M^T M``, whose condition number is the
square of ``M``'s. Ties in the choice of constraint to add or
drop are broken by the lowest constraint index, so the iterate sequence (and
the answer) is a deterministic function of the inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class QPError(RuntimeError):
    pass


@dataclass
class QPResult:
    x: np.ndarray
    objective: float
    active: list[int]
    multipliers: np.ndarray
    iterations: int


def _null_space(a: np.ndarray, n: int, rtol: float = 1e-10) -> np.ndarray:
    if a.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(a)
    rank = int(np.sum(s > rtol * s[0])) if s.size else 0
    return vt[rank:].T


def _is_independent(rows: np.ndarray, new: np.ndarray, rtol: float = 1e-10) -> bool:
    if rows.shape[0] == 0:
        return bool(np.linalg.norm(new) > 0)
    stacked = np.vstack([rows, new])
    s = np.linalg.svd(stacked, compute_uv=False)
    return bool(s[-1] > rtol * s[0]) and stacked.shape[0] <= stacked.shape[1]


def solve_lsq(M, d, A_eq, b_eq, A_in, b_in, x0, *, tol=1e-12, max_iter=1000) -> QPResult:
    M = np.asarray(M, dtype=float)
    d = np.asarray(d, dtype=float)
    n = M.shape[1]
    A_eq = np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.asarray(b_eq, dtype=float).reshape(-1)
    A_in = np.asarray(A_in, dtype=float).reshape(-1, n)
    b_in = np.asarray(b_in, dtype=float).reshape(-1)
    x = np.array(x0, dtype=float)

    feas_tol = 1e-9 * (1.0 + np.abs(b_in).max(initial=0.0))
    slack = A_in @ x - b_in
    if np.any(slack < -feas_tol) or np.any(np.abs(A_eq @ x - b_eq) > 1e-9):
        raise QPError("starting point is infeasible")

    working: list[int] = []
    for i in np.flatnonzero(np.abs(slack) <= feas_tol):
        rows = np.vstack([A_eq, A_in[working]])
        if _is_independent(rows, A_in[i]):
            working.append(int(i))

    for it in range(1, max_iter + 1):
        r = M @ x - d
        grad = M.T @ r
        aw = np.vstack([A_eq, A_in[working]])
        z = _null_space(aw, n)
        if z.shape[1]:
            p = z @ np.linalg.lstsq(M @ z, -r, rcond=None)[0]
        else:
            p = np.zeros(n)

        if np.linalg.norm(p) <= tol * (1.0 + np.linalg.norm(x)):
            lam = np.linalg.lstsq(aw.T, grad, rcond=None)[0]
            lam_in = lam[A_eq.shape[0]:]
            scale = 1.0 + np.linalg.norm(grad)
            if not working or lam_in.min() >= -1e-10 * scale:
                mult = np.zeros(A_in.shape[0])
                mult[working] = lam_in
                obj = float(0.5 * r @ r)
                return QPResult(x, obj, sorted(working), mult, it)
            drop = int(np.argmin(lam_in))
            del working[drop]
            continue

        ap = A_in @ p
        step, block = 1.0, None
        pn = np.linalg.norm(p)
        for i in range(A_in.shape[0]):
            if i in working or ap[i] >= -1e-14 * pn:
                continue
            ratio = max(0.0, (b_in[i] - A_in[i] @ x) / ap[i])
            if ratio < step:
                step, block = ratio, i
        x = x + step * p
        if block is not None:
            working.append(block)

    raise QPError(f"active-set iteration limit ({max_iter}) reached")
