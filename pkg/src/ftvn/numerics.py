"""Small dense kernels: symmetric eigensolver, SVD, sorting, hull membership.

Everything here works on plain numpy arrays and is meant for desk-scale
problems (n up to a few dozen).
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ValidationError

MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray
    frame: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.frame * self.values) @ self.frame.T


@dataclass(frozen=True)
class SvdResult:
    values: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.values) @ self.right.T


@dataclass(frozen=True)
class HullVerdict:
    inside: bool
    distance: float
    weights: np.ndarray | None = None
    nearest: np.ndarray | None = None


def close(a: float, b: float, tol: float) -> bool:
    """Absolute-plus-relative comparison used throughout the package."""
    return abs(a - b) <= tol * (1.0 + max(abs(a), abs(b)))


def sort_desc(v) -> np.ndarray:
    """Decreasing rearrangement; ties keep their original index order."""
    v = np.asarray(v, dtype=float)
    return v[np.argsort(-v, kind="stable")]


def desc_order(v) -> np.ndarray:
    """Indices that sort ``v`` decreasingly, ties broken by index."""
    return np.argsort(-np.asarray(v, dtype=float), kind="stable")


def _as_square(matrix, what: str) -> np.ndarray:
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValidationError(f"{what} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{what} has non-finite entries")
    return a


@functools.lru_cache(maxsize=None)
def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Rounds of disjoint index pairs covering every pair once (circle method)."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < n and b < n]
        rounds.append((np.array([a for a, _ in pairs]), np.array([b for _, b in pairs])))
        players = [players[0], players[-1], *players[1:-1]]
    return rounds


def sym_eigen(matrix, tol: float = 1e-12) -> EigenResult:
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi sweeps.

    Each sweep visits every off-diagonal pair once in round-robin order;
    the rotations within a round touch disjoint index pairs, so they are
    applied together as one orthogonal matrix. Sweeps stop once the
    off-diagonal Frobenius mass drops below ``tol * ||A||_F``. Values come
    back in decreasing order with the matching eigenvectors as columns of
    ``frame``.
    """
    a = _as_square(matrix, "matrix")
    n = a.shape[0]
    scale = np.max(np.abs(a)) if a.size else 0.0
    if np.max(np.abs(a - a.T)) > 1e-12 * (1.0 + scale):
        raise ValidationError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    target = tol * np.linalg.norm(a)
    rounds = _round_robin(n)

    for _ in range(MAX_SWEEPS):
        if np.linalg.norm(a - np.diag(np.diag(a))) <= target:
            break
        for p, q in rounds:
            apq = a[p, q]
            live = apq != 0.0
            if not np.any(live):
                continue
            p, q, apq = p[live], q[live], apq[live]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            j = np.eye(n)
            j[p, p] = c
            j[q, q] = c
            j[p, q] = s
            j[q, p] = -s
            a = j.T @ a @ j
            a[p, q] = 0.0
            a[q, p] = 0.0
            v = v @ j
    else:
        raise NumericError(f"Jacobi iteration did not converge in {MAX_SWEEPS} sweeps")

    values = np.diag(a).copy()
    order = desc_order(values)
    return EigenResult(values=values[order], frame=v[:, order])


def _orthonormal_completion(cols: list[np.ndarray], n: int) -> np.ndarray:
    """Extend orthonormal columns to a full orthogonal matrix (modified Gram-Schmidt)."""
    basis = [c for c in cols]
    for i in range(n):
        if len(basis) == n:
            break
        w = np.zeros(n)
        w[i] = 1.0
        for b in basis:
            w -= (b @ w) * b
        for b in basis:
            w -= (b @ w) * b
        nw = np.linalg.norm(w)
        if nw > 1e-8:
            basis.append(w / nw)
    return np.column_stack(basis)


def svd_values(matrix, tol: float = 1e-12) -> SvdResult:
    """SVD of a square matrix through the eigendecomposition of A^T A.

    Right vectors come from the Gram matrix; each singular value is then
    re-measured as ||A v_i|| (far more accurate than sqrt of a tiny
    eigenvalue) and the left vectors are recovered as A v_i / s_i, so the
    signs of the two factors always agree.
    """
    a = _as_square(matrix, "matrix")
    n = a.shape[0]
    eig = sym_eigen(a.T @ a, tol=tol)
    right = eig.frame
    av = a @ right
    values = np.linalg.norm(av, axis=0)
    order = desc_order(values)
    values = values[order]
    right = right[:, order]
    av = av[:, order]

    floor = 1e-13 * max(1.0, values[0] if n else 0.0)
    cols: list[np.ndarray] = []
    for i in range(n):
        if values[i] <= floor:
            break
        u = av[:, i] / values[i]
        for b in cols:
            u = u - (b @ u) * b
        nu = np.linalg.norm(u)
        if nu < 1e-8:
            break
        cols.append(u / nu)
    left = _orthonormal_completion(cols, n)
    return SvdResult(values=values, left=left, right=right)


def _affine_min_norm(points: np.ndarray) -> np.ndarray:
    """Weights (summing to one) of the min-norm point of the affine hull of rows."""
    k = points.shape[0]
    gram = points @ points.T
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = gram
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    return sol[:k]


def min_norm_point(points: np.ndarray, tol: float = 1e-12, max_iter: int | None = None):
    """Wolfe's algorithm for the point of minimum norm in conv(rows of ``points``).

    Returns ``(x, weights)`` where ``weights`` is a convex combination over
    all rows reproducing ``x``.
    """
    p = np.asarray(points, dtype=float)
    m = p.shape[0]
    if max_iter is None:
        max_iter = 10 * m
    norms2 = np.einsum("ij,ij->i", p, p)
    scale = max(float(norms2.max()), 1e-300)

    active = [int(np.argmin(norms2))]
    w = np.array([1.0])
    x = p[active[0]].copy()

    for _ in range(max_iter):
        j = int(np.argmin(p @ x))
        if x @ x - p[j] @ x <= tol * scale or j in active:
            break
        active.append(j)
        w = np.append(w, 0.0)
        while True:
            v = _affine_min_norm(p[active])
            if np.all(v > 1e-15):
                w = v
                break
            mask = v <= 1e-15
            denom = w[mask] - v[mask]
            safe = np.where(denom > 0, denom, 1.0)
            ratios = np.where(denom > 0, w[mask] / safe, 0.0)
            theta = min(1.0, float(np.min(ratios)))
            w = (1.0 - theta) * w + theta * v
            keep = w > 1e-15
            if keep.all():
                # numerical stall; drop the smallest weight
                keep[int(np.argmin(w))] = False
            active = [a for a, k in zip(active, keep) if k]
            w = w[keep]
            w = w / w.sum()
        x = w @ p[active]

    weights = np.zeros(m)
    weights[active] = w
    return x, weights


def hull_membership(point, vertices, tol: float = 1e-9) -> HullVerdict:
    """Decide whether ``point`` lies in the convex hull of ``vertices``.

    Runs a min-norm-point iteration on the translated vertex set; the
    point is inside when its distance to the hull is at most
    ``tol * (1 + ||point||)``.
    """
    x = np.asarray(point, dtype=float)
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim == 1:
        verts = verts[None, :]
    if verts.shape[0] == 0:
        raise ValidationError("vertex list is empty")
    if x.ndim != 1 or verts.shape[1] != x.shape[0]:
        raise ValidationError(
            f"dimension mismatch: point {x.shape}, vertices {verts.shape}"
        )
    shifted = verts - x
    z, weights = min_norm_point(shifted, tol=1e-15)
    # polish: recompute the residual from the weights themselves
    nearest = weights @ verts
    distance = float(np.linalg.norm(nearest - x))
    inside = distance <= tol * (1.0 + float(np.linalg.norm(x)))
    return HullVerdict(
        inside=inside,
        distance=distance,
        weights=weights if inside else None,
        nearest=nearest,
    )
