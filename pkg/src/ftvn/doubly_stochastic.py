"""Doubly stochastic matrices and maps: HLP witnesses, Birkhoff, DS checks on systems."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .center import unit_element
from .core import DEFAULT_TOL, CheckReport, LinearMap, System, run_campaign
from .errors import (
    DegenerateFrameWarning,
    NotMajorizedError,
    NumericError,
    UnsupportedError,
    ValidationError,
)
from .instances import permutation_matrix
from .majorization import HLP_TOL, hlp_majorize
from .numerics import desc_order, sort_desc, sym_eigen


@dataclass(frozen=True)
class BirkhoffDecomposition:
    terms: tuple[tuple[float, np.ndarray], ...]  # (weight, perm) with P[i, perm[i]] = 1

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.terms])

    def reconstruct(self) -> np.ndarray:
        n = len(self.terms[0][1])
        out = np.zeros((n, n))
        for w, perm in self.terms:
            out[np.arange(n), perm] += w
        return out


def _square(m) -> np.ndarray:
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    return a


def is_ds_matrix(m, tol: float = 1e-12) -> bool:
    a = _square(m)
    return bool(
        np.all(a >= -tol)
        and np.all(np.abs(a.sum(axis=0) - 1.0) <= tol)
        and np.all(np.abs(a.sum(axis=1) - 1.0) <= tol)
    )


# -- HLP witness --------------------------------------------------------------------


def construct_ds_witness(x, y, tol: float = HLP_TOL) -> np.ndarray:
    """A doubly stochastic M with M y = x, for x majorized by y.

    Works on decreasing rearrangements: while the running vector z differs
    from x, take the last index j with z_j > x_j and the first k > j with
    z_k < x_k, and average those two coordinates just enough to match one
    of them. At most n - 1 such T-transforms are needed. When x is the
    constant vector the uniform matrix is returned directly.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    verdict = hlp_majorize(x, y, tol)
    if not verdict.holds:
        raise NotMajorizedError(f"x is not majorized by y (margin {verdict.margin:.3e})")
    n = x.size
    scale = 1.0 + float(np.max(np.abs(y))) if n else 1.0
    if np.all(np.abs(x - y) <= 1e-15 * scale):
        return np.eye(n)
    if n > 1 and np.all(np.abs(x - y.mean()) <= 1e-15 * scale):
        return np.full((n, n), 1.0 / n)

    px, py = desc_order(x), desc_order(y)
    xs, z = x[px], y[py].copy()
    m = np.eye(n)
    eps = 1e-15 * scale
    for _ in range(n):
        d = z - xs
        over = np.flatnonzero(d > eps)
        if over.size == 0:
            break
        j = int(over[-1])
        under = np.flatnonzero(d[j + 1 :] < -eps)
        if under.size == 0:
            break
        k = j + 1 + int(under[0])
        delta = min(z[j] - xs[j], xs[k] - z[k])
        s = delta / (z[j] - z[k])
        t = np.eye(n)
        t[[j, k], [j, k]] = 1.0 - s
        t[j, k] = t[k, j] = s
        z = t @ z
        m = t @ m
    # back to the original coordinates: x = Px M Py^T y
    out = permutation_matrix(px) @ m @ permutation_matrix(py).T
    if np.linalg.norm(out @ y - x) > max(tol, 1e-12) * scale * np.sqrt(n):
        raise NumericError("T-transform construction did not reach the target")
    return out


# -- Birkhoff -------------------------------------------------------------------------


def _perfect_matching(support: np.ndarray, values: np.ndarray) -> np.ndarray | None:
    """Kuhn's augmenting paths; columns tried in decreasing order of value."""
    n = support.shape[0]
    match_col = -np.ones(n, dtype=int)  # column -> row
    prefs = [[int(c) for c in np.argsort(-values[r], kind="stable") if support[r, c]] for r in range(n)]

    def augment(r: int, seen: np.ndarray) -> bool:
        for c in prefs[r]:
            if seen[c]:
                continue
            seen[c] = True
            if match_col[c] < 0 or augment(int(match_col[c]), seen):
                match_col[c] = r
                return True
        return False

    for r in range(n):
        if not augment(r, np.zeros(n, dtype=bool)):
            return None
    perm = np.empty(n, dtype=int)
    perm[match_col] = np.arange(n)
    return perm


def _caratheodory(terms: list[tuple[float, np.ndarray]], n: int) -> list[tuple[float, np.ndarray]]:
    """Drop terms until at most (n-1)^2 + 1 remain, keeping the same sum."""
    limit = (n - 1) ** 2 + 1
    while len(terms) > limit:
        k = len(terms)
        a = np.zeros((n * n + 1, k))
        for i, (_, perm) in enumerate(terms):
            a[: n * n, i] = permutation_matrix(perm).T.reshape(-1)
            a[n * n, i] = 1.0
        direction = np.linalg.svd(a)[2][-1]
        if not np.any(direction > 0):
            direction = -direction
        w = np.array([t[0] for t in terms])
        pos = direction > 1e-14
        step = float(np.min(w[pos] / direction[pos]))
        w = w - step * direction
        terms = [(float(wi), p) for wi, (_, p) in zip(w, terms) if wi > 1e-14]
    return terms


def birkhoff_decompose(m, tol: float = 1e-12) -> BirkhoffDecomposition:
    """Greedy Birkhoff decomposition of a doubly stochastic matrix.

    Repeatedly finds a permutation supported on the positive entries of
    the remainder and peels off its smallest entry.
    """
    a = _square(m)
    if not is_ds_matrix(a, max(tol, 1e-9)):
        raise ValidationError("matrix is not doubly stochastic")
    n = a.shape[0]
    rest = np.clip(a, 0.0, None)
    floor = 1e-13
    terms: list[tuple[float, np.ndarray]] = []
    remaining = 1.0
    for _ in range(n * n + 1):
        if remaining <= 1e-12:
            break
        perm = _perfect_matching(rest > floor, rest)
        if perm is None:
            raise NumericError(f"no permutation in the support with {remaining:.3e} mass left; loosen tol")
        rows = np.arange(n)
        w = float(np.min(rest[rows, perm]))
        rest[rows, perm] -= w
        rest[rest <= floor] = 0.0
        terms.append((w, perm))
        remaining -= w
    terms = _caratheodory(terms, n)
    total = sum(w for w, _ in terms)
    return BirkhoffDecomposition(terms=tuple((w / total, p) for w, p in terms))


# -- DS maps on systems ------------------------------------------------------------------


def _as_map(sys: System, d) -> np.ndarray:
    m = d.matrix if isinstance(d, LinearMap) else np.array(d, dtype=float)
    if m.shape != (sys.dim_v, sys.dim_v):
        raise ValidationError(f"{sys.name}: map must be {sys.dim_v}x{sys.dim_v}, got {m.shape}")
    return m


def is_ds_transform(
    sys: System, d, n_samples: int = 200, seed: int = 0, tol: float = DEFAULT_TOL, jobs: int = 1
) -> CheckReport:
    """lam(Dx) majorized by lam(x) on sampled x (the operational DS definition)."""
    from .reduction import make_reduced_pair

    pair = make_reduced_pair(sys)
    m = _as_map(sys, d)

    def trial(rng: np.random.Generator, i: int):
        x = sys.sample(rng)
        dx = m @ x
        payload = {"x": x.tolist(), "dx": dx.tolist(), "index": i}
        try:
            sys.element(dx)
        except ValidationError:
            return {"domain": 1.0}, payload
        lx = sys.lam(x)
        verdict = pair.majorize(sys.lam(dx), lx, tol)
        excess = 0.0 if verdict.holds else -verdict.margin / (1.0 + float(np.sum(np.abs(lx))))
        return {"majorization": excess}, payload

    return run_campaign(f"ds-transform:{sys.name}", trial, n_samples, seed, tol, jobs)


def _nonneg_spectrum_sample(sys: System, rng: np.random.Generator) -> np.ndarray:
    x = sys.sample(rng)
    return sys.witness(sys.sample(rng), sort_desc(np.abs(sys.lam(x))))


def eja_ds_criteria(
    sys: System, d, n_samples: int = 500, seed: int = 0, tol: float = DEFAULT_TOL, jobs: int = 1
) -> CheckReport:
    """De = e, D*e = e and (sampled) invariance of the cone of nonnegative spectra."""
    e = unit_element(sys)
    if e is None or sys.witness is None:
        raise UnsupportedError(f"{sys.name} has no unit element")
    m = _as_map(sys, d)
    ne = sys.norm_v(e)

    def fixed():
        return (
            {"unit": sys.norm_v(m @ e - e) / ne, "adjoint_unit": sys.norm_v(m.T @ e - e) / ne},
            {"index": "unit"},
        )

    def trial(rng: np.random.Generator, i: int):
        x = _nonneg_spectrum_sample(sys, rng)
        low = float(np.min(sys.lam(m @ x)))
        return {"cone": max(0.0, -low) / (1.0 + sys.norm_v(x))}, {"x": x.tolist(), "index": i}

    return run_campaign(f"eja-ds:{sys.name}", trial, n_samples, seed, tol, jobs, [fixed])


def _spectral_gap(values: np.ndarray) -> float:
    return float(np.min(np.abs(np.diff(values)))) if values.size > 1 else np.inf


def extract_transition_matrix(sys: System, d, x) -> np.ndarray:
    """M with m_ij = <D(e_j), f_i> for spectral frames {e_j} of x and {f_i} of Dx.

    For a DS map M is doubly stochastic and M lam(x) = lam(Dx).
    """
    kind = getattr(sys.spec, "kind", None)
    m = _as_map(sys, d)
    x = sys.element(x)
    y = m @ x
    if kind == "sym":
        n = sys.dim_w
        ex = sym_eigen(x.reshape(n, n))
        ey = sym_eigen(sys.element(y).reshape(n, n))
        out = np.empty((n, n))
        for j in range(n):
            image = (m @ np.outer(ex.frame[:, j], ex.frame[:, j]).reshape(-1)).reshape(n, n)
            out[:, j] = np.einsum("ki,kl,li->i", ey.frame, image, ey.frame)
        lx, ly = ex.values, ey.values
    elif kind == "rn-down":
        ox, oy = desc_order(x), desc_order(y)
        out = m[np.ix_(oy, ox)]
        lx, ly = x[ox], y[oy]
    else:
        raise UnsupportedError(f"transition matrices are built for sym and rn-down, not {sys.name}")
    bound = 1e-8 * (1.0 + float(np.max(np.abs(lx))))
    if _spectral_gap(lx) <= bound or _spectral_gap(ly) <= bound:
        warnings.warn("repeated eigenvalues: frames are not unique", DegenerateFrameWarning, stacklevel=2)
    return out


def ds_from_automorphisms(sys: System, weights: Sequence[float], maps: Sequence) -> LinearMap:
    """The convex combination sum w_i A_i."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or len(maps) != w.size or w.size == 0:
        raise ValidationError("need one weight per map")
    if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-12:
        raise ValidationError("weights must be nonnegative and sum to one")
    total = sum(wi * _as_map(sys, a) for wi, a in zip(w, maps))
    return LinearMap(total, meta="automorphism hull")


def ds_fixed_points(sys: System, d, tol: float = DEFAULT_TOL) -> CheckReport:
    """D and its adjoint fix every center basis vector."""
    m = _as_map(sys, d)
    worst, counterexample = 0.0, None
    for b in sys.center.basis:
        v = max(sys.norm_v(m @ b - b), sys.norm_v(m.T @ b - b))
        worst = max(worst, v)
        if v > tol and counterexample is None:
            counterexample = {"center_vector": b.tolist(), "violation": v}
    return CheckReport(
        passed=counterexample is None,
        samples=sys.center.dim,
        max_violation=worst,
        seed=0,
        tolerance=tol,
        counterexample=counterexample,
        name=f"ds-fixed-points:{sys.name}",
    )
