"""Majorization: HLP partial sums in W, conv-orbit majorization in V, oracles."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

import numpy as np

from .core import CheckReport, System, run_campaign
from .errors import NumericError, SizeGuardError, ValidationError
from .numerics import hull_membership, sort_desc

HLP_TOL = 1e-9
HULL_MAX_N = 6


@dataclass(frozen=True)
class MajorizationVerdict:
    holds: bool
    weak_holds: bool
    margin: float
    witness: dict | None = None

    def __bool__(self) -> bool:
        return self.holds


def _pair(u, v) -> tuple[np.ndarray, np.ndarray]:
    u = np.asarray(u, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    if u.shape != v.shape:
        raise ValidationError(f"length mismatch: {u.size} vs {v.size}")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise ValidationError("vectors must be finite")
    return u, v


def partial_slacks(u, v) -> np.ndarray:
    """S_k(v) - S_k(u) for k = 1..n on decreasing rearrangements."""
    u, v = _pair(u, v)
    return np.cumsum(sort_desc(v)) - np.cumsum(sort_desc(u))


def hlp_majorize(u, v, tol: float = HLP_TOL) -> MajorizationVerdict:
    """Is u majorized by v (and weakly majorized)?

    Partial sums of the decreasing rearrangements are compared with the
    tolerance ``tol * (1 + ||v||_1)``. The margin is the smallest slack
    among the k < n inequalities, lowered to -|total gap| when the totals
    disagree.
    """
    u, v = _pair(u, v)
    n = u.size
    tol_s = tol * (1.0 + float(np.sum(np.abs(v))))
    slacks = partial_slacks(u, v)
    total_gap = float(slacks[-1]) if n else 0.0
    weak = bool(np.all(slacks >= -tol_s))
    sums_equal = abs(total_gap) <= tol_s
    holds = sums_equal and bool(np.all(slacks[:-1] >= -tol_s))
    margin = float(np.min(slacks[:-1])) if n > 1 else 0.0
    if not sums_equal:
        margin = min(margin, -abs(total_gap))
    return MajorizationVerdict(holds=holds, weak_holds=weak, margin=margin)


def weak_abs_majorize(u, v, tol: float = HLP_TOL) -> MajorizationVerdict:
    """Majorization for absolute-value systems: conv of signed permutations.

    u lies in the hull of the signed-permutation orbit of v exactly when
    |u| is weakly majorized by |v|, so holds and weak_holds coincide.
    """
    u, v = _pair(u, v)
    tol_s = tol * (1.0 + float(np.sum(np.abs(v))))
    slacks = partial_slacks(np.abs(u), np.abs(v))
    ok = bool(np.all(slacks >= -tol_s))
    margin = float(np.min(slacks)) if slacks.size else 0.0
    return MajorizationVerdict(holds=ok, weak_holds=ok, margin=margin)


def equality_majorize(u, v, tol: float = HLP_TOL) -> MajorizationVerdict:
    """Majorization when every orbit is a singleton: u must equal v."""
    u, v = _pair(u, v)
    gap = float(np.linalg.norm(u - v))
    ok = gap <= tol * (1.0 + float(np.sum(np.abs(v))))
    return MajorizationVerdict(holds=ok, weak_holds=ok, margin=-gap)


W_RULES = {"sort": hlp_majorize, "abs": weak_abs_majorize, "identity": equality_majorize}


def w_majorize(kind: str, u, v, tol: float = HLP_TOL) -> MajorizationVerdict:
    """Majorization in the reduced system (W, W, mu) of the given kind."""
    try:
        rule = W_RULES[kind]
    except KeyError:
        raise ValidationError(f"unknown reduced-system kind {kind!r}") from None
    return rule(u, v, tol)


def _permutation_vertices(y: np.ndarray) -> np.ndarray:
    seen: dict[tuple, None] = {}
    for p in permutations(y.tolist()):
        seen.setdefault(p, None)
    return np.array(list(seen), dtype=float)


def hull_oracle_rn(x, y, tol: float = HLP_TOL) -> MajorizationVerdict:
    """x in conv{Py : P permutation}, decided by enumerating vertices.

    Independent of the partial-sum test; only for n <= 6.
    """
    x, y = _pair(x, y)
    if x.size > HULL_MAX_N:
        raise SizeGuardError(f"hull oracle enumerates n! vertices; n={x.size} exceeds {HULL_MAX_N}")
    verts = _permutation_vertices(y)
    verdict = hull_membership(x, verts, tol)
    witness = None
    if verdict.inside:
        keep = verdict.weights > 0
        witness = {"weights": verdict.weights[keep].tolist(), "vertices": verts[keep].tolist()}
    return MajorizationVerdict(
        holds=verdict.inside, weak_holds=verdict.inside, margin=-verdict.distance, witness=witness
    )


def majorize_in_v(sys: System, x, y, tol: float = HLP_TOL) -> MajorizationVerdict:
    """x in conv[y], decided on the spectra through the reduced pair."""
    from .reduction import make_reduced_pair

    pair = make_reduced_pair(sys)
    x = sys.element(x)
    y = sys.element(y)
    verdict = pair.majorize(sys.lam(x), sys.lam(y), tol)
    if verdict.holds and pair.kind == "sort" and sys.dim_v == sys.dim_w and sys.dim_v <= HULL_MAX_N:
        if sys.spec is not None and sys.spec.kind == "rn-down":
            oracle = hull_oracle_rn(x, y, tol)
            if oracle.holds:
                verdict = MajorizationVerdict(verdict.holds, verdict.weak_holds, verdict.margin, oracle.witness)
    return verdict


def support_test(
    sys: System, x, y, n_dirs: int = 200, seed: int = 0, tol: float = 1e-8, jobs: int = 1
) -> CheckReport:
    """Necessary conditions for x in conv[y] along sampled directions c.

    Records violations of <c, x> <= <lam c, lam y> ("linear") and
    <lam c, lam x> <= <lam c, lam y> ("spectral"). The directions x, -x
    and y are always probed first.
    """
    x = sys.element(x)
    y = sys.element(y)
    lx, ly = sys.lam(x), sys.lam(y)
    ny = sys.norm_v(y)

    def evaluate(c: np.ndarray, index) -> tuple[dict, dict]:
        lc = sys.lam(c)
        bound = sys.inner_w(lc, ly)
        scale = 1.0 + sys.norm_v(c) * max(ny, sys.norm_v(x))
        linear = max(0.0, sys.inner_v(c, x) - bound) / scale
        spectral = max(0.0, sys.inner_w(lc, lx) - bound) / scale
        return {"linear": linear, "spectral": spectral}, {"c": c.tolist(), "index": index}

    fixed = [lambda c=c, tag=tag: evaluate(c, tag) for c, tag in ((x, "x"), (-x, "-x"), (y, "y"))]
    return run_campaign(
        f"support:{sys.name}", lambda rng, i: evaluate(sys.sample(rng), i), n_dirs, seed, tol, jobs, fixed
    )


def mutual_majorization_check(sys: System, x, y, tol: float = HLP_TOL) -> bool:
    """x and y majorize each other, which happens exactly when they share an orbit."""
    both = majorize_in_v(sys, x, y, tol).holds and majorize_in_v(sys, y, x, tol).holds
    x = sys.element(x)
    y = sys.element(y)
    gap = sys.norm_w(sys.lam(x) - sys.lam(y))
    scale = 1.0 + sys.norm_v(x) + sys.norm_v(y)
    if both and gap > 1e3 * tol * scale:
        raise NumericError(f"mutual majorization with spectra {gap:.3e} apart")
    if not both and gap <= 1e-3 * tol * scale:
        raise NumericError("equal spectra but majorization failed in one direction")
    return both


def lidskii_sum_check(sys: System, xs: Sequence, tol: float = 1e-8) -> MajorizationVerdict:
    """lam(x1 + ... + xk) majorized by lam(x1) + ... + lam(xk) in the reduced system."""
    from .reduction import make_reduced_pair

    if len(xs) == 0:
        raise ValidationError("xs must be nonempty")
    pair = make_reduced_pair(sys)
    xs = [sys.element(x) for x in xs]
    total = sum(sys.lam(x) for x in xs)
    return pair.majorize(sys.lam(sum(xs)), total, tol)


def lidskii_campaign(
    sys: System, n_samples: int = 1000, seed: int = 0, tol: float = 1e-8, jobs: int = 1
) -> CheckReport:
    """lidskii_sum_check on random pairs (even samples) and triples (odd samples)."""
    from .reduction import make_reduced_pair

    pair = make_reduced_pair(sys)

    def trial(rng: np.random.Generator, i: int):
        xs = [sys.sample(rng) for _ in range(2 + i % 2)]
        total = sum(sys.lam(x) for x in xs)
        verdict = pair.majorize(sys.lam(sum(xs)), total, tol)
        scale = 1.0 + float(np.sum(np.abs(total)))
        excess = 0.0 if verdict.holds else -verdict.margin / scale
        return {"lidskii": excess}, {"xs": [x.tolist() for x in xs], "index": i}

    return run_campaign(f"lidskii:{sys.name}", trial, n_samples, seed, tol, jobs)
