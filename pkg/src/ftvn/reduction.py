"""Reduced pairs (W, W, mu): (C1) mu o lam = lam, (C2) ran mu in ran lam, and consequences."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import CheckReport, System, run_campaign, sample_rng
from .errors import HypothesisNotMet, RangeError, UnsupportedError
from .instances import abs_desc, is_decreasing, is_nonneg_decreasing
from .majorization import HLP_TOL, MajorizationVerdict, w_majorize
from .numerics import sort_desc

_KIND_OF = {
    "rn-down": "sort",
    "sym": "sort",
    "spin": "sort",
    "rn-abs": "abs",
    "sing-val": "abs",
    "finite-seq": "abs",
    "discrete": "identity",
}

_MU = {"sort": sort_desc, "abs": abs_desc, "identity": lambda q: np.array(q, dtype=float)}
_RANGE = {"sort": is_decreasing, "abs": is_nonneg_decreasing, "identity": lambda q, tol: True}


@dataclass(frozen=True)
class ReducedPair:
    """The base system together with mu on W and the range predicate of mu.

    ``kind`` names the W-side geometry: "sort" (orbits are permutations),
    "abs" (signed permutations) or "identity" (singleton orbits).
    """

    base: System
    mu: Callable[[np.ndarray], np.ndarray]
    range_w: Callable[[np.ndarray, float], bool]
    kind: str

    def majorize(self, p, q, tol: float = HLP_TOL) -> MajorizationVerdict:
        return w_majorize(self.kind, p, q, tol)

    def w_center(self) -> np.ndarray:
        """Orthonormal basis (columns) of the center of (W, W, mu)."""
        n = self.base.dim_w
        if self.kind == "sort":
            return np.ones((n, 1)) / math.sqrt(n)
        if self.kind == "identity":
            return np.eye(n)
        return np.zeros((n, 0))


def make_reduced_pair(sys: System) -> ReducedPair:
    kind = _KIND_OF.get(getattr(sys.spec, "kind", None))
    if kind is None:
        raise UnsupportedError(f"no reduced pair is registered for {sys.name}")
    return ReducedPair(base=sys, mu=_MU[kind], range_w=_RANGE[kind], kind=kind)


def check_reduced(
    pair: ReducedPair, n_samples: int = 1000, seed: int = 0, tol: float = 1e-10, jobs: int = 1
) -> CheckReport:
    """C1, C2, idempotence of mu and ran mu = ran lam on samples.

    Each sample draws x in V and a raw q in W. "c1" is |mu(lam x) - lam x|,
    "c2" flags mu(q) outside ran lam, "idempotent" is |mu(mu q) - mu q| and
    "range" is how far the attainment witness for mu(q) misses that spectrum.
    """
    base = pair.base

    def trial(rng: np.random.Generator, i: int):
        x = base.sample(rng)
        q = rng.standard_normal(base.dim_w)
        lx = base.lam(x)
        mq = pair.mu(q)
        nq = 1.0 + float(np.linalg.norm(q))
        violations = {
            "c1": float(np.linalg.norm(pair.mu(lx) - lx)) / (1.0 + base.norm_v(x)),
            "c2": 0.0 if base.in_range(mq, tol) else 1.0,
            "idempotent": float(np.linalg.norm(pair.mu(mq) - mq)) / nq,
        }
        if base.witness is not None:
            w = base.witness(base.sample(rng), mq)
            violations["range"] = float(np.linalg.norm(base.lam(w) - mq)) / nq
        return violations, {"x": x.tolist(), "q": q.tolist(), "index": i}

    return run_campaign(f"reduced:{base.name}", trial, n_samples, seed, tol, jobs)


def center_correspondence(pair: ReducedPair, tol: float = 1e-9) -> CheckReport:
    """lam carries the center of V onto the center of W, and units to units.

    Violations: "dim" when the two centers differ in dimension, "image"
    when lam of a V-center basis vector leaves the W center, "unit" when
    lam(e) is zero or outside the W center.
    """
    base = pair.base
    wc = pair.w_center()
    proj = wc @ wc.T
    violations = {"dim": 0.0 if wc.shape[1] == base.center.dim else 1.0, "image": 0.0, "unit": 0.0}
    for b in base.center.basis:
        for s in (b, -b):
            lb = base.lam(s)
            violations["image"] = max(violations["image"], float(np.linalg.norm(lb - proj @ lb)))
    payload: dict = {"v_center_dim": base.center.dim, "w_center_dim": int(wc.shape[1])}
    if base.unit is not None and base.center.dim == 1:
        le = base.lam(np.asarray(base.unit, dtype=float))
        payload["unit_spectrum"] = le.tolist()
        off = float(np.linalg.norm(le - proj @ le))
        violations["unit"] = off if np.linalg.norm(le) > tol else 1.0
    worst = max(violations.values())
    failed = worst > tol
    return CheckReport(
        passed=not failed,
        samples=1,
        max_violation=worst,
        seed=0,
        tolerance=tol,
        counterexample=dict(payload, violations=violations) if failed else None,
        name=f"center-correspondence:{base.name}",
        details=payload,
    )


def dual_cone_slack(pair: ReducedPair, r: np.ndarray, n_dirs: int, seed: int) -> tuple[float, str]:
    """Smallest pairing of r with generators of F = ran mu (negative: r not in F*).

    Exact for the decreasing cone (partial sums, plus the total in both
    signs since F contains the line through the ones vector), the
    nonnegative decreasing cone (partial sums) and F = W (F* = {0}).
    Other pairs fall back to sampled directions lam(c).
    """
    if pair.kind == "sort":
        sums = np.cumsum(r)
        return float(min(np.min(sums[:-1], initial=np.inf), -abs(sums[-1]))), "exact"
    if pair.kind == "abs":
        return float(np.min(np.cumsum(r))), "exact"
    if pair.kind == "identity":
        return -float(np.max(np.abs(r))), "exact"
    base = pair.base
    worst = np.inf
    for i in range(n_dirs):
        worst = min(worst, float(base.lam(base.sample(sample_rng(seed, i))) @ r))
    return worst, "sampled"


def dual_cone_majorization_check(
    pair: ReducedPair, u, v, n_dirs: int = 200, seed: int = 0, tol: float = HLP_TOL
) -> CheckReport:
    """If u, v lie in F and u - v lies in F*, then v is majorized by u in W."""
    base = pair.base
    u = base.spectrum(u)
    v = base.spectrum(v)
    for name, q in (("u", u), ("v", v)):
        if not base.in_range(q, tol):
            raise RangeError(f"{name}={q.tolist()} is not in the range of the spectral map")
    r = u - v
    scale = 1.0 + float(np.sum(np.abs(u)))
    slack, mode = dual_cone_slack(pair, r, n_dirs, seed)
    if slack < -tol * scale:
        raise HypothesisNotMet(f"u - v is not in the dual cone (slack {slack:.3e})")
    verdict = pair.majorize(v, u, tol)
    violation = 0.0 if verdict.holds else -verdict.margin / scale
    return CheckReport(
        passed=verdict.holds,
        samples=1,
        max_violation=violation,
        seed=seed,
        tolerance=tol,
        counterexample=None if verdict.holds else {"u": u.tolist(), "v": v.tolist(), "margin": verdict.margin},
        name=f"dual-cone:{base.name}",
        details={"hypothesis": mode, "dual_slack": slack},
    )
