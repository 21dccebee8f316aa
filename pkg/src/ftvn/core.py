"""The system contract: spectral map, attainment witness, orbit support, commutation.

A :class:`System` bundles a finite-coordinate inner-product space V, a
spectrum space W and the spectral map ``lam: V -> W``. Elements and
spectra are flat float arrays; matrix instances flatten row-major so the
trace inner product becomes the plain dot product.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .errors import RangeError, UnsupportedError, ValidationError

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class LinearMap:
    """Dense matrix acting on element coordinates."""

    matrix: np.ndarray
    meta: str | None = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        return LinearMap(self.matrix @ other.matrix, meta="composite")

    @property
    def T(self) -> "LinearMap":
        return LinearMap(self.matrix.T, meta=self.meta)


@dataclass(frozen=True)
class CenterDescriptor:
    basis: tuple[np.ndarray, ...]
    kind: str  # trivial | line | full | custom

    @property
    def dim(self) -> int:
        return len(self.basis)

    def matrix(self, dim_v: int) -> np.ndarray:
        if not self.basis:
            return np.zeros((dim_v, 0))
        return np.column_stack(self.basis)


def center_kind(dim: int, dim_v: int) -> str:
    if dim == 0:
        return "trivial"
    if dim == dim_v:
        return "full"
    if dim == 1:
        return "line"
    return "custom"


@dataclass(frozen=True)
class System:
    """An FTvN system instance.

    ``witness(c, q)`` returns x with spectrum q attaining
    <c, x> = <lam(c), q>. ``in_range(q, tol)`` tests membership of q in the
    range of ``lam``. ``sample(rng)`` draws a random element.
    """

    name: str
    dim_v: int
    dim_w: int
    lam: Callable[[np.ndarray], np.ndarray]
    in_range: Callable[[np.ndarray, float], bool]
    sample: Callable[[np.random.Generator], np.ndarray]
    center: CenterDescriptor
    witness: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    check_element: Callable[[np.ndarray], None] | None = None
    unit: np.ndarray | None = None
    sample_automorphism: Callable[[np.random.Generator], LinearMap] | None = None
    transport: Callable[[np.ndarray, np.ndarray], LinearMap] | None = None
    embed_w: Callable[[np.ndarray], np.ndarray] | None = None
    a3_search: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray | None, float]] | None = None
    probes: tuple[tuple[np.ndarray, np.ndarray], ...] = ()
    gram_v: np.ndarray | None = None
    gram_w: np.ndarray | None = None
    spec: Any = None

    def inner_v(self, x: np.ndarray, y: np.ndarray) -> float:
        if self.gram_v is None:
            return float(x @ y)
        return float(x @ self.gram_v @ y)

    def inner_w(self, p: np.ndarray, q: np.ndarray) -> float:
        if self.gram_w is None:
            return float(p @ q)
        return float(p @ self.gram_w @ q)

    def norm_v(self, x: np.ndarray) -> float:
        return math.sqrt(max(self.inner_v(x, x), 0.0))

    def norm_w(self, q: np.ndarray) -> float:
        return math.sqrt(max(self.inner_w(q, q), 0.0))

    def element(self, x) -> np.ndarray:
        """Validate and coerce an element of V."""
        arr = np.array(x, dtype=float)
        if arr.ndim == 2 and arr.size == self.dim_v:
            arr = arr.reshape(-1)
        if arr.shape != (self.dim_v,):
            raise ValidationError(
                f"{self.name}: element must have {self.dim_v} coordinates, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValidationError(f"{self.name}: element has non-finite coordinates")
        if self.check_element is not None:
            self.check_element(arr)
        return arr

    def spectrum(self, q) -> np.ndarray:
        arr = np.array(q, dtype=float).reshape(-1)
        if arr.shape != (self.dim_w,):
            raise ValidationError(
                f"{self.name}: spectrum must have {self.dim_w} entries, got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValidationError(f"{self.name}: spectrum has non-finite entries")
        return arr


@dataclass
class CheckReport:
    """Outcome of a randomized property campaign."""

    passed: bool
    samples: int
    max_violation: float
    seed: int
    tolerance: float
    counterexample: dict | None = None
    name: str = ""
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for sample ``index`` of a campaign seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, int(index)]))


def run_campaign(
    name: str,
    trial: Callable[[np.random.Generator, int], tuple[dict[str, float], dict]],
    n_samples: int,
    seed: int,
    tol: float,
    jobs: int = 1,
    fixed: Sequence[Callable[[], tuple[dict[str, float], dict]]] = (),
) -> CheckReport:
    """Run ``trial`` on ``n_samples`` seeded streams and aggregate.

    Each trial returns ``(violations, payload)``: named nonnegative
    violation magnitudes (already scaled) and the inputs that produced
    them. Fixed probes run before the random ones. The report only depends
    on (seed, sample index), never on ``jobs`` or scheduling order.
    """
    if n_samples < 1:
        raise ValidationError("n_samples must be at least 1")
    if not tol > 0:
        raise ValidationError("tolerance must be positive")

    def one(i: int):
        return trial(sample_rng(seed, i), i)

    results = [f() for f in fixed]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results.extend(pool.map(one, range(n_samples)))
    else:
        results.extend(one(i) for i in range(n_samples))

    details: dict[str, float] = {}
    counterexample = None
    worst = 0.0
    for violations, payload in results:
        for key, v in violations.items():
            v = float(v) if np.isfinite(v) else math.inf
            details[key] = max(details.get(key, 0.0), v)
            worst = max(worst, v)
        if counterexample is None and any(v > tol for v in violations.values()):
            counterexample = dict(payload)
            counterexample["violations"] = {k: float(v) for k, v in violations.items()}
    return CheckReport(
        passed=counterexample is None,
        samples=n_samples,
        max_violation=worst,
        seed=seed,
        tolerance=tol,
        counterexample=counterexample,
        name=name,
        details=details,
    )


# -- operations -------------------------------------------------------------


def lam(sys: System, x) -> np.ndarray:
    """Spectrum of ``x``."""
    return sys.lam(sys.element(x))


def witness_a3(sys: System, c, q, tol: float = 1e-9) -> np.ndarray:
    """An element with spectrum ``q`` that attains the max inequality against ``c``."""
    c = sys.element(c)
    q = sys.spectrum(q)
    if sys.witness is None:
        raise UnsupportedError(f"{sys.name} has no constructive attainment witness")
    if not sys.in_range(q, tol):
        raise RangeError(f"{sys.name}: {q.tolist()} is not in the range of the spectral map")
    return sys.witness(c, q)


def orbit_support(sys: System, c, u) -> tuple[float, np.ndarray]:
    """max <c, x> over the orbit of u, with a maximizer."""
    c = sys.element(c)
    u = sys.element(u)
    lu = sys.lam(u)
    value = sys.inner_w(sys.lam(c), lu)
    return value, witness_a3(sys, c, lu)


@dataclass(frozen=True)
class Criterion:
    defect: float
    status: str  # holds | fails | indeterminate

    @property
    def holds(self) -> bool:
        return self.status == "holds"


@dataclass(frozen=True)
class CommuteReport:
    inner: Criterion
    additive: Criterion
    isometric: Criterion

    @property
    def determinate(self) -> bool:
        return all(c.status != "indeterminate" for c in (self.inner, self.additive, self.isometric))

    @property
    def consistent(self) -> bool:
        verdicts = {c.status for c in (self.inner, self.additive, self.isometric)}
        verdicts.discard("indeterminate")
        return len(verdicts) <= 1


def _criterion(defect: float, tol: float) -> Criterion:
    if defect <= tol:
        return Criterion(defect, "holds")
    if defect > 10 * tol:
        return Criterion(defect, "fails")
    return Criterion(defect, "indeterminate")


def commute_report(sys: System, x, y, tol: float = DEFAULT_TOL) -> CommuteReport:
    """Evaluate the three equivalent commutation criteria.

    Defects are scaled by operand magnitudes. A defect between ``tol`` and
    ``10 * tol`` is reported as indeterminate.
    """
    x = sys.element(x)
    y = sys.element(y)
    lx, ly = sys.lam(x), sys.lam(y)
    nx, ny = sys.norm_v(x), sys.norm_v(y)
    inner = (sys.inner_w(lx, ly) - sys.inner_v(x, y)) / (1.0 + nx * ny)
    additive = sys.norm_w(sys.lam(x + y) - lx - ly) / (1.0 + nx + ny)
    # squared distances: ||x - y||^2 - ||lam x - lam y||^2 is twice the inner gap,
    # whereas the plain difference of norms blows the gap up when x is near y
    isometric = 0.5 * (sys.norm_v(x - y) ** 2 - sys.norm_w(lx - ly) ** 2) / (1.0 + nx * ny)
    return CommuteReport(
        inner=_criterion(abs(inner), tol),
        additive=_criterion(additive, tol),
        isometric=_criterion(abs(isometric), tol),
    )


def commute(sys: System, x, y, tol: float = DEFAULT_TOL) -> tuple[bool, CommuteReport]:
    """Whether x and y commute, decided by <x, y> = <lam(x), lam(y)>."""
    report = commute_report(sys, x, y, tol)
    return report.inner.holds, report


def _scaled(value: float, scale: float) -> float:
    return value / (1.0 + scale)


def check_axioms(
    sys: System, n_samples: int = 1000, seed: int = 0, tol: float = DEFAULT_TOL, jobs: int = 1
) -> CheckReport:
    """Randomized check of norm preservation, the max inequality and attainment.

    For each sample (x, y): norm preservation on x, the inequality on
    (x, y), and attainment through ``witness(x, lam(y))``. Instances
    without a witness are probed with their exhaustive ``a3_search``;
    designated probe pairs (c, u) run first.
    """
    if n_samples < 1:
        raise ValidationError("n_samples must be at least 1")

    def attainment(c: np.ndarray, u: np.ndarray) -> tuple[dict, dict]:
        lc, q = sys.lam(c), sys.lam(u)
        target = sys.inner_w(lc, q)
        scale = sys.norm_v(c) * sys.norm_w(q)
        payload: dict[str, Any] = {"c": c.tolist(), "u": u.tolist(), "q": q.tolist()}
        if sys.witness is not None:
            w = sys.witness(c, q)
            spec_err = sys.norm_w(sys.lam(w) - q) / (1.0 + sys.norm_w(q))
            achieved = sys.inner_v(c, w)
            payload.update(x=w.tolist(), inner_cx=achieved, inner_spectra=target, gap=target - achieved)
            return {"a3_spectrum": spec_err, "a3_gap": _scaled(abs(target - achieved), scale)}, payload
        if sys.a3_search is None:
            raise UnsupportedError(f"{sys.name} exposes neither a witness nor an attainment search")
        w, best = sys.a3_search(c, q)
        achieved = target - best
        payload.update(
            x=None if w is None else w.tolist(), inner_cx=achieved, inner_spectra=target, gap=best
        )
        return {"a3_gap": _scaled(best, scale)}, payload

    def trial(rng: np.random.Generator, i: int):
        x = sys.sample(rng)
        y = sys.sample(rng)
        lx, ly = sys.lam(x), sys.lam(y)
        nx, ny = sys.norm_v(x), sys.norm_v(y)
        a1 = abs(sys.norm_w(lx) - nx) / (1.0 + nx)
        a2 = max(0.0, sys.inner_v(x, y) - sys.inner_w(lx, ly)) / (1.0 + nx * ny)
        violations, payload = attainment(x, y)
        violations.update(a1=a1, a2=a2)
        payload["index"] = i
        return violations, payload

    def probe(c: np.ndarray, u: np.ndarray):
        def run():
            violations, payload = attainment(c, u)
            payload["index"] = "designated"
            return violations, payload

        return run

    fixed = [probe(sys.element(c), sys.element(u)) for c, u in sys.probes]
    return run_campaign(f"axioms:{sys.name}", trial, n_samples, seed, tol, jobs, fixed)


def sublinearity_gap(sys: System, c, xs: Sequence) -> float:
    """<lam(c), sum lam(x_i)> - <lam(c), lam(sum x_i)>; nonnegative on valid systems."""
    if len(xs) == 0:
        raise ValidationError("xs must be nonempty")
    c = sys.element(c)
    xs = [sys.element(x) for x in xs]
    lc = sys.lam(c)
    total = sum(sys.lam(x) for x in xs)
    return sys.inner_w(lc, total) - sys.inner_w(lc, sys.lam(sum(xs)))
