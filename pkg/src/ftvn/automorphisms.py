"""Automorphisms: verification, group samplers, orbit transport and the NDS check."""
from __future__ import annotations

import numpy as np

from .core import DEFAULT_TOL, CheckReport, LinearMap, System, run_campaign, sample_rng
from .errors import NumericError, OrbitMismatchError, UnsupportedError, ValidationError

PIVOT_FLOOR = 1e-10


def min_pivot(matrix: np.ndarray) -> float:
    """Smallest pivot magnitude of Gaussian elimination with partial pivoting."""
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    smallest = np.inf
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        pivot = a[p, k]
        smallest = min(smallest, abs(pivot))
        if pivot == 0.0:
            return 0.0
        if p != k:
            a[[k, p]] = a[[p, k]]
        a[k + 1 :, k:] -= np.outer(a[k + 1 :, k] / pivot, a[k, k:])
    return float(smallest)


def as_map(sys: System, a) -> LinearMap:
    m = a.matrix if isinstance(a, LinearMap) else np.array(a, dtype=float)
    if m.shape != (sys.dim_v, sys.dim_v):
        raise ValidationError(f"{sys.name}: map must be {sys.dim_v}x{sys.dim_v}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("map has non-finite entries")
    return a if isinstance(a, LinearMap) else LinearMap(m)


def is_automorphism(
    sys: System, a, n_samples: int = 100, seed: int = 0, tol: float = DEFAULT_TOL, jobs: int = 1
) -> CheckReport:
    """Check invertibility, lam(Ax) = lam(x) on samples, and that A fixes the center."""
    a = as_map(sys, a)
    m = a.matrix

    def fixed():
        pivot = min_pivot(m)
        drift = 0.0
        for b in sys.center.basis:
            drift = max(drift, sys.norm_v(m @ b - b))
        violations = {"invertible": 0.0 if pivot > PIVOT_FLOOR else 1.0, "center": drift}
        return violations, {"min_pivot": pivot, "index": "structure"}

    def trial(rng: np.random.Generator, i: int):
        x = sys.sample(rng)
        ax = m @ x
        payload = {"x": x.tolist(), "ax": ax.tolist(), "index": i}
        try:
            sys.element(ax)
        except ValidationError:
            return {"domain": 1.0}, payload
        err = sys.norm_w(sys.lam(ax) - sys.lam(x)) / (1.0 + sys.norm_v(x))
        return {"spectrum": err}, payload

    return run_campaign(f"automorphism:{sys.name}", trial, n_samples, seed, tol, jobs, [fixed])


def automorphism_sampler(sys: System, seed: int = 0) -> LinearMap:
    """Draw one automorphism from the instance's group sampler."""
    if sys.sample_automorphism is None:
        raise UnsupportedError(f"{sys.name} has no automorphism sampler")
    return sys.sample_automorphism(sample_rng(seed, 0))


def orbit_transport(sys: System, x, y, tol: float = DEFAULT_TOL, probes: int = 4) -> LinearMap:
    """An automorphism A with Ax = y, for x and y in the same orbit."""
    x = sys.element(x)
    y = sys.element(y)
    scale = 1.0 + sys.norm_v(x)
    if sys.norm_w(sys.lam(x) - sys.lam(y)) > tol * scale:
        raise OrbitMismatchError(f"{sys.name}: x and y have different spectra")
    if sys.transport is None:
        raise UnsupportedError(f"{sys.name} has no orbit transport construction")
    a = sys.transport(x, y)
    if sys.norm_v(a(x) - y) > tol * scale:
        raise NumericError(f"{sys.name}: transport misses the target by {sys.norm_v(a(x) - y):.3e}")
    if probes and not is_automorphism(sys, a, n_samples=probes, seed=0, tol=tol).passed:
        raise NumericError(f"{sys.name}: constructed transport is not an automorphism")
    return a


def nds_check(
    sys: System, n_samples: int = 200, seed: int = 0, tol: float = DEFAULT_TOL, jobs: int = 1
) -> CheckReport:
    """Orbit transitivity, W inside V and idempotence of the embedded spectral map.

    With g = embed(lam(x)), asserts lam(g) = lam(x) and that g lies in V,
    then transports x onto a witness-built orbit mate and checks the
    transport on a fresh probe.
    """
    if sys.embed_w is None:
        raise UnsupportedError(f"{sys.name} declares no embedding of W into V")
    if sys.transport is None or sys.witness is None:
        raise UnsupportedError(f"{sys.name} cannot build orbit mates and transports")

    def trial(rng: np.random.Generator, i: int):
        x = sys.sample(rng)
        c = sys.sample(rng)
        z = sys.sample(rng)
        lx = sys.lam(x)
        nx = sys.norm_v(x)
        g = sys.embed_w(lx)
        payload = {"x": x.tolist(), "c": c.tolist(), "index": i}
        try:
            sys.element(g)
        except ValidationError:
            return {"embedding": 1.0}, payload
        idem = sys.norm_w(sys.lam(g) - lx) / (1.0 + nx)
        y = sys.witness(c, lx)
        a = sys.transport(x, y)
        hit = sys.norm_v(a(x) - y) / (1.0 + nx)
        keeps = sys.norm_w(sys.lam(a(z)) - sys.lam(z)) / (1.0 + sys.norm_v(z))
        return {"idempotent": idem, "transport": hit, "automorphism": keeps}, payload

    return run_campaign(f"nds:{sys.name}", trial, n_samples, seed, tol, jobs)
