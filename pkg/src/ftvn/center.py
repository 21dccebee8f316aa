"""The center C = {x : lam(-x) = -lam(x)}, unit elements and V = C + C-perp."""
from __future__ import annotations

import numpy as np

from .core import DEFAULT_TOL, CheckReport, System, run_campaign, sample_rng
from .errors import UnsupportedError

N_PROBE = 32


def center_defect(sys: System, x) -> float:
    """||lam(-x) + lam(x)|| / (1 + ||x||); zero exactly on the center."""
    x = sys.element(x)
    return sys.norm_w(sys.lam(-x) + sys.lam(x)) / (1.0 + sys.norm_v(x))


def in_center(sys: System, x, tol: float = DEFAULT_TOL) -> bool:
    return center_defect(sys, x) <= tol


def orbit_singleton(sys: System, x, n_probe: int = N_PROBE, seed: int = 0, tol: float = DEFAULT_TOL) -> bool:
    """Probe the orbit of x with attainment witnesses against random directions.

    Returns True when every witness reproduces x. A central element is the
    only point of its orbit, so each maximizer must be x itself.
    """
    if sys.witness is None:
        raise UnsupportedError(f"{sys.name} has no witness to probe orbits with")
    x = sys.element(x)
    q = sys.lam(x)
    bound = tol * (1.0 + sys.norm_v(x))
    for i in range(n_probe):
        c = sys.sample(sample_rng(seed, i))
        if sys.norm_v(sys.witness(c, q) - x) > bound:
            return False
    return True


def unit_element(sys: System) -> np.ndarray | None:
    """The designated unit e (nonzero with C = R e), when the center is a line."""
    if sys.unit is None or sys.center.dim != 1:
        return None
    return np.array(sys.unit, dtype=float)


def center_projector(sys: System) -> np.ndarray:
    basis = sys.center.matrix(sys.dim_v)
    return basis @ basis.T


def decompose(sys: System, x) -> tuple[np.ndarray, np.ndarray]:
    """Split x into its center part and the orthogonal remainder."""
    if sys.center.kind == "custom" and not sys.center.basis:
        raise UnsupportedError(f"{sys.name} has no explicit center basis")
    x = sys.element(x)
    basis = sys.center.matrix(sys.dim_v)
    x_c = basis @ (basis.T @ x)
    return x_c, x - x_c


def _center_sample(sys: System, rng: np.random.Generator) -> np.ndarray:
    basis = sys.center.matrix(sys.dim_v)
    return basis @ rng.standard_normal(basis.shape[1])


def lineality_check(
    sys: System, n_samples: int = 1000, seed: int = 0, tol: float = DEFAULT_TOL, jobs: int = 1
) -> CheckReport:
    """lam(C) = lam(V) intersected with -lam(V), on mixed samples.

    Even-indexed samples are drawn from the analytic center (when it is
    nontrivial), odd ones are generic. A violation is recorded whenever
    membership of -lam(x) in the range and membership of x in the center
    disagree.
    """

    def trial(rng: np.random.Generator, i: int):
        if i % 2 == 0 and sys.center.dim > 0:
            x = _center_sample(sys, rng)
        else:
            x = sys.sample(rng)
        central = in_center(sys, x, tol)
        mirrored = sys.in_range(-sys.lam(x), tol)
        payload = {"x": x.tolist(), "in_center": central, "neg_spectrum_in_range": bool(mirrored), "index": i}
        return {"lineality": 0.0 if central == mirrored else 1.0}, payload

    return run_campaign(f"lineality:{sys.name}", trial, n_samples, seed, tol, jobs)
