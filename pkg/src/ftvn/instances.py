"""Catalog of concrete FTvN systems and counting-measure rearrangement helpers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import CenterDescriptor, LinearMap, System, center_kind
from .errors import ValidationError
from .numerics import desc_order, sort_desc, svd_values, sym_eigen

KINDS = (
    "rn-down",
    "rn-abs",
    "norm",
    "sym",
    "sing-val",
    "spin",
    "discrete",
    "twisted",
    "product",
    "finite-seq",
    "subspace-counterexample",
)

_ALIASES = {
    "rndown": "rn-down",
    "rnabs": "rn-abs",
    "normsystem": "norm",
    "singval": "sing-val",
    "finiteseq": "finite-seq",
    "subspacecounterexample": "subspace-counterexample",
    "subspace": "subspace-counterexample",
}


def canonical_kind(kind: str) -> str:
    k = kind.strip().lower()
    if k in KINDS:
        return k
    k = _ALIASES.get(k.replace("-", "").replace("_", ""), k)
    if k not in KINDS:
        raise ValidationError(f"unknown system kind {kind!r}; expected one of {', '.join(KINDS)}")
    return k


@dataclass(frozen=True)
class InstanceSpec:
    kind: str
    dim: int = 3
    isometry: np.ndarray | None = field(default=None, compare=False)
    inner: "InstanceSpec | None" = None
    parts: tuple["InstanceSpec", ...] = ()

    @classmethod
    def from_dict(cls, data: dict | str) -> "InstanceSpec":
        if isinstance(data, str):
            return cls(kind=canonical_kind(data))
        if not isinstance(data, dict) or "kind" not in data:
            raise ValidationError("system spec must be an object with a 'kind' field")
        kind = canonical_kind(str(data["kind"]))
        dim = data.get("dim", 3)
        if not isinstance(dim, int) or isinstance(dim, bool):
            raise ValidationError("'dim' must be an integer")
        iso = data.get("isometry")
        inner = data.get("inner")
        parts = data.get("parts", ())
        return cls(
            kind=kind,
            dim=dim,
            isometry=None if iso is None else np.array(iso, dtype=float),
            inner=None if inner is None else cls.from_dict(inner),
            parts=tuple(cls.from_dict(p) for p in parts),
        )

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind == "twisted":
            out["inner"] = self.inner.to_dict() if self.inner else None
        elif self.kind == "product":
            out["parts"] = [p.to_dict() for p in self.parts]
        elif self.kind != "subspace-counterexample":
            out["dim"] = self.dim
        if self.isometry is not None:
            out["isometry"] = np.asarray(self.isometry).tolist()
        return out


# -- shared helpers -----------------------------------------------------------


def _scale(q: np.ndarray) -> float:
    return 1.0 + (float(np.max(np.abs(q))) if q.size else 0.0)


def is_decreasing(q: np.ndarray, tol: float) -> bool:
    return bool(np.all(np.diff(q) <= tol * _scale(q)))


def is_nonneg_decreasing(q: np.ndarray, tol: float) -> bool:
    return is_decreasing(q, tol) and bool(np.all(q >= -tol * _scale(q)))


def abs_desc(v: np.ndarray) -> np.ndarray:
    return sort_desc(np.abs(v))


def _signs(v: np.ndarray) -> np.ndarray:
    return np.where(v < 0, -1.0, 1.0)


def permutation_matrix(perm: np.ndarray) -> np.ndarray:
    """Matrix sending e_i to e_perm[i]."""
    n = len(perm)
    p = np.zeros((n, n))
    p[perm, np.arange(n)] = 1.0
    return p


def haar_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


def householder_to(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Orthogonal reflection mapping a onto b (equal norms assumed)."""
    d = a - b
    nd = np.linalg.norm(d)
    n = len(a)
    if nd <= 1e-14 * (1.0 + np.linalg.norm(a)):
        return np.eye(n)
    w = d / nd
    return np.eye(n) - 2.0 * np.outer(w, w)


def block_diag(*blocks: np.ndarray) -> np.ndarray:
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size))
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i : i + k, i : i + k] = b
        i += k
    return out


def _unit_basis(n: int) -> tuple[np.ndarray, ...]:
    return tuple(np.eye(n)[i] for i in range(n))


# -- rearrangement (counting measure) -------------------------------------------


@dataclass(frozen=True)
class RearrangementResult:
    star: np.ndarray
    permutation: np.ndarray  # star[i] == |x[permutation[i]]| for the nonzero part


def distribution_function(x, alpha: float) -> int:
    """Number of entries with |x_i| > alpha."""
    if alpha < 0:
        raise ValidationError("alpha must be nonnegative")
    return int(np.count_nonzero(np.abs(np.asarray(x, dtype=float)) > alpha))


def decreasing_rearrangement(x) -> RearrangementResult:
    x = np.asarray(x, dtype=float)
    mags = np.abs(x)
    order = desc_order(mags)
    star = mags[order]
    k = int(np.count_nonzero(star))
    return RearrangementResult(star=star, permutation=order[:k])


# -- per-kind builders ---------------------------------------------------------


def _build_rn_down(spec: InstanceSpec) -> System:
    n = spec.dim

    def witness(c, q):
        x = np.empty(n)
        x[desc_order(c)] = q
        return x

    def transport(x, y):
        ox, oy = desc_order(x), desc_order(y)
        a = np.zeros((n, n))
        a[oy, ox] = 1.0
        return LinearMap(a, meta="permutation")

    return System(
        name=f"rn-down:{n}",
        dim_v=n,
        dim_w=n,
        lam=sort_desc,
        in_range=is_decreasing,
        sample=lambda rng: rng.standard_normal(n),
        center=CenterDescriptor((np.ones(n) / math.sqrt(n),), center_kind(1, n)),
        witness=witness,
        unit=np.ones(n),
        sample_automorphism=lambda rng: LinearMap(permutation_matrix(rng.permutation(n)), "permutation"),
        transport=transport,
        embed_w=lambda q: np.array(q, dtype=float),
        spec=spec,
    )


def _signed_permutation(rng: np.random.Generator, n: int) -> LinearMap:
    signs = rng.choice([-1.0, 1.0], size=n)
    return LinearMap(signs[:, None] * permutation_matrix(rng.permutation(n)), "signed permutation")


def _abs_transport(n: int):
    def transport(x, y):
        ox, oy = desc_order(np.abs(x)), desc_order(np.abs(y))
        a = np.zeros((n, n))
        a[oy, ox] = _signs(y[oy]) * _signs(x[ox])
        return LinearMap(a, meta="signed permutation")

    return transport


def _build_rn_abs(spec: InstanceSpec) -> System:
    n = spec.dim

    def witness(c, q):
        order = desc_order(np.abs(c))
        x = np.empty(n)
        x[order] = _signs(c[order]) * q
        return x

    return System(
        name=f"rn-abs:{n}",
        dim_v=n,
        dim_w=n,
        lam=abs_desc,
        in_range=is_nonneg_decreasing,
        sample=lambda rng: rng.standard_normal(n),
        center=CenterDescriptor((), "trivial"),
        witness=witness,
        sample_automorphism=lambda rng: _signed_permutation(rng, n),
        transport=_abs_transport(n),
        embed_w=lambda q: np.array(q, dtype=float),
        spec=spec,
    )


def _build_finite_seq(spec: InstanceSpec) -> System:
    n = spec.dim

    def witness(c, q):
        # nonzero entries of c, by decreasing magnitude, receive q_1..q_k
        # with c's signs; the rest of q fills the zero slots in index order
        r = decreasing_rearrangement(c)
        support = r.permutation
        k = len(support)
        x = np.zeros(n)
        x[support] = _signs(c[support]) * q[:k]
        zeros = np.flatnonzero(c == 0)
        x[zeros] = q[k:]
        return x

    def sample(rng):
        x = rng.standard_normal(n)
        x[rng.random(n) < 0.25] = 0.0
        return x

    return System(
        name=f"finite-seq:{n}",
        dim_v=n,
        dim_w=n,
        lam=lambda x: decreasing_rearrangement(x).star,
        in_range=is_nonneg_decreasing,
        sample=sample,
        center=CenterDescriptor((), "trivial"),
        witness=witness,
        sample_automorphism=lambda rng: _signed_permutation(rng, n),
        transport=_abs_transport(n),
        embed_w=lambda q: np.array(q, dtype=float),
        spec=spec,
    )


def _build_norm(spec: InstanceSpec) -> System:
    n = spec.dim

    def witness(c, q):
        nc = np.linalg.norm(c)
        if nc == 0.0:
            x = np.zeros(n)
            x[0] = q[0]
            return x
        return q[0] * c / nc

    def transport(x, y):
        return LinearMap(householder_to(x, y), meta="orthogonal")

    def embed(q):
        x = np.zeros(n)
        x[0] = q[0]
        return x

    return System(
        name=f"norm:{n}",
        dim_v=n,
        dim_w=1,
        lam=lambda x: np.array([np.linalg.norm(x)]),
        in_range=lambda q, tol: bool(q[0] >= -tol),
        sample=lambda rng: rng.standard_normal(n),
        center=CenterDescriptor((), "trivial"),
        witness=witness,
        sample_automorphism=lambda rng: LinearMap(haar_orthogonal(rng, n), "orthogonal"),
        transport=transport,
        embed_w=embed,
        spec=spec,
    )


def _symmetric_check(n: int):
    def check(x):
        m = x.reshape(n, n)
        if np.max(np.abs(m - m.T)) > 1e-12 * (1.0 + np.max(np.abs(m))):
            raise ValidationError("element is not a symmetric matrix")

    return check


def _build_sym(spec: InstanceSpec) -> System:
    n = spec.dim

    def lam(x):
        return sym_eigen(x.reshape(n, n)).values

    def witness(c, q):
        f = sym_eigen(c.reshape(n, n)).frame
        return ((f * q) @ f.T).reshape(-1)

    def sample(rng):
        g = rng.standard_normal((n, n))
        return (0.5 * (g + g.T)).reshape(-1)

    def conj(rng):
        q = haar_orthogonal(rng, n)
        return LinearMap(np.kron(q, q), meta="conjugation")

    def transport(x, y):
        fx = sym_eigen(x.reshape(n, n)).frame
        fy = sym_eigen(y.reshape(n, n)).frame
        q = fy @ fx.T
        return LinearMap(np.kron(q, q), meta="conjugation")

    eye = np.eye(n).reshape(-1)
    return System(
        name=f"sym:{n}",
        dim_v=n * n,
        dim_w=n,
        lam=lam,
        in_range=is_decreasing,
        sample=sample,
        center=CenterDescriptor((eye / math.sqrt(n),), "line"),
        witness=witness,
        check_element=_symmetric_check(n),
        unit=eye,
        sample_automorphism=conj,
        transport=transport,
        embed_w=lambda q: np.diag(q).reshape(-1),
        spec=spec,
    )


def _build_sing_val(spec: InstanceSpec) -> System:
    n = spec.dim

    def lam(x):
        return svd_values(x.reshape(n, n)).values

    def witness(c, q):
        s = svd_values(c.reshape(n, n))
        return ((s.left * q) @ s.right.T).reshape(-1)

    def sampler(rng):
        return LinearMap(np.kron(haar_orthogonal(rng, n), haar_orthogonal(rng, n)), "composite")

    def transport(x, y):
        sx = svd_values(x.reshape(n, n))
        sy = svd_values(y.reshape(n, n))
        # Y = (Uy Ux^T) X (Vx Vy^T); row-major vec(A X B) = (A kron B^T) vec(X)
        return LinearMap(np.kron(sy.left @ sx.left.T, sy.right @ sx.right.T), meta="composite")

    return System(
        name=f"sing-val:{n}",
        dim_v=n * n,
        dim_w=n,
        lam=lam,
        in_range=is_nonneg_decreasing,
        sample=lambda rng: rng.standard_normal(n * n),
        center=CenterDescriptor((), "trivial"),
        witness=witness,
        sample_automorphism=sampler,
        transport=transport,
        embed_w=lambda q: np.diag(q).reshape(-1),
        spec=spec,
    )


SQRT2 = math.sqrt(2.0)


def spin_lam(x: np.ndarray) -> np.ndarray:
    t, nv = x[0], float(np.linalg.norm(x[1:]))
    return np.array([t + nv, t - nv]) / SQRT2


def _build_spin(spec: InstanceSpec) -> System:
    m = spec.dim
    dim_v = m + 1

    def witness(c, q):
        t = (q[0] + q[1]) / SQRT2
        r = (q[0] - q[1]) / SQRT2
        vc = c[1:]
        nvc = np.linalg.norm(vc)
        direction = vc / nvc if nvc > 0 else np.eye(m)[0]
        return np.concatenate([[t], r * direction])

    def sampler(rng):
        return LinearMap(block_diag(np.eye(1), haar_orthogonal(rng, m)), "orthogonal")

    def transport(x, y):
        return LinearMap(block_diag(np.eye(1), householder_to(x[1:], y[1:])), "orthogonal")

    def embed(q):
        x = np.zeros(dim_v)
        x[0] = (q[0] + q[1]) / SQRT2
        x[1] = (q[0] - q[1]) / SQRT2
        return x

    e = np.eye(dim_v)[0]
    return System(
        name=f"spin:{m}",
        dim_v=dim_v,
        dim_w=2,
        lam=spin_lam,
        in_range=lambda q, tol: bool(q[0] - q[1] >= -tol * _scale(q)),
        sample=lambda rng: rng.standard_normal(dim_v),
        center=CenterDescriptor((e,), "line"),
        witness=witness,
        unit=e,
        sample_automorphism=sampler,
        transport=transport,
        embed_w=embed,
        spec=spec,
    )


def _build_discrete(spec: InstanceSpec) -> System:
    n = spec.dim
    s = np.eye(n) if spec.isometry is None else np.array(spec.isometry, dtype=float)
    if s.shape != (n, n):
        raise ValidationError(f"isometry must be {n}x{n}, got {s.shape}")
    if np.max(np.abs(s.T @ s - np.eye(n))) > 1e-10:
        raise ValidationError("isometry is not orthogonal")

    def transport(x, y):
        return LinearMap(np.eye(n), meta="identity")

    return System(
        name=f"discrete:{n}",
        dim_v=n,
        dim_w=n,
        lam=lambda x: s @ x,
        in_range=lambda q, tol: True,
        sample=lambda rng: rng.standard_normal(n),
        center=CenterDescriptor(_unit_basis(n), center_kind(n, n)),
        witness=lambda c, q: s.T @ q,
        unit=np.ones(1) if n == 1 else None,
        sample_automorphism=lambda rng: LinearMap(np.eye(n), "identity"),
        transport=transport,
        embed_w=lambda q: np.array(q, dtype=float),
        spec=spec,
    )


def _build_twisted(spec: InstanceSpec) -> System:
    if spec.inner is None:
        raise ValidationError("twisted system needs an inner spec")
    base = make_system(spec.inner)
    if base.witness is None:
        raise ValidationError("twisted system needs an inner system with a witness")

    def transport(x, y):
        return base.transport(-x, -y)

    return System(
        name=f"twisted({base.name})",
        dim_v=base.dim_v,
        dim_w=base.dim_w,
        lam=lambda x: -base.lam(-x),
        in_range=lambda q, tol: base.in_range(-q, tol),
        sample=base.sample,
        center=base.center,
        witness=lambda c, q: -base.witness(-c, -q),
        check_element=base.check_element,
        unit=base.unit,
        sample_automorphism=base.sample_automorphism,
        transport=None if base.transport is None else transport,
        embed_w=base.embed_w,
        spec=spec,
    )


def _build_product(spec: InstanceSpec) -> System:
    if len(spec.parts) < 1:
        raise ValidationError("product system needs at least one part")
    parts = [make_system(p) for p in spec.parts]
    dv = np.cumsum([0] + [p.dim_v for p in parts])
    dw = np.cumsum([0] + [p.dim_w for p in parts])
    dim_v, dim_w = int(dv[-1]), int(dw[-1])

    def split_v(x):
        return [x[dv[i] : dv[i + 1]] for i in range(len(parts))]

    def split_w(q):
        return [q[dw[i] : dw[i + 1]] for i in range(len(parts))]

    def check(x):
        for p, xi in zip(parts, split_v(x)):
            if p.check_element is not None:
                p.check_element(xi)

    basis = []
    for i, p in enumerate(parts):
        for b in p.center.basis:
            v = np.zeros(dim_v)
            v[dv[i] : dv[i + 1]] = b
            basis.append(v)

    has = lambda attr: all(getattr(p, attr) is not None for p in parts)  # noqa: E731

    def witness(c, q):
        return np.concatenate([p.witness(ci, qi) for p, ci, qi in zip(parts, split_v(c), split_w(q))])

    def sampler(rng):
        return LinearMap(block_diag(*[p.sample_automorphism(rng).matrix for p in parts]), "composite")

    def transport(x, y):
        blocks = [p.transport(xi, yi).matrix for p, xi, yi in zip(parts, split_v(x), split_v(y))]
        return LinearMap(block_diag(*blocks), "composite")

    def embed(q):
        return np.concatenate([p.embed_w(qi) for p, qi in zip(parts, split_w(q))])

    return System(
        name="product(" + ",".join(p.name for p in parts) + ")",
        dim_v=dim_v,
        dim_w=dim_w,
        lam=lambda x: np.concatenate([p.lam(xi) for p, xi in zip(parts, split_v(x))]),
        in_range=lambda q, tol: all(p.in_range(qi, tol) for p, qi in zip(parts, split_w(q))),
        sample=lambda rng: np.concatenate([p.sample(rng) for p in parts]),
        center=CenterDescriptor(tuple(basis), center_kind(len(basis), dim_v)),
        witness=witness if has("witness") else None,
        check_element=check,
        sample_automorphism=sampler if has("sample_automorphism") else None,
        transport=transport if has("transport") else None,
        embed_w=embed if has("embed_w") and dim_w <= dim_v else None,
        spec=spec,
    )


# -- the subspace counterexample -------------------------------------------------


@dataclass(frozen=True)
class SubspaceScenario:
    """R^3 with decreasing rearrangement, restricted to span{(1,1,1), (3,1,0)}.

    The spectral map still satisfies norm preservation and the max
    inequality on this plane, but attainment fails for the designated
    triple ``c``, ``u``, ``q``.
    """

    ones: np.ndarray = field(default_factory=lambda: np.ones(3))
    direction: np.ndarray = field(default_factory=lambda: np.array([3.0, 1.0, 0.0]))
    reflected: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 3.0]))
    c: np.ndarray = field(default_factory=lambda: np.array([3.0, 1.0, 0.0]))
    u: np.ndarray = field(default_factory=lambda: np.array([-3.0, -1.0, 0.0]))
    q: np.ndarray = field(default_factory=lambda: np.array([0.0, -1.0, -3.0]))

    @property
    def basis(self) -> np.ndarray:
        return np.column_stack([self.ones, self.direction])

    def element(self, alpha: float, beta: float) -> np.ndarray:
        return alpha * self.ones + beta * self.direction

    def params(self, x) -> tuple[float, float, float]:
        """(alpha, beta, residual) of the least-squares fit of x in the plane."""
        x = np.asarray(x, dtype=float)
        sol = np.linalg.lstsq(self.basis, x, rcond=None)[0]
        res = float(np.linalg.norm(self.basis @ sol - x))
        return float(sol[0]), float(sol[1]), res

    def lam_params(self, alpha: float, beta: float) -> np.ndarray:
        if beta >= 0:
            return self.element(alpha, beta)
        return alpha * self.ones + beta * self.reflected

    def lam(self, x) -> np.ndarray:
        alpha, beta, _ = self.params(x)
        return self.lam_params(alpha, beta)

    def preimages(self, q, tol: float = 1e-9) -> list[np.ndarray]:
        """Every x in the plane with lam(x) = q, from both branches of the formula."""
        q = np.asarray(q, dtype=float)
        out: list[np.ndarray] = []
        scale = 1.0 + float(np.linalg.norm(q))
        for second in (self.direction, self.reflected):
            b = np.column_stack([self.ones, second])
            sol = np.linalg.lstsq(b, q, rcond=None)[0]
            if np.linalg.norm(b @ sol - q) > tol * scale:
                continue
            x = self.element(sol[0], sol[1])
            if np.linalg.norm(self.lam(x) - q) <= tol * scale:
                if not any(np.linalg.norm(x - y) <= tol * scale for y in out):
                    out.append(x)
        return out

    def a3_search(self, c, q) -> tuple[np.ndarray | None, float]:
        """Best attainable <c, x> over the orbit of q; returns (x, gap)."""
        target = float(sort_desc(c) @ q)
        best, gap = None, math.inf
        for x in self.preimages(q):
            g = target - float(np.asarray(c) @ x)
            if g < gap:
                best, gap = x, g
        return best, gap


def subspace_counterexample() -> SubspaceScenario:
    return SubspaceScenario()


def _build_subspace(spec: InstanceSpec) -> System:
    sc = SubspaceScenario()

    def check(x):
        _, _, res = sc.params(x)
        if res > 1e-9 * (1.0 + np.linalg.norm(x)):
            raise ValidationError("element is not in span{(1,1,1), (3,1,0)}")

    def sample(rng):
        a, b = rng.standard_normal(2)
        return sc.element(a, b)

    return System(
        name="subspace-counterexample",
        dim_v=3,
        dim_w=3,
        lam=sort_desc,
        in_range=lambda q, tol: bool(sc.preimages(q, max(tol, 1e-12))),
        sample=sample,
        center=CenterDescriptor((np.ones(3) / math.sqrt(3),), "line"),
        check_element=check,
        unit=np.ones(3),
        sample_automorphism=lambda rng: LinearMap(np.eye(3), "identity"),
        a3_search=sc.a3_search,
        probes=((sc.c, sc.u),),
        spec=spec,
    )


_BUILDERS = {
    "rn-down": _build_rn_down,
    "rn-abs": _build_rn_abs,
    "norm": _build_norm,
    "sym": _build_sym,
    "sing-val": _build_sing_val,
    "spin": _build_spin,
    "discrete": _build_discrete,
    "twisted": _build_twisted,
    "product": _build_product,
    "finite-seq": _build_finite_seq,
    "subspace-counterexample": _build_subspace,
}


def make_system(spec: InstanceSpec | dict | str) -> System:
    """Build a :class:`System` from an instance spec (or its dict/name form)."""
    if not isinstance(spec, InstanceSpec):
        spec = InstanceSpec.from_dict(spec)
    kind = canonical_kind(spec.kind)
    if kind not in ("twisted", "product", "subspace-counterexample"):
        if not isinstance(spec.dim, int) or spec.dim < 1:
            raise ValidationError(f"dimension must be a positive integer, got {spec.dim!r}")
    return _BUILDERS[kind](spec)


def system(kind: str, dim: int = 3, **kwargs) -> System:
    """Shorthand: ``system("sym", 4)``, ``system("twisted", inner=...)``."""
    inner = kwargs.pop("inner", None)
    parts = kwargs.pop("parts", ())
    to_spec = lambda s: s if isinstance(s, InstanceSpec) else InstanceSpec.from_dict(s)  # noqa: E731
    return make_system(
        InstanceSpec(
            kind=canonical_kind(kind),
            dim=dim,
            isometry=kwargs.pop("isometry", None),
            inner=None if inner is None else to_spec(inner),
            parts=tuple(to_spec(p) for p in parts),
        )
    )
