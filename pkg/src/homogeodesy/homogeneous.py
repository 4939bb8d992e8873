"""Reductive decompositions and origin geometry.

Everything is computed at the origin in the m-basis: projections are index
masks (the Gram is block-diagonal across k + m), the canonical-connection
operators come straight from the structure tensor, and sectional curvature is
evaluated from bracket norms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType

import numpy as np
import scipy.linalg

from .algebra import AlgebraElement, StructuredAlgebra

VALIDATION_TOL = 1e-10
PLANE_TOL = 1e-14
RANK_ONE_THRESHOLD = 1e-6


class GeometryError(RuntimeError):
    pass


class MissingSplit(GeometryError):
    """An m0/m1 part was requested on a space without the fibration split."""


class DegeneratePlane(GeometryError):
    """The two vectors do not span a plane."""


class NoWitness(GeometryError):
    """No registered transitivity witness and random search found none."""


PARTS = ("K", "M", "M0", "M1")


@dataclass(frozen=True)
class ReductiveSpace:
    """A structured algebra with the index partition g = k + m (+ m0/m1)."""

    algebra: StructuredAlgebra
    k_indices: tuple[int, ...]
    m_indices: tuple[int, ...]
    m0_indices: tuple[int, ...] | None = None
    m1_indices: tuple[int, ...] | None = None
    name: str = "space"
    params: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))
    witnesses: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))
    base_reference: object = None

    def __post_init__(self):
        if isinstance(self.params, dict):
            object.__setattr__(self, "params", MappingProxyType(dict(self.params)))
        if isinstance(self.witnesses, dict):
            object.__setattr__(self, "witnesses", MappingProxyType(dict(self.witnesses)))
        covered = sorted(self.k_indices + self.m_indices)
        if covered != list(range(self.algebra.dim)):
            raise ValueError("k and m indices must partition the basis")
        if (self.m0_indices is None) != (self.m1_indices is None):
            raise ValueError("m0 and m1 must be given together")
        if self.m0_indices is not None:
            if sorted(self.m0_indices + self.m1_indices) != sorted(self.m_indices):
                raise ValueError("m0 and m1 must partition m")

    # -- index helpers ----------------------------------------------------

    def part_indices(self, part: str) -> np.ndarray:
        part = part.upper()
        if part == "K":
            return np.asarray(self.k_indices, dtype=int)
        if part == "M":
            return np.asarray(self.m_indices, dtype=int)
        if part in ("M0", "M1"):
            idx = self.m0_indices if part == "M0" else self.m1_indices
            if idx is None:
                raise MissingSplit(f"{self.name} has no m0/m1 split")
            return np.asarray(idx, dtype=int)
        raise ValueError(f"unknown part {part!r}")

    @property
    def dim_m(self) -> int:
        return len(self.m_indices)

    @cached_property
    def gram_m(self) -> np.ndarray:
        idx = self.part_indices("M")
        return self.algebra.gram[np.ix_(idx, idx)]

    @cached_property
    def chol_m(self) -> np.ndarray:
        """Lower Cholesky factor L of the m-Gram; x_on = L^T x_basis."""
        return np.linalg.cholesky(self.gram_m)

    @cached_property
    def gram_k(self) -> np.ndarray:
        idx = self.part_indices("K")
        return self.algebra.gram[np.ix_(idx, idx)]

    @cached_property
    def chol_k(self) -> np.ndarray:
        if len(self.k_indices) == 0:
            return np.zeros((0, 0))
        return np.linalg.cholesky(self.gram_k)

    # -- elements ---------------------------------------------------------

    def element(self, coeffs) -> AlgebraElement:
        return self.algebra.element(coeffs)

    def basis_vector(self, label: str) -> np.ndarray:
        coeffs = np.zeros(self.algebra.dim)
        coeffs[self.algebra.index(label)] = 1.0
        return coeffs

    def unit(self, coeffs) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=float)
        n = self.algebra.norm(coeffs)
        if n < 1e-14:
            raise ValueError("cannot normalize the zero vector")
        return coeffs / n

    def random_unit_m(self, rng, size: int | None = None) -> np.ndarray:
        """Random g-unit vectors supported on m (ON-frame Gaussians)."""
        idx = self.part_indices("M")
        n = len(idx)
        k = size or 1
        xi = rng.standard_normal((k, n))
        xi /= np.linalg.norm(xi, axis=1, keepdims=True)
        basis_coords = np.linalg.solve(self.chol_m.T, xi.T).T
        out = np.zeros((k, self.algebra.dim))
        out[:, idx] = basis_coords
        return out if size is not None else out[0]

    # -- validation ------------------------------------------------------

    def validate(self, tol: float = VALIDATION_TOL) -> "SpaceValidation":
        c = self.algebra.structure
        g = self.algebra.gram
        k = self.part_indices("K")
        m = self.part_indices("M")
        sub = float(np.max(np.abs(c[np.ix_(k, k, m)]))) if len(k) else 0.0
        red = float(np.max(np.abs(c[np.ix_(k, m, k)]))) if len(k) else 0.0
        blockdiag = float(np.max(np.abs(g[np.ix_(k, m)]))) if len(k) else 0.0
        split = 0.0
        if self.m0_indices is not None and len(k):
            m0 = self.part_indices("M0")
            m1 = self.part_indices("M1")
            split = max(
                float(np.max(np.abs(c[np.ix_(k, m0, m1)]))) if len(m0) else 0.0,
                float(np.max(np.abs(c[np.ix_(k, m1, m0)]))) if len(m1) else 0.0,
            )
        return SpaceValidation(
            space=self.name,
            k_subalgebra=sub,
            reductivity=red,
            split_invariance=split,
            gram_block_diagonal=blockdiag,
            tol=tol,
        )


@dataclass(frozen=True)
class SpaceValidation:
    space: str
    k_subalgebra: float
    reductivity: float
    split_invariance: float
    gram_block_diagonal: float
    tol: float

    @property
    def passed(self) -> bool:
        return (
            max(
                self.k_subalgebra,
                self.reductivity,
                self.split_invariance,
                self.gram_block_diagonal,
            )
            <= self.tol
        )

    def to_dict(self) -> dict:
        return {
            "check": "reductive-structure",
            "space": self.space,
            "pass": self.passed,
            "residuals": {
                "k_subalgebra": self.k_subalgebra,
                "reductivity": self.reductivity,
                "split_invariance": self.split_invariance,
                "gram_block_diagonal": self.gram_block_diagonal,
            },
        }


@dataclass(frozen=True)
class PlaneSpec:
    """An (x, y) pair of m-vectors spanning a tangent 2-plane."""

    x: np.ndarray
    y: np.ndarray


# -- operations ------------------------------------------------------------


def _coeffs(x) -> np.ndarray:
    return x.coeffs if isinstance(x, AlgebraElement) else np.asarray(x, dtype=float)


def project(space: ReductiveSpace, x, part: str) -> np.ndarray:
    """Orthogonal projection onto an indexed subspace (coordinate masking)."""
    coeffs = _coeffs(x)
    idx = space.part_indices(part)
    out = np.zeros_like(coeffs)
    out[idx] = coeffs[idx]
    return out


def torsion_op(space: ReductiveSpace, u) -> np.ndarray:
    """Matrix of x -> -[u, x]_m on the m-basis coordinates."""
    ad = space.algebra.ad(_coeffs(u))
    m = space.part_indices("M")
    return -ad[np.ix_(m, m)]


def jacobi_op(space: ReductiveSpace, u) -> np.ndarray:
    """Matrix of x -> [[u, x]_k, u] on the m-basis coordinates."""
    ad = space.algebra.ad(_coeffs(u))
    k = space.part_indices("K")
    m = space.part_indices("M")
    if len(k) == 0:
        return np.zeros((len(m), len(m)))
    return -ad[np.ix_(m, k)] @ ad[np.ix_(k, m)]


def sectional_curvature(space: ReductiveSpace, x, y, mode: str = "normal") -> float:
    """Sectional curvature of span{x, y} from bracket norms.

    normal mode:              (|[x,y]_k|^2 + |[x,y]_m|^2 / 4) / area^2
    naturally_reductive mode: (<[[x,y]_k, x]_m, y> + |[x,y]_m|^2 / 4) / area^2
    """
    xc, yc = _coeffs(x), _coeffs(y)
    alg = space.algebra
    area2 = alg.inner(xc, xc) * alg.inner(yc, yc) - alg.inner(xc, yc) ** 2
    if area2 < PLANE_TOL:
        raise DegeneratePlane(f"plane area^2 = {area2:.2e}")
    b = np.einsum("i,j,ijk->k", xc, yc, alg.structure)
    bk = project(space, b, "K")
    bm = project(space, b, "M")
    quarter = 0.25 * alg.inner(bm, bm)
    if mode == "normal":
        num = alg.inner(bk, bk) + quarter
    elif mode == "naturally_reductive":
        adbk_x = np.einsum("i,j,ijk->k", bk, xc, alg.structure)
        num = alg.inner(project(space, adbk_x, "M"), yc) + quarter
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return float(num / area2)


def curvature_batch(space: ReductiveSpace, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Normal-mode curvature for batches of full coefficient vectors."""
    alg = space.algebra
    g = alg.gram
    b = np.einsum("ni,nj,ijk->nk", xs, ys, alg.structure)
    k = space.part_indices("K")
    m = space.part_indices("M")
    bk = b[:, k]
    bm = b[:, m]
    nk = np.einsum("na,ab,nb->n", bk, g[np.ix_(k, k)], bk) if len(k) else 0.0
    nm = np.einsum("na,ab,nb->n", bm, g[np.ix_(m, m)], bm)
    gx = xs @ g
    area2 = (
        np.einsum("ni,ni->n", gx, xs) * np.einsum("ni,ni->n", ys @ g, ys)
        - np.einsum("ni,ni->n", gx, ys) ** 2
    )
    return (nk + 0.25 * nm) / area2


@dataclass(frozen=True)
class LtsReport:
    space: str
    dim: int
    m_closure: float
    k_action: float
    subalgebra_closure: float
    tol: float

    @property
    def is_lts(self) -> bool:
        return max(self.m_closure, self.k_action) <= self.tol

    @property
    def closes_subalgebra(self) -> bool:
        return self.subalgebra_closure <= self.tol

    def to_dict(self) -> dict:
        return {
            "check": "lie-triple-system",
            "space": self.space,
            "dim": self.dim,
            "pass": self.is_lts and self.closes_subalgebra,
            "residuals": {
                "m_closure": self.m_closure,
                "k_action": self.k_action,
                "subalgebra_closure": self.subalgebra_closure,
            },
        }


def _span_residual(vectors: np.ndarray, gram: np.ndarray, tested: np.ndarray) -> float:
    """Max gram-norm of the components of ``tested`` orthogonal to the span."""
    if tested.size == 0:
        return 0.0
    l = np.linalg.cholesky(gram)
    on_tested = tested @ l
    if vectors.size == 0:
        return float(np.max(np.linalg.norm(on_tested, axis=1)))
    # SVD rank truncation: the tested sets are typically rank-deficient
    u, sv, _ = np.linalg.svd((vectors @ l).T, full_matrices=False)
    rank = int(np.sum(sv > 1e-10 * max(sv[0], 1e-300)))
    q = u[:, :rank]
    resid = on_tested.T - q @ (q.T @ on_tested.T)
    return float(np.max(np.linalg.norm(resid, axis=0)))


def lts_check(space: ReductiveSpace, vectors, tol: float = VALIDATION_TOL) -> LtsReport:
    """Verify nu is a Lie triple system and that nu + [nu,nu]_k closes."""
    vs = np.array([_coeffs(v) for v in vectors], dtype=float)
    alg = space.algebra
    c = alg.structure
    pairs = np.einsum("ai,bj,ijk->abk", vs, vs, c).reshape(-1, alg.dim)
    pairs_m = np.array([project(space, p, "M") for p in pairs])
    pairs_k = np.array([project(space, p, "K") for p in pairs])
    m_closure = _span_residual(vs, alg.gram, pairs_m)
    triple = np.einsum("pi,aj,ijk->pak", pairs_k, vs, c).reshape(-1, alg.dim)
    k_action = _span_residual(vs, alg.gram, triple)

    span = np.vstack([vs, pairs_k])
    sub = np.einsum("ai,bj,ijk->abk", span, span, c).reshape(-1, alg.dim)
    subalgebra_closure = _span_residual(span, alg.gram, sub)
    return LtsReport(
        space=space.name,
        dim=int(np.linalg.matrix_rank(vs, tol=1e-10)),
        m_closure=m_closure,
        k_action=k_action,
        subalgebra_closure=subalgebra_closure,
        tol=tol,
    )


@dataclass(frozen=True)
class RankOneReport:
    space: str
    min_bracket_sq: float
    passed: bool
    argmin: PlaneSpec
    multistarts: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "check": "rank-one",
            "space": self.space,
            "pass": self.passed,
            "min_bracket_sq": self.min_bracket_sq,
            "multistarts": self.multistarts,
            "seed": self.seed,
        }


def _orthonormalize_pairs(space: ReductiveSpace, xs: np.ndarray, ys: np.ndarray):
    g = space.algebra.gram
    xs = xs / np.sqrt(np.einsum("ni,ij,nj->n", xs, g, xs))[:, None]
    ys = ys - np.einsum("ni,ij,nj->n", ys, g, xs)[:, None] * xs
    ys = ys / np.sqrt(np.einsum("ni,ij,nj->n", ys, g, ys))[:, None]
    return xs, ys


def rank_one_check(
    space: ReductiveSpace,
    multistarts: int = 64,
    seed: int = 0,
    iterations: int = 300,
    threshold: float = RANK_ONE_THRESHOLD,
) -> RankOneReport:
    """Minimize |[x,y]|^2 over g-orthonormal pairs in m by projected gradient."""
    rng = np.random.default_rng(seed)
    alg = space.algebra
    g = alg.gram
    c = alg.structure
    m = space.part_indices("M")
    c_mm = c[np.ix_(m, m, np.arange(alg.dim))]

    xs = space.random_unit_m(rng, multistarts)
    ys = space.random_unit_m(rng, multistarts)
    xs, ys = _orthonormalize_pairs(space, xs, ys)

    def value(xs, ys):
        b = np.einsum("ni,nj,ijk->nk", xs[:, m], ys[:, m], c_mm)
        return np.einsum("nk,kl,nl->n", b, g, b)

    step = np.full(multistarts, 0.1)
    f = value(xs, ys)
    for _ in range(iterations):
        b = np.einsum("ni,nj,ijk->nk", xs[:, m], ys[:, m], c_mm)
        gb = b @ g
        grad_x = 2.0 * np.einsum("ijk,nj,nk->ni", c_mm, ys[:, m], gb)
        grad_y = 2.0 * np.einsum("ijk,ni,nk->nj", c_mm, xs[:, m], gb)
        gnorm = np.sqrt(np.sum(grad_x**2, axis=1) + np.sum(grad_y**2, axis=1)) + 1e-30
        nx, ny = np.zeros_like(xs), np.zeros_like(ys)
        nx[:, m] = xs[:, m] - (step / gnorm)[:, None] * grad_x
        ny[:, m] = ys[:, m] - (step / gnorm)[:, None] * grad_y
        nx, ny = _orthonormalize_pairs(space, nx, ny)
        nf = value(nx, ny)
        better = nf < f
        xs[better], ys[better], f[better] = nx[better], ny[better], nf[better]
        step = np.where(better, np.minimum(step * 1.2, 0.5), step * 0.5)
        if np.all(step < 1e-12):
            break

    best = int(np.argmin(f))
    return RankOneReport(
        space=space.name,
        min_bracket_sq=float(f[best]),
        passed=bool(f[best] > threshold),
        argmin=PlaneSpec(xs[best].copy(), ys[best].copy()),
        multistarts=multistarts,
        seed=seed,
    )


@dataclass(frozen=True)
class TransitivityReport:
    space: str
    part: str
    witness: str | None
    kernel_dim: int
    transitive: bool

    def to_dict(self) -> dict:
        return {
            "check": "isotropy-transitivity",
            "space": self.space,
            "part": self.part,
            "witness": self.witness,
            "kernel_dim": self.kernel_dim,
            "transitive": self.transitive,
        }


def _kernel_dim_of_witness(space: ReductiveSpace, u: np.ndarray, part_idx: np.ndarray) -> int:
    """Kernel dimension of v -> [u, v]_k restricted to the given part of m."""
    ad = space.algebra.ad(u)
    k = space.part_indices("K")
    mat = ad[np.ix_(k, part_idx)] if len(k) else np.zeros((0, len(part_idx)))
    if mat.shape[0] == 0:
        return len(part_idx)
    sv = np.linalg.svd(mat, compute_uv=False)
    cutoff = 1e-10 * max(1.0, sv[0] if len(sv) else 1.0)
    rank = int(np.sum(sv > cutoff))
    return len(part_idx) - rank


def isotropy_transitivity_check(space: ReductiveSpace, part: str) -> TransitivityReport:
    """Transitivity of the linear isotropy action on the unit sphere of a part.

    Uses the registered witness direction when available (the kernel of
    v -> [u,v]_k must be exactly span(u)); otherwise searches random witnesses
    and raises NoWitness when none certifies transitivity.
    """
    part = part.upper()
    part_idx = space.part_indices(part)
    label = space.witnesses.get(part)
    if label is not None:
        u = space.basis_vector(label)
        kdim = _kernel_dim_of_witness(space, u, part_idx)
        return TransitivityReport(
            space=space.name,
            part=part,
            witness=label,
            kernel_dim=kdim,
            transitive=bool(kdim == 1),
        )
    rng = np.random.default_rng(0)
    for _ in range(50):
        u = np.zeros(space.algebra.dim)
        u[part_idx] = rng.standard_normal(len(part_idx))
        u = space.unit(u)
        kdim = _kernel_dim_of_witness(space, u, part_idx)
        if kdim == 1:
            return TransitivityReport(
                space=space.name,
                part=part,
                witness=None,
                kernel_dim=1,
                transitive=True,
            )
    raise NoWitness(f"no transitivity witness registered or found for {space.name}/{part}")


def ad_orbit_direction(space: ReductiveSpace, z, u, t: float) -> np.ndarray:
    """exp(t ad_z) u computed by matrix exponential of ad_z restricted to m."""
    zc, uc = _coeffs(z), _coeffs(u)
    m = space.part_indices("M")
    ad_m = space.algebra.ad(zc)[np.ix_(m, m)]
    rotated = scipy.linalg.expm(t * ad_m) @ uc[m]
    out = np.zeros_like(uc)
    out[m] = rotated
    return out
