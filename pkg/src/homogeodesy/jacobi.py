"""The canonical Jacobi equation as a constant-coefficient linear system.

Along gamma_u the Jacobi fields vanishing at the origin are encoded by the
n x n block J(t) mapping X'(0) to X(t); J(t) is read off the matrix
exponential of the 2n x 2n companion matrix of X'' - T X' + R X = 0.
Conjugate times are the zeros of det J(t), located by scanning the smallest
singular value on a grid and refining each dip by golden-section search.

All operators here act in a gram-orthonormal frame of m, so kernels, ranks
and orthogonal complements use plain Euclidean geometry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
import scipy.linalg

from .homogeneous import ReductiveSpace, jacobi_op, torsion_op

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
T_TOL = 1e-10
DEDUP_TOL = 1e-8
MULTIPLICITY_RTOL = 1e-7
RANK_TOL = 1e-8


class JacobiError(RuntimeError):
    pass


class ZeroVector(JacobiError):
    pass


class StepTooCoarse(JacobiError):
    """The scan step risks hopping over a zero of det J(t)."""


class BadAngle(JacobiError):
    pass


class BadAux(JacobiError):
    pass


@dataclass(frozen=True)
class JacobiSystem:
    """T, R and the companion matrix for a unit direction u, in an ON frame of m."""

    space: ReductiveSpace
    u: np.ndarray
    T: np.ndarray
    R: np.ndarray
    companion: np.ndarray

    @property
    def n(self) -> int:
        return self.T.shape[0]

    @cached_property
    def _chol_m(self) -> np.ndarray:
        return self.space.chol_m

    def to_on_frame(self, coeffs_m: np.ndarray) -> np.ndarray:
        return self._chol_m.T @ coeffs_m

    def from_on_frame(self, xi: np.ndarray) -> np.ndarray:
        return scipy.linalg.solve_triangular(self._chol_m.T, xi, lower=False)

    def embed_m(self, coeffs_m: np.ndarray) -> np.ndarray:
        out = np.zeros(self.space.algebra.dim)
        out[self.space.part_indices("M")] = coeffs_m
        return out


@dataclass(frozen=True)
class ConjugateEvent:
    """A conjugate time with its kernel of initial derivatives X'(0)."""

    t: float
    multiplicity: int
    kernel: np.ndarray  # (multiplicity, algebra dim) coefficient vectors
    isotropic_exists: bool | None = None
    strictly_isotropic: bool | None = None

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("conjugate events have multiplicity >= 1")
        if self.strictly_isotropic and self.isotropic_exists is False:
            raise ValueError("strictly isotropic events are in particular isotropic")

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "multiplicity": self.multiplicity,
            "isotropic_exists": self.isotropic_exists,
            "strictly_isotropic": self.strictly_isotropic,
        }


def build_system(space: ReductiveSpace, u) -> JacobiSystem:
    """Assemble T, R and the companion [[0, I], [-R, T]] for the direction u."""
    uc = np.asarray(u, dtype=float).copy()
    norm = space.algebra.norm(uc)
    if norm < 1e-14:
        raise ZeroVector("geodesic direction must be nonzero")
    uc /= norm
    k = space.part_indices("K")
    if len(k) and np.max(np.abs(uc[k])) > 1e-10:
        raise ValueError("geodesic direction must be supported on m")

    l = space.chol_m
    t_basis = torsion_op(space, uc)
    r_basis = jacobi_op(space, uc)
    # A_on = L^T A L^{-T}: same operator in the gram-orthonormal frame.
    t_on = l.T @ scipy.linalg.solve_triangular(l, t_basis.T, lower=True).T
    r_on = l.T @ scipy.linalg.solve_triangular(l, r_basis.T, lower=True).T
    skew = np.max(np.abs(t_on + t_on.T))
    sym = np.max(np.abs(r_on - r_on.T))
    if max(skew, sym) > 1e-9:
        raise JacobiError(
            f"operators violate (skew-)adjointness on {space.name}: {skew:.1e}/{sym:.1e}"
        )
    r_on = 0.5 * (r_on + r_on.T)
    t_on = 0.5 * (t_on - t_on.T)
    n = t_on.shape[0]
    companion = np.zeros((2 * n, 2 * n))
    companion[:n, n:] = np.eye(n)
    companion[n:, :n] = -r_on
    companion[n:, n:] = t_on
    for arr in (t_on, r_on, companion, uc):
        arr.setflags(write=False)
    return JacobiSystem(space=space, u=uc, T=t_on, R=r_on, companion=companion)


def fundamental_block(sys: JacobiSystem, t: float) -> np.ndarray:
    """J(t): upper-right n x n block of exp(t * companion), maps X'(0) to X(t)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    n = sys.n
    return scipy.linalg.expm(t * sys.companion)[:n, n:]


def default_scan_step(sys: JacobiSystem) -> float:
    norm_r = np.linalg.norm(sys.R, 2)
    norm_t = np.linalg.norm(sys.T, 2)
    return 0.25 / math.sqrt(norm_r + norm_t**2 + 1.0)


def _golden_min(f, a: float, b: float, tol: float) -> float:
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


_WINDOW = 1e-5  # interval width below which a dip is handed to golden-section


def _event_at(sys: JacobiSystem, t_star: float) -> ConjugateEvent | None:
    n = sys.n
    _, sv, vt = np.linalg.svd(fundamental_block(sys, t_star))
    cutoff = MULTIPLICITY_RTOL * max(sv[0], 1e-300)
    mult = int(np.sum(sv < cutoff))
    if mult == 0:
        return None
    kernel_on = vt[n - mult :]
    kernel = np.array([sys.embed_m(sys.from_on_frame(xi)) for xi in kernel_on])
    return ConjugateEvent(t=float(t_star), multiplicity=mult, kernel=kernel)


def _hunt_zeros(sys, smin_f, a, b, fa, fb, lip, found, depth=0):
    """Certified zero hunt: sigma_min is lip-Lipschitz, so an interval whose
    endpoint values both exceed lip*(b-a)/2 contains no zero.  Suspicious
    intervals are bisected down to a small window and refined by golden
    section; nearby zeros from different Jacobi blocks end up in disjoint
    windows instead of being swallowed by one refinement."""
    width = b - a
    if min(fa, fb) > lip * width / 2.0:
        return
    if width < _WINDOW or depth >= 60:
        lo, hi = a - width, b + width
        for _ in range(8):
            t_star = _golden_min(smin_f, lo, hi, T_TOL)
            # a minimizer pinned to a window edge means the true zero sits
            # just outside; slide the window rather than accept a biased time
            if t_star - lo < 4 * T_TOL:
                lo, hi = max(lo - (hi - lo), T_TOL), t_star + 4 * T_TOL
            elif hi - t_star < 4 * T_TOL:
                lo, hi = t_star - 4 * T_TOL, hi + (hi - lo)
            else:
                break
        event = _event_at(sys, t_star)
        if event is not None:
            found.append(event)
        return
    mid = 0.5 * (a + b)
    fm = smin_f(mid)
    _hunt_zeros(sys, smin_f, a, mid, fa, fm, lip, found, depth + 1)
    _hunt_zeros(sys, smin_f, mid, b, fm, fb, lip, found, depth + 1)


def scan_conjugate_times(
    sys: JacobiSystem,
    t_max: float,
    step: float | None = None,
) -> list[ConjugateEvent]:
    """Locate the zeros of det J(t) on ]0, t_max] and their kernels.

    Scans sigma_min(J) on a grid starting at step/2, brackets every possible
    dip with a Lipschitz certificate, refines each by golden-section search to
    |t| tolerance 1e-10, and reads multiplicity and kernel from the singular
    values below 1e-7 * sigma_max.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    norm_r = np.linalg.norm(sys.R, 2)
    norm_t = np.linalg.norm(sys.T, 2)
    lipschitz = math.sqrt(norm_r + norm_t**2)
    if step is None:
        step = default_scan_step(sys)
    elif lipschitz * step > 0.5:
        raise StepTooCoarse(
            f"step {step:g} with frequency bound {lipschitz:g} risks missed zeros"
        )

    n = sys.n
    grid = np.arange(step / 2.0, t_max + 1.5 * step, step)
    stepper = scipy.linalg.expm(step * sys.companion)
    prop = scipy.linalg.expm(grid[0] * sys.companion)
    smin = np.empty(len(grid))
    exp_norm = np.empty(len(grid))
    for i in range(len(grid)):
        smin[i] = np.linalg.svd(prop[:n, n:], compute_uv=False)[-1]
        exp_norm[i] = np.linalg.norm(prop, 2)
        prop = stepper @ prop

    def smin_f(t):
        return np.linalg.svd(fundamental_block(sys, t), compute_uv=False)[-1]

    comp_norm = np.linalg.norm(sys.companion, 2)
    raw: list[ConjugateEvent] = []
    for i in range(len(grid) - 1):
        lip = 1.2 * comp_norm * max(exp_norm[i], exp_norm[i + 1])
        _hunt_zeros(sys, smin_f, grid[i], grid[i + 1], smin[i], smin[i + 1], lip, raw)

    raw.sort(key=lambda ev: ev.t)
    events: list[ConjugateEvent] = []
    for ev in raw:
        if ev.t < step / 4.0 or ev.t > t_max + 1e-12:
            continue
        if events and abs(events[-1].t - ev.t) < DEDUP_TOL:
            continue
        events.append(ev)
    return events


def isotropic_complement_projector(sys: JacobiSystem) -> np.ndarray:
    """Projector onto (Ker R_u)-perp in the ON frame of m."""
    evals, evecs = np.linalg.eigh(sys.R)
    cutoff = RANK_TOL * max(evals[-1], 1e-300)
    w = evecs[:, evals > cutoff]
    return w @ w.T


def isotropic_derivative_basis(space: ReductiveSpace, u) -> np.ndarray:
    """Orthonormal ON-frame basis of [k, u], the isotropic initial derivatives."""
    uc = np.asarray(u, dtype=float)
    k = space.part_indices("K")
    m = space.part_indices("M")
    if len(k) == 0:
        return np.zeros((len(m), 0))
    ad = space.algebra.ad(uc)
    cols = -ad[np.ix_(m, k)]  # [z_j, u] = -ad_u z_j, m components
    cols_on = space.chol_m.T @ cols
    q, sv, _ = np.linalg.svd(cols_on, full_matrices=False)
    rank = int(np.sum(sv > RANK_TOL * max(sv[0] if len(sv) else 1.0, 1e-300)))
    return q[:, :rank]


def classify_isotropy(sys: JacobiSystem, event: ConjugateEvent) -> ConjugateEvent:
    """Fill the isotropy flags of an event via the (Ker R_u)-perp criterion.

    With K the orthonormal kernel of J(t) and W = (Ker R_u)-perp, an isotropic
    Jacobi field vanishing at the event exists iff some kernel direction lies
    entirely inside W, i.e. iff (I - P_W) K is rank-deficient; the event is
    strictly isotropic iff (I - P_W) K vanishes altogether.
    """
    proj = isotropic_complement_projector(sys)
    m = sys.space.part_indices("M")
    kernel_on = np.array([sys.to_on_frame(vec[m]) for vec in event.kernel]).T
    kernel_on, _ = np.linalg.qr(kernel_on)
    outside = kernel_on - proj @ kernel_on
    sv = np.linalg.svd(outside, compute_uv=False)
    s_max, s_min = (sv[0], sv[-1]) if len(sv) else (0.0, 0.0)
    return replace(
        event,
        isotropic_exists=bool(s_min < RANK_TOL),
        strictly_isotropic=bool(s_max < RANK_TOL),
    )


def conjugate_events(
    space: ReductiveSpace,
    u,
    t_max: float,
    step: float | None = None,
) -> list[ConjugateEvent]:
    """Build the system along u, scan for conjugate times, classify each event."""
    sys = build_system(space, u)
    return [classify_isotropy(sys, ev) for ev in scan_conjugate_times(sys, t_max, step)]


# -- canonical directions ----------------------------------------------------

_AUX_KEYS = {
    "berger": {"alpha"},
    "spsphere": {"phi1", "phi2", "alpha"},
    "cpodd": {"phi", "alpha"},
    "b13": {"phi1", "phi2", "x0", "alpha"},
    "w7": {"phi", "x0", "alpha"},
}


def _canonical_u0_u1(space: ReductiveSpace, aux: dict) -> tuple[np.ndarray, np.ndarray]:
    family = space.params.get("family")
    if family not in _AUX_KEYS:
        raise BadAux(f"no canonical vertical/horizontal directions for {space.name}")
    extra = set(aux) - _AUX_KEYS[family]
    if extra:
        raise BadAux(f"unknown aux parameters {sorted(extra)} for {family}")

    bv = space.basis_vector
    if family == "berger":
        m = int(space.params["m"])
        alpha = int(aux.get("alpha", m))
        if not 1 <= alpha <= m:
            raise BadAux(f"alpha must be in 1..{m}")
        return bv("d_s"), bv(f"e_{alpha}")
    if family == "spsphere":
        m = int(space.params["m"])
        phi1 = float(aux.get("phi1", math.pi / 2))
        phi2 = float(aux.get("phi2", 0.0))
        u0 = (
            math.sin(phi1) * math.cos(phi2) * bv("d_1s")
            + math.sin(phi1) * math.sin(phi2) * bv("d_2s")
            + math.cos(phi1) * bv("d_3s")
        )
        alpha = int(aux.get("alpha", 1))
        if not 1 <= alpha <= m:
            raise BadAux(f"alpha must be in 1..{m}")
        return u0, bv(f"Y_{alpha}")
    if family == "cpodd":
        m = int(space.params["m"])
        phi = float(aux.get("phi", 0.0))
        u0 = math.cos(phi) * bv("X_2") + math.sin(phi) * bv("X_3")
        alpha = int(aux.get("alpha", 1))
        if not 1 <= alpha <= m:
            raise BadAux(f"alpha must be in 1..{m}")
        return space.unit(u0), bv(f"Y_{alpha}")
    if family == "b13":
        phi1 = float(aux.get("phi1", 0.0))
        phi2 = float(aux.get("phi2", 0.0))
        x0 = float(aux.get("x0", 0.0))
        x = (
            x0 * bv("u_0")
            + math.cos(phi1) * bv("u_1")
            + math.sin(phi1) * math.cos(phi2) * bv("u_2")
            + math.sin(phi1) * math.sin(phi2) * bv("v_1")
        )
        alpha = int(aux.get("alpha", 1))
        if not 1 <= alpha <= 4:
            raise BadAux("alpha must be in 1..4")
        return space.unit(x), bv(f"e_{alpha}")
    # w7
    phi = float(aux.get("phi", 0.0))
    x0 = float(aux.get("x0", 0.0))
    x = x0 * bv("u_0s") + math.cos(phi) * bv("u_1s") + math.sin(phi) * bv("v_1s")
    alpha = int(aux.get("alpha", 1))
    if not 1 <= alpha <= 2:
        raise BadAux("alpha must be in 1..2")
    return space.unit(x), bv(f"e_{alpha}")


def geodesic_pair(
    space: ReductiveSpace, theta: float, aux: dict | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """The slope-angle direction u = cos(theta) u0 + sin(theta) u1 and its companion v."""
    if not 0.0 <= theta <= math.pi / 2 + 1e-12:
        raise BadAngle("theta must lie in [0, pi/2]")
    u0, u1 = _canonical_u0_u1(space, dict(aux or {}))
    u0, u1 = space.unit(u0), space.unit(u1)
    u = math.cos(theta) * u0 + math.sin(theta) * u1
    v = math.cos(theta) * u1 - math.sin(theta) * u0
    return space.unit(u), space.unit(v)


def geodesic_direction(space: ReductiveSpace, theta: float, aux: dict | None = None) -> np.ndarray:
    return geodesic_pair(space, theta, aux)[0]
