"""Boundary symbol machinery: the normal-direction companion matrix G, its
stable subspaces for positive time-damping gamma and their gamma -> 0 limits,
single-cluster block factorizations, and the finite-difference check relating
a block's linearization to the tangent system at a nonglancing root.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import subspace_angles

from .classify import classify_glancing, tangent_system
from .errors import (
    ClusterCollision,
    DimensionMismatch,
    GapTooSmall,
    InternalInconsistency,
    NotApplicable,
    OnBoundary,
    Singular,
)
from .spectral import (
    SubspaceBasis,
    cluster_eigenvalues,
    half_plane_subspace,
    spectral_projector,
)
from .symbol import HyperbolicSystem, char_poly

__all__ = [
    "Frequency",
    "BoundaryProblem",
    "constant_boundary_problem",
    "build_G",
    "positive_count",
    "negative_space",
    "limit_negative_space",
    "BoundaryBlock",
    "boundary_block",
    "check_tangent_relation",
]


@dataclass(frozen=True)
class Frequency:
    """Boundary frequency (tau, eta, gamma) with gamma >= 0."""

    tau: float
    eta: tuple[float, ...]
    gamma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(
            self, "eta", tuple(float(e) for e in np.atleast_1d(self.eta))
        )
        object.__setattr__(self, "gamma", float(self.gamma))
        if self.gamma < 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")

    @property
    def eta_array(self) -> np.ndarray:
        return np.asarray(self.eta, dtype=float)

    def as_array(self) -> np.ndarray:
        return np.array([self.tau, *self.eta, self.gamma], dtype=float)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def scaled(self, s: float) -> "Frequency":
        if s <= 0:
            raise ValueError("only positive rescalings preserve gamma >= 0")
        return Frequency(s * self.tau, tuple(s * e for e in self.eta), s * self.gamma)

    def unit(self) -> "Frequency":
        n = self.norm
        if n == 0:
            raise ValueError("cannot normalize the zero frequency")
        return self.scaled(1.0 / n)

    def with_gamma(self, gamma: float) -> "Frequency":
        return Frequency(self.tau, self.eta, gamma)


def _as_frequency(zeta, d: int) -> Frequency:
    if isinstance(zeta, Frequency):
        freq = zeta
    else:
        tau, eta, gamma = zeta
        freq = Frequency(tau, tuple(np.atleast_1d(eta)), gamma)
    if len(freq.eta) != d - 1:
        raise DimensionMismatch(
            f"frequency has {len(freq.eta)} tangential components, expected {d - 1}"
        )
    return freq


def _g_raw(sys: HyperbolicSystem, p, tau: float, eta, gamma: float) -> np.ndarray:
    """G without Frequency validation; gamma may be negative for internal
    finite differences (the formula is polynomial in gamma)."""
    mats = sys.matrices(p)
    a_d = mats[sys.boundary_axis]
    n = sys.n
    sv = np.linalg.svd(a_d, compute_uv=False)
    if sv[-1] <= 1e-12 * max(1.0, sv[0]):
        raise Singular("boundary matrix A_d is singular: characteristic boundary")
    rhs = complex(tau, -gamma) * np.eye(n, dtype=complex)
    for e, j in zip(np.atleast_1d(eta), sys.tangential_axes):
        rhs = rhs + float(e) * mats[j]
    return np.linalg.solve(a_d, rhs)


def build_G(sys: HyperbolicSystem, p, zeta) -> np.ndarray:
    """Boundary symbol G(p, zeta) = A_d^{-1}((tau - i gamma) Id + sum eta_j A_j).

    Raises
    ------
    Singular
        If the boundary matrix A_d(p) is (numerically) singular.
    """
    freq = _as_frequency(zeta, sys.d)
    return _g_raw(sys, p, freq.tau, freq.eta_array, freq.gamma)


def positive_count(sys: HyperbolicSystem, p) -> int:
    """Number of positive eigenvalues of the boundary matrix A_d(p)."""
    eigs = np.linalg.eigvals(sys.boundary_matrix(p))
    return int(np.sum(eigs.real > 0))


@dataclass(frozen=True)
class BoundaryProblem:
    """A hyperbolic system with boundary conditions M(p, zeta) u = g.

    ``m_map(p, zeta)`` returns the condition matrix, with as many rows as
    A_d(p) has positive eigenvalues and homogeneous of degree zero in zeta.
    """

    sys: HyperbolicSystem
    m_map: Callable[[object, Frequency], np.ndarray]
    label: str = ""

    def boundary_condition(self, p, zeta) -> np.ndarray:
        freq = _as_frequency(zeta, self.sys.d)
        m = np.atleast_2d(np.asarray(self.m_map(p, freq)))
        n_plus = positive_count(self.sys, p)
        if m.shape != (n_plus, self.sys.n):
            raise DimensionMismatch(
                f"boundary condition is {m.shape[0]}x{m.shape[1]}, "
                f"expected {n_plus}x{self.sys.n}"
            )
        sv = np.linalg.svd(m, compute_uv=False)
        if n_plus and sv[-1] <= 1e-10 * max(1.0, sv[0]):
            raise Singular("boundary condition matrix is rank deficient")
        return m

    def kernel(self, p, zeta) -> SubspaceBasis:
        """Orthonormal basis of ker M(p, zeta), of dimension N - N_+."""
        m = self.boundary_condition(p, zeta)
        _, _, vh = np.linalg.svd(m)
        basis = vh[m.shape[0]:].conj().T
        return SubspaceBasis(basis)


def constant_boundary_problem(
    sys: HyperbolicSystem, m: np.ndarray, label: str = ""
) -> BoundaryProblem:
    """Boundary problem whose condition matrix ignores (p, zeta)."""
    m = np.atleast_2d(np.array(m))
    return BoundaryProblem(sys, lambda p, zeta: m, label)


def negative_space(
    sys: HyperbolicSystem, p, zeta, validate_dim: bool = True
) -> SubspaceBasis:
    """Stable subspace of G(p, zeta): invariant space for Im mu < 0.

    Requires gamma > 0, which keeps the spectrum of G off the real axis.
    The dimension equals the number of positive eigenvalues of A_d.

    Raises
    ------
    GapTooSmall
        If the spectral gap at the real axis is below tolerance (increase
        gamma or use limit_negative_space).
    """
    freq = _as_frequency(zeta, sys.d)
    if freq.gamma <= 0:
        raise ValueError("negative_space requires gamma > 0; use limit_negative_space")
    g = build_G(sys, p, freq)
    try:
        basis = half_plane_subspace(g, "im<0")
    except OnBoundary as exc:
        raise GapTooSmall(str(exc)) from exc
    if validate_dim:
        n_plus = positive_count(sys, p)
        if basis.dim != n_plus:
            raise InternalInconsistency(
                f"stable subspace has dimension {basis.dim}, expected {n_plus} "
                "(positive eigenvalue count of A_d)"
            )
    return basis


def default_gamma_sequence() -> np.ndarray:
    return np.array([2.0 ** (-k) for k in range(4, 21)])


def limit_negative_space(
    sys: HyperbolicSystem,
    p,
    zeta,
    gammas: Sequence[float] | None = None,
    approach: Sequence[Frequency] | None = None,
    angle_tol: float = 1e-5,
) -> tuple[SubspaceBasis, dict]:
    """Limit of the stable subspace along an approach to a gamma = 0 frequency.

    By default the approach is zeta with gamma replaced by 2^-k, k = 4..20;
    a custom sequence of frequencies (each with gamma > 0) may be supplied
    for direction-dependent studies.  Returns the last basis and a report
    with pairwise principal angles; convergence means the largest principal
    angle between successive bases fell below ``angle_tol``.  Non-convergence
    is reported, not raised: the limit need not exist at degenerate points.
    """
    freq = _as_frequency(zeta, sys.d)
    if approach is None:
        if gammas is None:
            gammas = default_gamma_sequence()
        approach = [freq.with_gamma(float(g)) for g in gammas]
    approach = list(approach)
    if not approach:
        raise ValueError("empty approach sequence")

    bases: list[SubspaceBasis] = []
    used: list[Frequency] = []
    skipped: list[dict] = []
    for fq in approach:
        try:
            bases.append(negative_space(sys, p, fq, validate_dim=False))
            used.append(fq)
        except GapTooSmall as exc:
            skipped.append({"gamma": fq.gamma, "reason": str(exc)})
    if not bases:
        raise GapTooSmall("no approach point yielded a resolvable stable subspace")

    angles = []
    for prev, cur in zip(bases, bases[1:]):
        if prev.dim != cur.dim:
            angles.append(math.pi / 2)
        else:
            ang = subspace_angles(prev.matrix, cur.matrix)
            angles.append(float(ang[0]) if len(ang) else 0.0)
    converged = bool(angles and angles[-1] < angle_tol) or (
        len(bases) == 1 and not skipped
    )
    report = {
        "gammas": [fq.gamma for fq in used],
        "max_angles": angles,
        "converged": converged,
        "dim": bases[-1].dim,
        "angle_tol": angle_tol,
        "skipped": skipped,
    }
    return bases[-1], report


# ------------------------------------------------------------ block reduction


@dataclass
class BoundaryBlock:
    """Single-cluster factorization G V_b = V_b G_flat, W_b V_b = Id.

    V_b(zeta) is a smoothly gauged orthonormal basis of the invariant
    subspace continuing the base cluster; W_b = V_b^H.  ``real_coeff_residual``
    holds the imaginary-part size of the block characteristic polynomial at
    the base point when it sits at gamma = 0 with a real eigenvalue.
    """

    sys: HyperbolicSystem
    p: object
    base: Frequency
    center: complex
    m: int
    base_v: np.ndarray
    radius: float
    real_coeff_residual: float | None = None

    def sample(self, tau: float, eta, gamma: float):
        """(V_b, W_b, G_flat) at a nearby frequency; gamma may be negative
        (analytic continuation used by finite differences).

        The continued block collects every eigenvalue inside the isolation
        disk around the base cluster; sub-splitting within the disk is fine,
        eigenvalues entering or leaving it are not.
        """
        g = _g_raw(self.sys, self.p, tau, np.atleast_1d(eta), gamma)
        eigs = np.linalg.eigvals(g)
        inside = np.abs(eigs - self.center) < self.radius
        if int(np.sum(inside)) != self.m:
            raise ClusterCollision(
                f"{int(np.sum(inside))} eigenvalues inside the isolation disk of "
                f"{self.center}, expected {self.m}"
            )
        if np.isfinite(self.radius):
            proj = spectral_projector(
                g, lambda mu: abs(mu - self.center) < self.radius
            )
        else:
            proj = np.eye(self.sys.n, dtype=complex)
        v, _ = np.linalg.qr(proj @ self.base_v)
        w = v.conj().T
        g_flat = w @ g @ v
        resid = np.linalg.norm(g @ v - v @ g_flat)
        if resid > 1e-9 * max(1.0, np.linalg.norm(g)):
            raise InternalInconsistency(
                f"block factorization residual {resid:.3e} exceeds tolerance"
            )
        return v, w, g_flat

    def block(self, tau: float, eta, gamma: float) -> np.ndarray:
        return self.sample(tau, eta, gamma)[2]

    def block_at(self, zeta) -> np.ndarray:
        freq = _as_frequency(zeta, self.sys.d)
        return self.block(freq.tau, freq.eta_array, freq.gamma)


def boundary_block(
    sys: HyperbolicSystem, p, zeta, center: complex, linking_tol: float | None = None
) -> BoundaryBlock:
    """Factor out the G-eigenvalue cluster near ``center`` at the base
    frequency, returning a smoothly sampled block (nn-style V, W, G_flat).

    Raises
    ------
    ClusterCollision
        If no separated cluster sits near ``center`` or its multiplicity
        changes at sampled points.
    """
    freq = _as_frequency(zeta, sys.d)
    g0 = build_G(sys, p, freq)
    clusters = cluster_eigenvalues(g0, tol=linking_tol)
    dists = [abs(np.mean(c.eigenvalues) - center) for c in clusters]
    best = int(np.argmin(dists))
    cluster = clusters[best]
    scale = max(1.0, float(np.linalg.norm(g0)))
    spread = float(np.max(np.abs(cluster.eigenvalues - np.mean(cluster.eigenvalues))))
    if dists[best] > 1e-6 * scale + spread:
        raise ClusterCollision(
            f"no eigenvalue of G near {center}: nearest cluster at distance "
            f"{dists[best]:.3e}"
        )
    # gauge anchor: orthonormal range of the cluster projector
    u, sv, _ = np.linalg.svd(cluster.projector)
    m = cluster.multiplicity
    base_v = u[:, :m]
    # continuation radius: half-distance to the other clusters
    others = [
        abs(np.mean(c.eigenvalues) - np.mean(cluster.eigenvalues))
        for i, c in enumerate(clusters)
        if i != best
    ]
    radius = 0.5 * min(others) if others else np.inf
    blk = BoundaryBlock(
        sys=sys, p=p, base=freq, center=complex(center), m=m, base_v=base_v,
        radius=float(radius),
    )
    if freq.gamma == 0.0 and abs(complex(center).imag) < 1e-9 * scale:
        coeffs = np.poly(blk.block(freq.tau, freq.eta_array, 0.0))
        blk.real_coeff_residual = float(
            np.max(np.abs(coeffs.imag)) / max(1.0, np.max(np.abs(coeffs)))
        )
        if blk.real_coeff_residual > 1e-9:
            raise InternalInconsistency(
                "block characteristic polynomial not real at gamma = 0: "
                f"residual {blk.real_coeff_residual:.3e}"
            )
    return blk


# -------------------------------------------------- tangent system relation


def _fd_direction(sample: Callable[[float], np.ndarray], h: float) -> np.ndarray:
    """Central difference with one Richardson extrapolation step."""
    d1 = (sample(h) - sample(-h)) / (2.0 * h)
    d2 = (sample(h / 2) - sample(-h / 2)) / h
    return (4.0 * d2 - d1) / 3.0


def check_tangent_relation(
    sys: HyperbolicSystem, p, zeta, xi_normal: float, fd_step: float = 1e-5
) -> dict:
    """Compare the linearization of the block symbol with the tangent system.

    At a semi-simple nonglancing real root, the first-order variation of the
    block G_flat in (tau, eta, gamma) must equal A'_d^{-1}((tau - i gamma) Id
    + sum eta_j A'_j) after aligning the block basis with the tangent basis.
    Returns a report with per-direction residuals (expected < 1e-6).

    Raises
    ------
    NotApplicable
        If the root is glancing.
    """
    freq = _as_frequency(zeta, sys.d)
    if freq.gamma != 0.0:
        raise ValueError("tangent relation is anchored at a gamma = 0 frequency")
    poly = char_poly(sys, p)
    verdict, _ = classify_glancing(
        sys, p, freq.tau, freq.eta_array, xi_normal, poly=poly
    )
    if verdict == "glancing":
        raise NotApplicable("tangent relation requires a nonglancing root")

    xi_full = np.zeros(sys.d)
    for e, j in zip(freq.eta, sys.tangential_axes):
        xi_full[j] = e
    xi_full[sys.boundary_axis] = xi_normal
    ts = tangent_system(sys, p, freq.tau, xi_full, poly=poly)
    blk = boundary_block(sys, p, freq, center=-xi_normal)
    if blk.m != ts.m:
        raise InternalInconsistency(
            f"block multiplicity {blk.m} differs from tangent multiplicity {ts.m}"
        )

    v_b = blk.sample(freq.tau, freq.eta_array, freq.gamma)[0]
    t_gauge, *_ = np.linalg.lstsq(ts.v, v_b, rcond=None)
    gauge_residual = float(np.linalg.norm(ts.v @ t_gauge - v_b))
    t_inv = np.linalg.inv(t_gauge)

    a_d = ts.boundary_block
    a_d_inv = np.linalg.inv(a_d)
    h = fd_step * max(1.0, freq.norm)
    eta0 = freq.eta_array

    directions: dict[str, tuple[Callable[[float], np.ndarray], np.ndarray]] = {}
    directions["tau"] = (
        lambda s: blk.block(freq.tau + s, eta0, 0.0),
        a_d_inv.copy(),
    )
    for k in range(sys.d - 1):
        ek = np.zeros(sys.d - 1)
        ek[k] = 1.0
        rhs = a_d_inv @ ts.a_prime[sys.tangential_axes[k]]
        directions[f"eta_{k}"] = (
            lambda s, ek=ek: blk.block(freq.tau, eta0 + s * ek, 0.0),
            rhs,
        )
    directions["gamma"] = (
        lambda s: blk.block(freq.tau, eta0, s),
        -1j * a_d_inv,
    )

    residuals = {}
    for name, (sampler, rhs) in directions.items():
        lhs = t_gauge @ _fd_direction(sampler, h) @ t_inv
        residuals[name] = float(
            np.linalg.norm(lhs - rhs) / max(1.0, np.linalg.norm(rhs))
        )
    return {
        "m": ts.m,
        "residuals": residuals,
        "max_residual": max(residuals.values()),
        "fd_step": h,
        "gauge_residual": gauge_residual,
    }
