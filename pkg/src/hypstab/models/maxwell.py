"""Maxwell's equations in a biaxial dielectric: conical double roots.

State (B, E) in R^6 with inverse permittivity diag(alpha_1, alpha_2,
alpha_3), alpha_1 > alpha_2 > alpha_3 > 0.  The characteristic determinant
factors as tau^2 (tau^4 - Psi(xi) tau^2 + |xi|^2 Phi(xi)); the quartic has
a double root exactly on the four optic axes, where the eigenvalue crossing
is conical.  The tangent 2x2 system there reduces to the boundary normal
form with parameter 1, the borderline linearly splitting case.

The tau^2 factor carries the divergence constraint modes (xi, 0) and
(0, xi); they never couple to the optical branches.  The normal coefficient
is singular in every direction, so the boundary is characteristic and the
stable subspace is computed from the generalized pencil instead of the
reduced first-order matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ..boundary import _as_frequency
from ..classify import TangentSystem, tangent_system
from ..errors import InternalInconsistency, Singular
from ..spectral import SubspaceBasis, orthonormal_basis
from ..symbol import HyperbolicSystem
from ..symmetrizer import TwoByTwoNormalForm, two_by_two_normal_form

__all__ = [
    "BiaxialCrystal",
    "cross_matrix",
    "maxwell_biaxial_system",
    "fresnel_coefficients",
    "dispersion_determinant",
    "discriminant_split",
    "optic_axes",
    "OpticDoubleRoot",
    "maxwell_double_roots",
    "pencil_stable_space",
]


def cross_matrix(xi) -> np.ndarray:
    """Matrix of w -> xi x w."""
    x = np.asarray(xi, dtype=float).reshape(3)
    return np.array(
        [
            [0.0, -x[2], x[1]],
            [x[2], 0.0, -x[0]],
            [-x[1], x[0], 0.0],
        ]
    )


@dataclass(frozen=True)
class BiaxialCrystal:
    """Principal inverse-permittivity values, strictly ordered.

    The strict ordering alpha_1 > alpha_2 > alpha_3 > 0 is what makes the
    crystal biaxial; equal values degenerate the optic axes and are
    rejected.
    """

    alpha: tuple[float, float, float] = (3.0, 2.0, 1.0)

    def __post_init__(self):
        arr = np.asarray(self.alpha, dtype=float).reshape(-1)
        if arr.shape != (3,):
            raise ValueError(f"alpha must have three entries, got {arr.shape}")
        object.__setattr__(self, "alpha", tuple(float(a) for a in arr))
        a1, a2, a3 = self.alpha
        if not (a1 > a2 > a3 > 0.0):
            raise ValueError(
                f"principal values must satisfy a1 > a2 > a3 > 0, got {self.alpha}"
            )

    @property
    def inverse_permittivity(self) -> np.ndarray:
        return np.diag(self.alpha)

    @property
    def optic_angle(self) -> float:
        """Polar angle theta of the optic axes against the x1 axis, in the
        x1-x3 plane: sin^2 theta = (a2 - a3) / (a1 - a3)."""
        a1, a2, a3 = self.alpha
        return float(np.arcsin(np.sqrt((a2 - a3) / (a1 - a3))))

    @property
    def double_speed(self) -> float:
        """Propagation speed common to both branches on an optic axis."""
        return float(np.sqrt(self.alpha[1]))


def _maxwell_matrices(crystal: BiaxialCrystal):
    inv_eps = crystal.inverse_permittivity
    out = []
    for j in range(3):
        e = np.zeros(3)
        e[j] = 1.0
        omega = cross_matrix(e)
        a = np.zeros((6, 6))
        a[:3, 3:] = omega
        a[3:, :3] = -inv_eps @ omega
        out.append(a)
    return out


def maxwell_biaxial_system(crystal: BiaxialCrystal | None = None) -> HyperbolicSystem:
    """6x6 first-order symbol for the crystal, symmetrized by
    diag(Id, permittivity).  The parameter slot is unused."""
    if crystal is None:
        crystal = BiaxialCrystal()
    mats = _maxwell_matrices(crystal)
    s_mat = np.diag([1.0, 1.0, 1.0] + [1.0 / a for a in crystal.alpha])
    return HyperbolicSystem(
        n=6,
        d=3,
        coeff=lambda p, _m=mats: _m,
        symmetrizer=lambda p, _s=s_mat: _s,
        label="maxwell-biaxial",
    )


def fresnel_coefficients(crystal: BiaxialCrystal, xi) -> tuple[float, float]:
    """(Psi, Phi) in the quartic factor tau^4 - Psi tau^2 + |xi|^2 Phi.

    Each squared component is weighted by the symmetric functions of the
    two complementary principal values.
    """
    x = np.asarray(xi, dtype=float).reshape(3)
    a1, a2, a3 = crystal.alpha
    u, v, w = x[0] ** 2, x[1] ** 2, x[2] ** 2
    psi = (a2 + a3) * u + (a1 + a3) * v + (a1 + a2) * w
    phi = a2 * a3 * u + a1 * a3 * v + a1 * a2 * w
    return float(psi), float(phi)


def dispersion_determinant(crystal: BiaxialCrystal, tau: float, xi) -> float:
    """Closed form of det(tau Id + A(xi)): tau^2 (tau^4 - Psi tau^2 + |xi|^2 Phi)."""
    x = np.asarray(xi, dtype=float).reshape(3)
    psi, phi = fresnel_coefficients(crystal, x)
    t2 = float(tau) ** 2
    return t2 * (t2 * t2 - psi * t2 + float(x @ x) * phi)


def discriminant_split(crystal: BiaxialCrystal, xi) -> tuple[float, float]:
    """(P, Q) with Psi^2 - 4 |xi|^2 Phi = P^2 + Q and Q >= 0.

    Q = 4 (a1 - a2)(a1 - a3) xi_2^2 xi_3^2 vanishes only for xi_2 xi_3 = 0,
    so double roots of the quartic force xi_2 = 0 (the xi_3 = 0 option
    makes P strictly negative) and then P = 0, which is the optic-axis
    condition.
    """
    x = np.asarray(xi, dtype=float).reshape(3)
    a1, a2, a3 = crystal.alpha
    u, v, w = x[0] ** 2, x[1] ** 2, x[2] ** 2
    p = (a3 - a2) * u + (a3 - a1) * v + (a1 - a2) * w
    q = 4.0 * (a1 - a2) * (a1 - a3) * v * w
    return float(p), float(q)


def optic_axes(crystal: BiaxialCrystal) -> list[np.ndarray]:
    """The four unit directions (+-cos theta, 0, +-sin theta) where the
    quartic factor has a double root."""
    theta = crystal.optic_angle
    c, s = np.cos(theta), np.sin(theta)
    return [
        np.array([sx * c, 0.0, sz * s])
        for sx in (1.0, -1.0)
        for sz in (1.0, -1.0)
    ]


def _real_part(mat, scale: float) -> np.ndarray:
    mat = np.asarray(mat)
    if np.iscomplexobj(mat):
        if np.max(np.abs(mat.imag)) > 1e-10 * scale:
            raise InternalInconsistency("tangent matrix has a large imaginary part")
        mat = mat.real.copy()
    return mat


@dataclass(frozen=True)
class OpticDoubleRoot:
    """One conical point: root (tau, direction), its tangent 2x2 system,
    the in-plane direction along which the reduced coefficient is
    trace-free, and the resulting boundary normal form."""

    direction: np.ndarray
    tau: float
    tangent: TangentSystem
    split_direction: np.ndarray
    normal_form: TwoByTwoNormalForm


def maxwell_double_roots(
    crystal: BiaxialCrystal | None = None, check_points: int = 50
) -> list[OpticDoubleRoot]:
    """All eight double roots (four optic axes, two signs of tau).

    Each tangent system is the compression of the symbol onto the
    two-dimensional optical kernel.  Choosing the in-plane frequency
    direction that kills the trace of the reduced coefficient and pairing
    it with the out-of-plane coefficient exhibits the pencil as the
    boundary normal form; the speed-ratio parameter always comes out 1.
    """
    if crystal is None:
        crystal = BiaxialCrystal()
    sys = maxwell_biaxial_system(crystal)
    out = []
    for direction in optic_axes(crystal):
        for sign in (1.0, -1.0):
            tau = sign * crystal.double_speed
            ts = tangent_system(sys, None, tau, direction, check_points=check_points)
            scale = max(
                1.0, *(float(np.max(np.abs(a))) for a in ts.a_prime)
            )
            traces = [float(np.trace(_real_part(a, scale))) for a in ts.a_prime]
            if abs(traces[1]) > 1e-10 * scale:
                raise InternalInconsistency(
                    "out-of-plane tangent coefficient is not trace-free"
                )
            split = np.array([traces[2], 0.0, -traces[0]])
            norm = float(np.linalg.norm(split))
            if norm <= 1e-10 * scale:
                raise InternalInconsistency("no trace-free in-plane direction found")
            split /= norm
            a_first = _real_part(ts.a_prime_dir(split), scale)
            a_second = _real_part(ts.a_prime[1], scale)
            nf = two_by_two_normal_form(a_first, a_second)
            out.append(
                OpticDoubleRoot(
                    direction=direction.copy(),
                    tau=float(tau),
                    tangent=ts,
                    split_direction=split,
                    normal_form=nf,
                )
            )
    return out


def pencil_stable_space(sys: HyperbolicSystem, p, zeta) -> SubspaceBasis:
    """Decaying modes at gamma > 0 for a possibly characteristic boundary.

    Solves the generalized problem ((tau - i gamma) Id + sum eta_j A_j) v =
    mu A_d v and keeps eigenvectors of finite mu with Im mu < 0; infinite
    modes (A_d v = 0) carry no x-dependence and are discarded.  Agrees with
    the reduced-matrix stable space whenever A_d is invertible.  Assumes
    the stable eigenvalues are nondefective at the queried frequency.
    """
    freq = _as_frequency(zeta, sys.d)
    if freq.gamma <= 0:
        raise ValueError("pencil stable space needs gamma > 0")
    mats = sys.matrices(p)
    b_mat = complex(freq.tau, -freq.gamma) * np.eye(sys.n, dtype=complex)
    for e, j in zip(freq.eta_array, sys.tangential_axes):
        b_mat += e * mats[j]
    a_d = mats[sys.boundary_axis].astype(complex)
    w, vecs = linalg.eig(b_mat, a_d, homogeneous_eigvals=True)
    alpha, beta = w[0], w[1]
    pair_scale = np.hypot(np.abs(alpha), np.abs(beta))
    if np.min(pair_scale) <= 1e-12 * max(1.0, float(np.max(pair_scale))):
        raise Singular("generalized boundary pencil is singular")
    keep = []
    for k in range(sys.n):
        if abs(beta[k]) <= 1e-9 * pair_scale[k]:
            continue  # infinite eigenvalue: constraint mode, no decay rate
        if (alpha[k] / beta[k]).imag < 0:
            keep.append(vecs[:, k])
    if not keep:
        return SubspaceBasis(np.zeros((sys.n, 0), dtype=complex))
    return orthonormal_basis(np.column_stack(keep))
