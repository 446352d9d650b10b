"""Symmetrizer verification and the closed-form constructions: dissipative
symmetrizers from a Friedrichs structure, block symmetrizers at totally
incoming or outgoing roots, the 2x2 normal form with its cone criterion and
double-root symmetrizer, and a quadrature probe of the maximal energy
estimate obtained by actually solving the boundary ODE.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .boundary import (
    BoundaryProblem,
    Frequency,
    _as_frequency,
    boundary_block,
    build_G,
    negative_space,
)
from .classify import classify_glancing, tangent_system
from .errors import (
    AssumptionFailure,
    GapTooSmall,
    InternalInconsistency,
    LopatinskiFailureAtPoint,
    NotApplicable,
    NotMixedSign,
    NotStrictlyHyperbolic,
)
from .spectral import half_plane_subspace
from .symbol import HyperbolicSystem

__all__ = [
    "SymmetrizerCandidate",
    "dissipative_symmetrizer",
    "verify_symmetrizer",
    "verify_kreiss",
    "verify_k_family",
    "sign_check",
    "totally_nonglancing_symmetrizer",
    "TwoByTwoNormalForm",
    "two_by_two_normal_form",
    "two_by_two_lopatinski",
    "two_by_two_symmetrizer",
    "EstimateProbe",
    "estimate_probe",
    "report_to_json",
]

_HERMITIAN_TOL = 1e-12


@dataclass
class SymmetrizerCandidate:
    """A symmetrizer proposal: a Hermitian-valued sampler plus the constants
    it claims to achieve (lower bound c on Im(Sigma G)/gamma, upper bound C
    on the norm)."""

    sampler: Callable[[object, Frequency], np.ndarray]
    c: float
    C: float
    label: str = ""

    def __call__(self, p, zeta) -> np.ndarray:
        sig = np.asarray(self.sampler(p, zeta), dtype=complex)
        herm = np.linalg.norm(sig - sig.conj().T)
        if herm > _HERMITIAN_TOL * max(1.0, np.linalg.norm(sig)):
            raise InternalInconsistency(
                f"symmetrizer sample not Hermitian: residual {herm:.3e}"
            )
        return sig


def dissipative_symmetrizer(sys: HyperbolicSystem, p) -> SymmetrizerCandidate:
    """The Friedrichs-dissipative symmetrizer -S A_d, with its exact margins.

    For any frequency, Im((-S A_d) G) = gamma S, so the achieved lower bound
    is the smallest eigenvalue of S and the norm bound is ||S A_d||.
    """
    s = sys.s_matrix(p)
    a_d = sys.boundary_matrix(p)
    sig = -s @ a_d
    c = float(np.min(np.linalg.eigvalsh(s)))
    big_c = float(np.linalg.norm(sig, 2))
    return SymmetrizerCandidate(
        sampler=lambda _p, _z, m=sig: m, c=c, C=big_c, label="-S A_d"
    )


def _g_sampler(source) -> Callable[[object, Frequency], np.ndarray]:
    if isinstance(source, HyperbolicSystem):
        return lambda p, z, s=source: build_G(s, p, z)
    return source


def _min_eig(h: np.ndarray) -> float:
    return float(np.min(np.linalg.eigvalsh(0.5 * (h + h.conj().T))))


def verify_symmetrizer(
    cand: SymmetrizerCandidate, g_source, samples: Sequence, p=None
) -> dict:
    """Check the defining symmetrizer inequalities on a sample set.

    Per sample (gamma > 0 required): the sampler output is Hermitian, its
    norm stays below the advertised C, and the smallest eigenvalue of
    Im(Sigma G) clears c * gamma.  Failures are collected, not raised.
    """
    g_of = _g_sampler(g_source)
    rows = []
    for z in samples:
        freq = z if isinstance(z, Frequency) else Frequency(*z)
        if freq.gamma <= 0:
            raise ValueError("verification samples need gamma > 0")
        sig = cand(p, freq)
        g = np.asarray(g_of(p, freq), dtype=complex)
        prod = sig @ g
        im_part = (prod - prod.conj().T) / 2j
        lower = _min_eig(im_part)
        norm = float(np.linalg.norm(sig, 2))
        rows.append(
            {
                "zeta": freq,
                "norm": norm,
                "norm_ok": norm <= cand.C * (1 + 1e-9),
                "coercivity": lower,
                "required": cand.c * freq.gamma,
                "coercive_ok": lower >= cand.c * freq.gamma * (1 - 1e-9),
            }
        )
    failing = [r for r in rows if not (r["norm_ok"] and r["coercive_ok"])]
    return {
        "samples": rows,
        "worst_margin": min(r["coercivity"] - r["required"] for r in rows),
        "worst_norm": max(r["norm"] for r in rows),
        "passed": not failing,
        "failing": failing,
    }


def verify_kreiss(
    cand: SymmetrizerCandidate, bp: BoundaryProblem, samples: Sequence, p=None
) -> dict:
    """Check the boundary coercivity of a symmetrizer along two routes.

    Route one looks for a constant C with Sigma + C M*M bounded below on the
    whole space (swept over a geometric C grid); route two compresses Sigma
    to ker M.  The two are equivalent with related constants, so decisively
    contradictory verdicts raise InternalInconsistency; marginal samples
    (both margins within rounding of zero) are only reported.
    """
    rows = []
    for z in samples:
        freq = _as_frequency(z, bp.sys.d)
        sig = cand(p, freq)
        m = bp.boundary_condition(p, freq)
        scale = max(1.0, float(np.linalg.norm(sig, 2)))
        mtm = m.conj().T @ m
        mscale = max(np.linalg.norm(mtm, 2), 1e-30)
        best = -np.inf
        best_c = None
        for big_c in np.geomspace(1e-3, 1e9, 25) * scale / mscale:
            low = _min_eig(sig + big_c * mtm)
            if low > best:
                best, best_c = low, float(big_c)
        kernel = bp.kernel(p, freq)
        if kernel.dim:
            comp = kernel.matrix.conj().T @ sig @ kernel.matrix
            kernel_low = _min_eig(comp)
        else:
            kernel_low = np.inf
        full_pass = best > 0
        kernel_pass = kernel_low > 0
        marginal = (
            min(abs(best), 1.0 if np.isinf(kernel_low) else abs(kernel_low))
            <= 1e-10 * scale
        )
        if full_pass != kernel_pass and not marginal:
            raise InternalInconsistency(
                "augmented-form and kernel-form boundary coercivity disagree: "
                f"full margin {best:.3e}, kernel margin {kernel_low:.3e}"
            )
        rows.append(
            {
                "zeta": freq,
                "full_margin": best,
                "full_constant": best_c,
                "kernel_margin": kernel_low,
                "passed": full_pass and kernel_pass,
                "marginal": marginal,
            }
        )
    return {
        "samples": rows,
        "passed": all(r["passed"] for r in rows),
        "worst_full_margin": min(r["full_margin"] for r in rows),
        "worst_kernel_margin": min(r["kernel_margin"] for r in rows),
    }


def verify_k_family(
    family: dict[float, SymmetrizerCandidate],
    g_source,
    projector,
    samples: Sequence,
    p=None,
    bound: float | None = None,
) -> dict:
    """Fit the growth rate of a kappa-indexed symmetrizer family.

    For each kappa the largest m with Sigma_kappa >= m P_+* P_+ - P_-* P_-
    over the samples is found by bisection; the family qualifies when the
    fitted sequence increases and its last value dwarfs the first.  When no
    projector supplier is given, P_- defaults to the orthogonal projector
    onto the stable subspace of G.  The supplier must stay uniformly
    bounded; its largest norm is reported.
    """
    g_of = _g_sampler(g_source)
    if projector is None:
        def projector(pp, z):
            return half_plane_subspace(
                np.asarray(g_of(pp, z), dtype=complex), "im<0"
            ).projector()

    kappas = sorted(family)
    proj_norms = []
    fits = []
    for kappa in kappas:
        cand = family[kappa]
        worst = np.inf
        for z in samples:
            freq = z if isinstance(z, Frequency) else Frequency(*z)
            sig = cand(p, freq)
            pi_minus = np.asarray(projector(p, freq), dtype=complex)
            proj_norms.append(float(np.linalg.norm(pi_minus, 2)))
            n = sig.shape[0]
            pi_plus = np.eye(n) - pi_minus
            base = sig + pi_minus.conj().T @ pi_minus
            weight = pi_plus.conj().T @ pi_plus
            worst = min(worst, _largest_m(base, weight))
        fits.append(worst)
    increasing = all(b >= a - 1e-12 for a, b in zip(fits, fits[1:]))
    growth = fits[-1] / max(fits[0], 1e-300) if fits[0] > 0 else np.inf
    unbounded = fits[-1] >= _M_CAP  # weight vanished: any m works
    report = {
        "kappas": kappas,
        "m_values": fits,
        "increasing": increasing,
        "growth_factor": float(growth) if np.isfinite(growth) else growth,
        "max_projector_norm": max(proj_norms),
        "passed": increasing
        and (
            unbounded
            or fits[-1] > 10 * abs(fits[0])
            or fits[0] <= 0 < fits[-1]
        ),
    }
    if bound is not None:
        report["exceeds_bound"] = fits[-1] > bound
    return report


_M_CAP = 1e12


def _largest_m(base: np.ndarray, weight: np.ndarray, cap: float = _M_CAP) -> float:
    """Largest m with base - m * weight positive semidefinite.

    The smallest eigenvalue of base - m * weight is concave in m, so the
    feasible set is a closed interval; the right endpoint is bracketed by
    doubling and then bisected.  Returns -inf when no m works and the cap
    when every tested m works (weight vanishing on all of base's geometry).
    """

    def feasible(m):
        return _min_eig(base - m * weight) >= 0

    if feasible(0.0):
        lo = 0.0
        hi = 1.0
        while feasible(hi):
            lo, hi = hi, 2 * hi
            if hi > cap:
                return cap
    else:
        # feasible interval (if any) lies in m < 0
        probe = -1.0
        while not feasible(probe):
            probe *= 2
            if probe < -cap:
                return -np.inf
        lo, hi = probe, probe / 2
        while feasible(hi):
            lo, hi = hi, hi / 2
            if abs(hi) < 1e-300:
                hi = 0.0
                break
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def sign_check(
    cand: SymmetrizerCandidate, g_source, samples: Sequence, p=None
) -> dict:
    """Negativity of the symmetrizer on the stable subspace, per sample."""
    g_of = _g_sampler(g_source)
    rows = []
    for z in samples:
        freq = z if isinstance(z, Frequency) else Frequency(*z)
        if freq.gamma <= 0:
            raise ValueError("sign check samples need gamma > 0")
        sig = cand(p, freq)
        g = np.asarray(g_of(p, freq), dtype=complex)
        basis = half_plane_subspace(g, "im<0")
        comp = basis.matrix.conj().T @ sig @ basis.matrix
        top = float(np.max(np.linalg.eigvalsh(0.5 * (comp + comp.conj().T))))
        rows.append({"zeta": freq, "max_eig": top, "negative": top < 0})
    return {
        "samples": rows,
        "worst": max(r["max_eig"] for r in rows),
        "passed": all(r["negative"] for r in rows),
    }


# --------------------------------------------- totally nonglancing blocks


def totally_nonglancing_symmetrizer(
    sys: HyperbolicSystem,
    p,
    zeta,
    xi_normal: float,
    samples: Sequence | None = None,
) -> tuple[SymmetrizerCandidate, dict]:
    """Block symmetrizer -V* S A_d V at a totally incoming or outgoing root.

    V(zeta) frames the invariant block of the boundary symbol continuing
    the root; the compression of -S A_d to it satisfies
    Im(Sigma_k G_k) = gamma V* S V exactly, and its base value is congruent
    to minus the tangent boundary block, hence definite: negative for a
    totally incoming root, positive for totally outgoing.  The returned
    info records the orientation and the kappa-scaling rule (constant
    family when incoming, linear in kappa when outgoing).

    Raises
    ------
    NotApplicable
        If the root is not totally incoming or totally outgoing.
    """
    freq = _as_frequency(zeta, sys.d)
    if freq.gamma != 0:
        raise ValueError("block symmetrizers are anchored at gamma = 0 roots")
    verdict, glance_info = classify_glancing(
        sys, p, freq.tau, freq.eta, xi_normal
    )
    if verdict not in ("totally_incoming", "totally_outgoing"):
        raise NotApplicable(
            f"root is {verdict}; block symmetrizer needs a totally incoming "
            "or outgoing root"
        )
    s = sys.s_matrix(p)
    a_d = sys.boundary_matrix(p)
    block = boundary_block(sys, p, freq, center=-xi_normal)
    s_ad = s @ a_d

    def sampler(_p, z, blk=block, m=s_ad):
        zz = _as_frequency(z, sys.d)
        v, _, _ = blk.sample(zz.tau, zz.eta_array, zz.gamma)
        return -(v.conj().T @ m @ v)

    base = sampler(p, freq)
    base_eigs = np.linalg.eigvalsh(0.5 * (base + base.conj().T))

    # dual route: renormalizing the block frame to be S-orthonormal turns the
    # base value into exactly minus the tangent system's boundary matrix (up
    # to similarity), so the two spectra must agree as multisets
    v_base, _, _ = block.sample(freq.tau, freq.eta_array, freq.gamma)
    gram = v_base.conj().T @ s @ v_base
    chol = np.linalg.cholesky(0.5 * (gram + gram.conj().T))
    m_mat = v_base.conj().T @ s_ad @ v_base
    half = np.linalg.solve(chol, m_mat)
    gauge_value = -np.linalg.solve(chol, half.conj().T).conj().T
    gauge_eigs = np.sort(
        np.linalg.eigvalsh(0.5 * (gauge_value + gauge_value.conj().T))
    )
    full_xi = _root_frequency(sys, freq, xi_normal)
    ts = tangent_system(sys, p, freq.tau, full_xi)
    tangent_eigs = np.sort(np.linalg.eigvals(ts.boundary_block).real)
    spec_scale = max(1.0, float(np.max(np.abs(tangent_eigs))))
    mismatch = float(np.max(np.abs(np.sort(-gauge_eigs) - tangent_eigs)))
    if mismatch > 1e-8 * spec_scale:
        raise InternalInconsistency(
            "block-route base value and tangent-route boundary matrix have "
            f"different spectra (max gap {mismatch:.3e})"
        )
    if verdict == "totally_incoming":
        if np.any(base_eigs >= 0) or np.any(tangent_eigs <= 0):
            raise InternalInconsistency(
                "incoming root must give a negative definite block value and "
                "a positive tangent boundary block"
            )
        orientation, kappa_rule = "incoming", "constant"
    else:
        if np.any(base_eigs <= 0) or np.any(tangent_eigs >= 0):
            raise InternalInconsistency(
                "outgoing root must give a positive definite block value and "
                "a negative tangent boundary block"
            )
        orientation, kappa_rule = "outgoing", "linear"

    # coercivity constant: Im(Sigma_k G_k) = gamma V* S V >= gamma min eig S
    c = float(np.min(np.linalg.eigvalsh(s)))
    cand = SymmetrizerCandidate(
        sampler=sampler,
        c=c,
        C=float(np.linalg.norm(s_ad, 2)),
        label=f"block at tau={freq.tau}",
    )
    info = {
        "orientation": orientation,
        "kappa_rule": kappa_rule,
        "base_value": base,
        "base_eigenvalues": base_eigs,
        "gauge_base_value": gauge_value,
        "tangent_eigenvalues": tangent_eigs,
        "spectrum_gap": mismatch,
        "glancing": glance_info,
        "block_size": block.m,
    }
    if samples:
        info["verification"] = verify_symmetrizer(
            cand,
            lambda _p, z, blk=block: blk.sample(
                _as_frequency(z, sys.d).tau,
                _as_frequency(z, sys.d).eta_array,
                _as_frequency(z, sys.d).gamma,
            )[2],
            samples,
            p=p,
        )
    return cand, info


def _root_frequency(sys: HyperbolicSystem, freq: Frequency, xi_normal: float):
    xi = np.zeros(sys.d)
    for e, j in zip(freq.eta, sys.tangential_axes):
        xi[j] = e
    xi[sys.boundary_axis] = xi_normal
    return xi


# ----------------------------------------------------- 2x2 normal form


@dataclass
class TwoByTwoNormalForm:
    """Reduction of a mixed-sign 2x2 pencil to boundary speeds (a, -1/a).

    ``basis`` conjugates the normal form back to the original pair;
    ``shear`` = (alpha, beta) and ``scales`` = (xi_scale, eta_scale) record
    the frequency substitution: the original symbol at (tau, xi, eta)
    equals basis @ normal_symbol(tau + alpha*eta, xi_scale*(xi + beta*eta),
    eta_scale*eta) @ basis^{-1}.
    """

    a: float
    basis: np.ndarray
    shear: tuple[float, float]
    scales: tuple[float, float]
    source: tuple[np.ndarray, np.ndarray]

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("normal-form parameter must be positive")
        resid = self.reconstruction_residual()
        if resid > 1e-10:
            raise InternalInconsistency(
                f"recorded transforms do not invert: residual {resid:.3e}"
            )

    @property
    def normal_a(self) -> np.ndarray:
        return np.diag([self.a, -1.0 / self.a])

    @property
    def normal_b(self) -> np.ndarray:
        return np.array([[0.0, 1.0], [1.0, 0.0]])

    def map_frequency(self, tau: float, xi: float, eta: float):
        alpha, beta = self.shear
        xi_scale, eta_scale = self.scales
        return tau + alpha * eta, xi_scale * (xi + beta * eta), eta_scale * eta

    def normal_symbol(self, tau: float, xi: float, eta: float) -> np.ndarray:
        return tau * np.eye(2) + xi * self.normal_a + eta * self.normal_b

    def reconstruct(self, tau: float, xi: float, eta: float) -> np.ndarray:
        t2, x2, e2 = self.map_frequency(tau, xi, eta)
        w = self.basis
        return w @ self.normal_symbol(t2, x2, e2) @ np.linalg.inv(w)

    def reconstruction_residual(self, count: int = 12) -> float:
        a_mat, b_mat = self.source
        rng = np.random.default_rng(61001)
        worst = 0.0
        scale = max(np.linalg.norm(a_mat), np.linalg.norm(b_mat), 1.0)
        for _ in range(count):
            tau, xi, eta = rng.uniform(-1, 1, size=3)
            direct = tau * np.eye(2) + xi * a_mat + eta * b_mat
            worst = max(
                worst, np.linalg.norm(self.reconstruct(tau, xi, eta) - direct)
            )
        return worst / scale


def two_by_two_normal_form(a_mat, b_mat) -> TwoByTwoNormalForm:
    """Reduce a 2x2 pair (A, B) to the one-parameter boundary normal form.

    A must have real eigenvalues of opposite signs; after diagonalizing A
    and shearing away the diagonal of B, the off-diagonal product must be
    positive (strict hyperbolicity of the pencil).  The surviving parameter
    is a = sqrt(-a1/a2) for eigenvalues a1 > 0 > a2 of A.

    Raises
    ------
    NotMixedSign
        If the eigenvalues of A do not straddle zero.
    NotStrictlyHyperbolic
        If the sheared off-diagonal product is not real positive.
    """
    a_mat = np.asarray(a_mat, dtype=float)
    b_mat = np.asarray(b_mat, dtype=float)
    eigvals, eigvecs = np.linalg.eig(a_mat)
    if np.max(np.abs(eigvals.imag)) > 1e-12 * max(1.0, np.max(np.abs(eigvals))):
        raise NotMixedSign("matrix A has nonreal eigenvalues")
    order = np.argsort(-eigvals.real)
    a1, a2 = eigvals.real[order]
    if not (a1 > 0 > a2):
        raise NotMixedSign(
            f"boundary speeds {a1:.6g}, {a2:.6g} must straddle zero"
        )
    v = eigvecs.real[:, order]
    b_prime = np.linalg.solve(v, b_mat @ v)
    beta = (b_prime[0, 0] - b_prime[1, 1]) / (a1 - a2)
    alpha = b_prime[0, 0] - beta * a1
    b_off = b_prime[0, 1]
    c_off = b_prime[1, 0]
    product = b_off * c_off
    if product <= 0:
        raise NotStrictlyHyperbolic(
            f"off-diagonal product {product:.6g} must be positive"
        )
    s = np.sqrt(b_off / c_off)
    a = np.sqrt(-a1 / a2)
    basis = v @ np.diag([s, 1.0])
    # rescaling the second basis vector turns the off-diagonal pair into
    # sign(b) * sqrt(bc) in both corners; the sign rides on the eta scale
    eta_scale = float(np.sign(b_off) * np.sqrt(product))
    return TwoByTwoNormalForm(
        a=float(a),
        basis=basis,
        shear=(float(alpha), float(beta)),
        scales=(float(a1 / a), eta_scale),
        source=(a_mat, b_mat),
    )


def two_by_two_lopatinski(
    nf: TwoByTwoNormalForm, c_bc: complex, validate: bool = True
) -> bool:
    """Cone criterion for the oblique condition u1 = c u2 in normal form.

    The stable line at any frequency with gamma > 0 lies strictly inside
    the cone |u2| <= a |u1|; the kernel of (1, -c) enters that cone exactly
    when a |c| >= 1, so the condition is uniformly Lopatinski-stable if and
    only if a |c| < 1.  When ``validate``, the sampled stable lines are
    checked against the cone and, on the stable side, against alignment
    with the kernel.
    """
    a = nf.a
    verdict = a * abs(c_bc) < 1.0
    if not validate:
        return verdict
    sys_nf = HyperbolicSystem(
        n=2,
        d=2,
        coeff=lambda p: [nf.normal_b, nf.normal_a],
        symmetrizer=lambda p: np.eye(2),
    )
    kernel = np.array([c_bc, 1.0]) / np.sqrt(1.0 + abs(c_bc) ** 2)
    for tau in (-1.0, -0.3, 0.4, 1.0):
        for eta in (-0.8, 0.0, 0.7):
            for gamma in (1e-3, 0.1, 1.0):
                e_minus = negative_space(sys_nf, None, (tau, (eta,), gamma))
                u = e_minus.matrix[:, 0]
                if abs(u[1]) > a * abs(u[0]) * (1 + 1e-9):
                    raise InternalInconsistency(
                        "stable line left the cone |u2| <= a |u1|"
                    )
                if verdict:
                    det = abs(u[0] * kernel[1] - u[1] * kernel[0])
                    if det < 1e-9:
                        raise InternalInconsistency(
                            "stable verdict contradicted by a sampled "
                            "stable line aligned with the kernel"
                        )
    return verdict


def two_by_two_symmetrizer(
    block_sampler: Callable[[float, float, float], np.ndarray],
    fd_step: float = 1e-6,
) -> tuple[SymmetrizerCandidate, dict]:
    """Base-point symmetrizer for a 2x2 block splitting linearly in (tau, eta).

    ``block_sampler(tau, eta, gamma)`` returns the 2x2 block near its base
    point at zero frequency offset.  The construction diagonalizes the
    tau-derivative G0 (which must have real eigenvalues of opposite signs),
    reads the off-diagonal pair (b1, c1) of the eta-derivative in that
    basis (their product must be real negative: strict hyperbolicity of
    the split pencil), and forms the diagonal base value
    diag(|c1|^2, b1*c1), sign-normalized so that its product with G0 is
    positive definite.  Finite-difference sampling near the base point
    verifies -Im(Sigma G) = gamma E with E positive definite.

    Raises
    ------
    AssumptionFailure
        Identifying the violated clause: scalar base point, derivative
        structure, real characteristic coefficients, negative determinant
        of G0, or strict hyperbolicity.
    """
    g_base = np.asarray(block_sampler(0.0, 0.0, 0.0), dtype=complex)
    if g_base.shape != (2, 2):
        raise AssumptionFailure("construction applies to 2x2 blocks")
    phi = 0.5 * np.trace(g_base)
    if np.linalg.norm(g_base - phi * np.eye(2)) > 1e-7 * max(
        1.0, abs(phi)
    ) or abs(phi.imag) > 1e-9 * max(1.0, abs(phi)):
        raise AssumptionFailure(
            "base point: block must reduce to a real scalar at zero offset"
        )

    def fd(direction):
        def shifted(t):
            dt, de, dg = (t * x for x in direction)
            return np.asarray(block_sampler(dt, de, dg), dtype=complex)

        h = fd_step
        d1 = (shifted(h) - shifted(-h)) / (2 * h)
        d2 = (shifted(h / 2) - shifted(-h / 2)) / h
        return (4 * d2 - d1) / 3

    g0 = fd((1.0, 0.0, 0.0))
    g1 = fd((0.0, 1.0, 0.0))
    g_gamma = fd((0.0, 0.0, 1.0))
    scale = max(np.linalg.norm(g0), 1e-30)
    if np.linalg.norm(g_gamma + 1j * g0) > 1e-5 * scale:
        raise AssumptionFailure(
            "derivative structure: the gamma-derivative must be -i times "
            "the tau-derivative"
        )
    if np.max(np.abs(g0.imag)) > 1e-7 * scale or np.max(np.abs(g1.imag)) > 1e-7 * max(
        np.linalg.norm(g1), 1e-30
    ):
        raise AssumptionFailure(
            "real characteristic coefficients: derivative blocks must be "
            "real at gamma = 0"
        )
    g0 = g0.real
    g1 = g1.real
    det0 = float(np.linalg.det(g0))
    if det0 >= 0:
        raise AssumptionFailure(
            f"determinant clause: det of the tau-derivative is {det0:.6g}, "
            "must be negative"
        )
    eigvals, t_mat = np.linalg.eig(g0)
    order = np.argsort(-eigvals.real)
    a0, d0 = eigvals.real[order]
    t_mat = t_mat.real[:, order]
    g1_diag = np.linalg.solve(t_mat, g1 @ t_mat)
    b1 = g1_diag[0, 1]
    c1 = g1_diag[1, 0]
    if b1 * c1 >= 0:
        raise AssumptionFailure(
            f"strict hyperbolicity: off-diagonal product {b1 * c1:.6g} of "
            "the eta-derivative must be negative"
        )
    # ordering a0 > 0 > d0 already fixes the sign normalization: alpha > 0
    # aligns with a0 and delta < 0 with d0, so Sigma G0 comes out definite
    alpha = abs(c1) ** 2
    delta = b1 * c1
    sigma_diag = np.diag([alpha, delta])
    e_base = sigma_diag @ np.diag([a0, d0])
    if _min_eig(e_base) <= 0:
        raise InternalInconsistency(
            "sign normalization failed to make Sigma G0 positive definite"
        )
    t_inv = np.linalg.inv(t_mat)
    sigma = t_inv.conj().T @ sigma_diag @ t_inv
    sigma = 0.5 * (sigma + sigma.conj().T)

    # finite-difference validation of -Im(Sigma G) = gamma E near the base
    rng = np.random.default_rng(90311)
    rates = []
    for _ in range(20):
        dt, de = rng.uniform(-1, 1, 2) * 1e-4
        dg = rng.uniform(0.5, 1.0) * 1e-4
        g = np.asarray(block_sampler(dt, de, dg), dtype=complex)
        prod = sigma @ g
        e_est = -(prod - prod.conj().T) / 2j / dg
        rates.append(_min_eig(e_est))
    e_floor = _min_eig(t_inv.conj().T @ e_base @ t_inv)
    observed = min(rates)
    if observed < 0.5 * e_floor:
        raise InternalInconsistency(
            f"validation: observed coercivity rate {observed:.3e} fell "
            f"below half the base prediction {e_floor:.3e}"
        )
    cand = SymmetrizerCandidate(
        sampler=lambda _p, _z, m=sigma: m,
        c=float(0.5 * e_floor),
        C=float(np.linalg.norm(sigma, 2)),
        label="split 2x2 block",
    )
    info = {
        "phi": float(phi.real),
        "g0": g0,
        "g1": g1,
        "diagonal_base": sigma_diag,
        "alpha": float(sigma_diag[0, 0]),
        "delta": float(sigma_diag[1, 1]),
        "basis": t_mat,
        "e_base": e_base,
        "observed_rate": observed,
    }
    return cand, info


# ------------------------------------------------------------ energy probe


@dataclass
class EstimateProbe:
    """Measured maximal-estimate ratio for one forcing/boundary pair."""

    gamma: float
    x_nodes: np.ndarray
    f_samples: np.ndarray
    g: np.ndarray
    u0: np.ndarray
    interior_norm_sq: float
    boundary_norm_sq: float
    forcing_norm_sq: float
    datum_norm_sq: float
    degenerate: bool = False

    @property
    def ratio(self) -> float:
        num = self.gamma * self.interior_norm_sq + self.boundary_norm_sq
        den = self.forcing_norm_sq / self.gamma + self.datum_norm_sq
        if den == 0:
            return 0.0
        return num / den


def _gauss_panels(x_max: float, panels: int, order: int):
    """Gauss-Legendre nodes/weights on geometrically growing panels."""
    edges = np.concatenate(
        [[0.0], np.geomspace(x_max / 2**(panels - 1), x_max, panels)]
    )
    ref_x, ref_w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for lo, hi in zip(edges, edges[1:]):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        nodes.append(mid + half * ref_x)
        weights.append(half * ref_w)
    return np.concatenate(nodes), np.concatenate(weights)


def estimate_probe(
    bp: BoundaryProblem,
    p,
    zeta,
    forcing: Callable[[float], np.ndarray] | None,
    g,
    panels: int = 40,
    order: int = 8,
    inner_order: int = 6,
) -> EstimateProbe:
    """Solve the boundary ODE and measure the maximal-estimate ratio.

    The bounded solution decomposes over the eigenmodes of the boundary
    symbol: decaying modes integrate forward from 0, growing modes backward
    from the truncation point, and the free stable coefficients solve the
    boundary condition.  The domain is truncated where the slowest decaying
    stable mode has fallen below 1e-12 (forcing beyond the truncation is
    treated as zero); evaluation points are Gauss-Legendre nodes on a
    geometric panel grid, connected by exact exponential propagation with
    an inner Gauss rule per gap.

    Raises
    ------
    LopatinskiFailureAtPoint
        If the boundary condition is (numerically) singular on the stable
        subspace, so no bounded solution exists for generic data.
    """
    freq = _as_frequency(zeta, bp.sys.d)
    if freq.gamma <= 0:
        raise ValueError("the maximal estimate probe requires gamma > 0")
    g_mat = build_G(bp.sys, p, freq)
    n = bp.sys.n
    lam, x_modes = np.linalg.eig(g_mat)
    if np.linalg.cond(x_modes) > 1e8:
        raise NotApplicable(
            "boundary symbol is too close to defective for the modal probe"
        )
    if np.min(np.abs(lam.imag)) < 1e-12:
        raise GapTooSmall("eigenvalue on the real axis despite gamma > 0")
    x_inv = np.linalg.inv(x_modes)
    neg = np.where(lam.imag < 0)[0]
    pos = np.where(lam.imag >= 0)[0]

    rates = np.abs(lam.imag[neg]) if len(neg) else np.abs(lam.imag)
    x_max = float(np.log(1e12) / np.min(rates))
    nodes, weights = _gauss_panels(x_max, panels, order)
    mesh = np.concatenate([[0.0], nodes, [x_max]])
    n_mesh = len(mesh)

    m = bp.boundary_condition(p, freq)
    g_vec = np.atleast_1d(np.asarray(g, dtype=complex))

    w_part = np.zeros((n_mesh, n), dtype=complex)
    if forcing is not None:
        ref_x, ref_w = np.polynomial.legendre.leggauss(inner_order)
        lam_neg, lam_pos = lam[neg], lam[pos]
        gaps = []
        for k in range(n_mesh - 1):
            lo, hi = mesh[k], mesh[k + 1]
            half = 0.5 * (hi - lo)
            s_pts = 0.5 * (hi + lo) + half * ref_x
            s_w = half * ref_w
            phi = np.array(
                [np.asarray(forcing(s), dtype=complex) for s in s_pts]
            ) @ x_inv.T
            gaps.append((lo, hi, s_pts, s_w, phi))
        if len(neg):
            # forward sweep: decaying modes accumulate from the wall
            for k, (lo, hi, s_pts, s_w, phi) in enumerate(gaps):
                kern = np.exp(-1j * np.outer(hi - s_pts, lam_neg))
                gap = (s_w[:, None] * kern * phi[:, neg]).sum(axis=0)
                w_part[k + 1, neg] = (
                    np.exp(-1j * lam_neg * (hi - lo)) * w_part[k, neg] + gap
                )
        if len(pos):
            # backward sweep: growing modes accumulate from the truncation
            # point, where the neglected tail is below the decay floor
            for k in range(n_mesh - 2, -1, -1):
                lo, hi, s_pts, s_w, phi = gaps[k]
                kern = np.exp(-1j * np.outer(lo - s_pts, lam_pos))
                gap = (s_w[:, None] * kern * phi[:, pos]).sum(axis=0)
                w_part[k, pos] = (
                    np.exp(-1j * lam_pos * (lo - hi)) * w_part[k + 1, pos] - gap
                )
        f_nodes = np.array(
            [np.asarray(forcing(x), dtype=complex) for x in nodes]
        )
    else:
        f_nodes = np.zeros((len(nodes), n), dtype=complex)

    u0_part = x_modes @ w_part[0]

    v_minus = x_modes[:, neg]
    m_minus = m @ v_minus
    if m_minus.shape[0] != m_minus.shape[1]:
        raise LopatinskiFailureAtPoint(
            f"boundary condition has {m_minus.shape[0]} rows for "
            f"{m_minus.shape[1]} stable modes"
        )
    if m_minus.size:
        sv = np.linalg.svd(m_minus, compute_uv=False)
        if sv[-1] <= 1e-10 * max(1.0, sv[0]):
            raise LopatinskiFailureAtPoint(
                "boundary condition is singular on the stable subspace"
            )
        y = np.linalg.solve(m_minus, g_vec - m @ u0_part)
    else:
        y = np.zeros(0, dtype=complex)

    w_total = w_part[1:-1].copy()
    if len(y):
        w_total[:, neg] += np.exp(-1j * np.outer(nodes, lam[neg])) * y
    u_nodes = w_total @ x_modes.T
    u0 = u0_part + (v_minus @ y if len(y) else 0.0)

    interior = float(np.sum(weights * np.sum(np.abs(u_nodes) ** 2, axis=1)))
    forcing_norm = float(
        np.sum(weights * np.sum(np.abs(f_nodes) ** 2, axis=1))
    )
    boundary = float(np.sum(np.abs(u0) ** 2))
    datum = float(np.sum(np.abs(g_vec) ** 2))
    return EstimateProbe(
        gamma=freq.gamma,
        x_nodes=nodes,
        f_samples=f_nodes,
        g=g_vec,
        u0=u0,
        interior_norm_sq=interior,
        boundary_norm_sq=boundary,
        forcing_norm_sq=forcing_norm,
        datum_norm_sq=datum,
        degenerate=(forcing_norm == 0.0 and datum == 0.0),
    )


def report_to_json(report, path) -> None:
    """Serialize a verification report, converting arrays and frequencies."""

    def clean(obj):
        if isinstance(obj, dict):
            return {k: clean(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [clean(v) for v in obj]
        if isinstance(obj, Frequency):
            return {"tau": obj.tau, "eta": list(obj.eta), "gamma": obj.gamma}
        if isinstance(obj, np.ndarray):
            if np.iscomplexobj(obj):
                return {"re": obj.real.tolist(), "im": obj.imag.tolist()}
            return obj.tolist()
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        if isinstance(obj, float) and not np.isfinite(obj):
            return repr(obj)
        return obj

    with open(path, "w") as fh:
        json.dump(clean(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
