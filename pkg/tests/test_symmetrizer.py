"""Symmetrizer verification, closed-form constructions, and the energy probe."""
from __future__ import annotations

import json

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import normal_form_system, random_friedrichs_family
from hypstab.boundary import Frequency, build_G, constant_boundary_problem
from hypstab.errors import (
    AssumptionFailure,
    InternalInconsistency,
    LopatinskiFailureAtPoint,
    NotApplicable,
    NotMixedSign,
    NotStrictlyHyperbolic,
)
from hypstab.symbol import HyperbolicSystem
from hypstab.symmetrizer import (
    SymmetrizerCandidate,
    dissipative_symmetrizer,
    estimate_probe,
    report_to_json,
    sign_check,
    totally_nonglancing_symmetrizer,
    two_by_two_lopatinski,
    two_by_two_normal_form,
    two_by_two_symmetrizer,
    verify_k_family,
    verify_kreiss,
    verify_symmetrizer,
)

OFFDIAG = np.array([[0.0, 1.0], [1.0, 0.0]])


def cone_system(c=0.7):
    a1 = np.array([[1.0, 0.0], [0.0, -1.0]])
    a2 = np.array([[0.0, 1.0], [1.0, 0.0]])
    a3 = c * np.eye(2)
    return HyperbolicSystem(
        n=2, d=3, coeff=lambda p: [a1, a2, a3], symmetrizer=lambda p: np.eye(2)
    )


def random_frequencies(rng, d, count, gamma_lo=1e-2, gamma_hi=1.0):
    out = []
    for _ in range(count):
        tau = rng.uniform(-2, 2)
        eta = tuple(rng.uniform(-2, 2, size=d - 1))
        out.append(Frequency(tau, eta, float(rng.uniform(gamma_lo, gamma_hi))))
    return out


def normal_form_reduction(a: float):
    """Normal form with parameter a, built through the reduction itself."""
    return two_by_two_normal_form(np.diag([a * a, -1.0]), OFFDIAG)


class TestDissipative:
    def test_friedrichs_product_identity(self, rng):
        # Im((-S A_d) G) equals gamma S for every frequency, not just
        # approximately: the tangential terms cancel exactly
        for _ in range(5):
            s, mats = random_friedrichs_family(rng, 4, 3)
            sys = HyperbolicSystem(
                n=4, d=3, coeff=lambda p, m=mats: m, symmetrizer=lambda p, w=s: w
            )
            cand = dissipative_symmetrizer(sys, None)
            for z in random_frequencies(rng, 3, 6):
                sig = cand(None, z)
                prod = sig @ build_G(sys, None, z)
                im_part = (prod - prod.conj().T) / 2j
                resid = np.linalg.norm(im_part - z.gamma * s)
                assert resid < 1e-12 * max(1.0, np.linalg.norm(z.gamma * s))

    def test_verify_passes_with_tight_margin(self, rng):
        s, mats = random_friedrichs_family(rng, 3, 2)
        sys = HyperbolicSystem(
            n=3, d=2, coeff=lambda p: mats, symmetrizer=lambda p: s
        )
        cand = dissipative_symmetrizer(sys, None)
        report = verify_symmetrizer(cand, sys, random_frequencies(rng, 2, 12))
        assert report["passed"]
        # c = min eig S is attained, so the worst margin sits at rounding level
        assert abs(report["worst_margin"]) < 1e-9

    def test_sign_lemma_on_stable_space(self, rng):
        s, mats = random_friedrichs_family(rng, 4, 2)
        sys = HyperbolicSystem(
            n=4, d=2, coeff=lambda p: mats, symmetrizer=lambda p: s
        )
        cand = dissipative_symmetrizer(sys, None)
        report = sign_check(cand, sys, random_frequencies(rng, 2, 10))
        assert report["passed"]
        assert report["worst"] < 0

    def test_sign_check_implied_by_verify(self, rng):
        # no sample may pass the symmetrizer inequalities and then fail the
        # stable-space negativity check
        for n, d in [(2, 2), (3, 2), (4, 3)]:
            s, mats = random_friedrichs_family(rng, n, d)
            sys = HyperbolicSystem(
                n=n, d=d, coeff=lambda p, m=mats: m, symmetrizer=lambda p, w=s: w
            )
            cand = dissipative_symmetrizer(sys, None)
            samples = random_frequencies(rng, d, 8)
            ver = verify_symmetrizer(cand, sys, samples)
            sgn = sign_check(cand, sys, samples)
            for row_v, row_s in zip(ver["samples"], sgn["samples"]):
                if row_v["coercive_ok"] and row_v["norm_ok"]:
                    assert row_s["negative"]


class TestVerifySymmetrizer:
    def test_zero_candidate_fails(self):
        sys = normal_form_system(1.0)
        cand = SymmetrizerCandidate(
            sampler=lambda p, z: np.zeros((2, 2)), c=0.5, C=1.0
        )
        report = verify_symmetrizer(cand, sys, [Frequency(0.4, (0.2,), 0.3)])
        assert not report["passed"]
        assert report["failing"]

    def test_wrong_sign_fails(self):
        g_source = lambda p, z: 1j * np.eye(2)
        cand = SymmetrizerCandidate(
            sampler=lambda p, z: -np.eye(2), c=0.1, C=2.0
        )
        report = verify_symmetrizer(cand, g_source, [Frequency(0.0, (0.0,), 0.5)])
        assert not report["passed"]
        # Im((-Id)(i Id)) = -Id: coercivity is exactly -1
        assert report["samples"][0]["coercivity"] == pytest.approx(-1.0)

    def test_non_hermitian_sampler_rejected(self):
        cand = SymmetrizerCandidate(
            sampler=lambda p, z: np.array([[0.0, 1.0], [0.0, 0.0]]), c=0.1, C=1.0
        )
        with pytest.raises(InternalInconsistency, match="Hermitian"):
            verify_symmetrizer(
                cand, lambda p, z: np.eye(2), [Frequency(0.0, (0.0,), 0.5)]
            )

    def test_gamma_zero_sample_rejected(self):
        sys = normal_form_system(1.0)
        cand = dissipative_symmetrizer(sys, None)
        with pytest.raises(ValueError):
            verify_symmetrizer(cand, sys, [Frequency(1.0, (0.0,), 0.0)])


class TestVerifyKreiss:
    def oblique(self, a, c):
        sys = normal_form_system(a)
        return sys, constant_boundary_problem(sys, np.array([[1.0, -c]]))

    def test_dissipative_condition_passes(self):
        sys, bp = self.oblique(1.0, 0.5)
        cand = dissipative_symmetrizer(sys, None)
        report = verify_kreiss(
            cand, bp, [Frequency(0.3, (0.4,), 0.2), Frequency(-1.0, (0.0,), 0.6)]
        )
        assert report["passed"]
        assert report["worst_kernel_margin"] > 0
        assert report["worst_full_margin"] > 0

    def test_kernel_touching_negative_cone_fails(self):
        # |c| > 1 puts ker M inside the negative cone of -S A_d for a = 1
        sys, bp = self.oblique(1.0, 1.5)
        cand = dissipative_symmetrizer(sys, None)
        report = verify_kreiss(cand, bp, [Frequency(0.3, (0.4,), 0.2)])
        assert not report["passed"]
        assert report["worst_kernel_margin"] < 0

    def test_appendix_model_passes_inside_cone(self):
        # a |c| < 1 is equivalent to maximal dissipativity here, so the
        # dissipative symmetrizer certifies the boundary coercivity
        sys, bp = self.oblique(2.0, 0.4)
        cand = dissipative_symmetrizer(sys, None)
        report = verify_kreiss(
            cand, bp, [Frequency(-0.7, (0.5,), 0.1), Frequency(0.2, (-0.3,), 1.0)]
        )
        assert report["passed"]
        # kernel compression of diag(-2, 1/2) at ker (1, -0.4):
        # (-2 * 0.16 + 0.5) / 1.16
        expected = (0.5 - 2 * 0.16) / 1.16
        assert report["worst_kernel_margin"] == pytest.approx(expected, rel=1e-9)

    def test_routes_agree_across_the_cone_boundary(self):
        for c in (0.0, 0.3, 0.7, 1.2, 2.0):
            sys, bp = self.oblique(1.0, c)
            cand = dissipative_symmetrizer(sys, None)
            report = verify_kreiss(cand, bp, [Frequency(0.5, (0.2,), 0.3)])
            row = report["samples"][0]
            assert (row["full_margin"] > 0) == (row["kernel_margin"] > 0)


class TestKFamily:
    def test_elliptic_family_grows_linearly(self):
        sigma = np.diag([2.0, 3.0])
        family = {
            k: SymmetrizerCandidate(
                sampler=lambda p, z, kk=k: kk * sigma, c=0.1, C=10.0 * k
            )
            for k in (1.0, 2.0, 4.0, 8.0, 16.0)
        }
        report = verify_k_family(
            family,
            lambda p, z: 1j * np.eye(2),
            lambda p, z: np.zeros((2, 2)),
            [Frequency(0.0, (0.0,), 0.5)],
        )
        assert report["passed"]
        assert report["increasing"]
        # largest m with k Sigma - m Id >= 0 is k * min eig Sigma = 2k
        slopes = [m / k for m, k in zip(report["m_values"], report["kappas"])]
        assert np.allclose(slopes, 2.0, rtol=1e-6)

    def test_constant_mixed_sign_family_bounded(self):
        sigma = np.diag([-1.0, 1.0])
        family = {
            k: SymmetrizerCandidate(sampler=lambda p, z: sigma, c=0.1, C=2.0)
            for k in (1.0, 4.0, 16.0)
        }
        report = verify_k_family(
            family,
            lambda p, z: 1j * np.eye(2),
            lambda p, z: np.diag([1.0, 0.0]),
            [Frequency(0.0, (0.0,), 0.5)],
        )
        assert not report["passed"]
        assert np.allclose(report["m_values"], 1.0, rtol=1e-6)
        assert report["max_projector_norm"] == pytest.approx(1.0)

    def test_incoming_block_needs_no_growth(self):
        # every mode of a totally incoming block is stable for gamma > 0, so
        # the unstable weight vanishes and any m works
        sys = cone_system(0.7)
        cand, info = totally_nonglancing_symmetrizer(
            sys, None, Frequency(-0.7, (0.0, 0.0), 0.0), 1.0
        )
        assert info["kappa_rule"] == "constant"
        family = {k: cand for k in (1.0, 2.0, 4.0)}
        samples = [Frequency(-0.68, (0.02, 0.0), 0.1)]
        report = verify_k_family(
            family, lambda p, z: build_G(sys, p, z), None, samples
        )
        assert report["passed"]


class TestTwoByTwoNormalForm:
    def test_already_normal(self):
        nf = two_by_two_normal_form(np.diag([1.0, -1.0]), OFFDIAG)
        assert nf.a == pytest.approx(1.0)
        assert np.allclose(nf.basis, np.eye(2), atol=1e-12)
        assert nf.shear == pytest.approx((0.0, 0.0))
        assert nf.scales == pytest.approx((1.0, 1.0))

    def test_speed_two(self):
        nf = two_by_two_normal_form(np.diag([2.0, -1.0]), OFFDIAG)
        assert nf.a == pytest.approx(np.sqrt(2.0))
        assert nf.reconstruction_residual() < 1e-10

    def test_symmetric_trace_free_gives_unit_speed(self):
        a = np.array([[0.6, 0.8], [0.8, -0.6]])
        nf = two_by_two_normal_form(a, OFFDIAG)
        assert nf.a == pytest.approx(1.0)

    def test_random_conjugated_pairs_reduce(self, rng):
        for _ in range(20):
            a1 = rng.uniform(0.3, 3.0)
            a2 = -rng.uniform(0.3, 3.0)
            v = rng.standard_normal((2, 2))
            while abs(np.linalg.det(v)) < 0.3:
                v = rng.standard_normal((2, 2))
            d_b = np.array(
                [
                    [rng.uniform(-1, 1), rng.uniform(0.2, 2.0)],
                    [rng.uniform(0.2, 2.0), rng.uniform(-1, 1)],
                ]
            )
            a_mat = v @ np.diag([a1, a2]) @ np.linalg.inv(v)
            b_mat = v @ d_b @ np.linalg.inv(v)
            nf = two_by_two_normal_form(a_mat, b_mat)
            assert nf.a == pytest.approx(np.sqrt(-a1 / a2), rel=1e-9)
            assert nf.reconstruction_residual() < 1e-9

    def test_same_sign_speeds_rejected(self):
        with pytest.raises(NotMixedSign):
            two_by_two_normal_form(np.diag([1.0, 2.0]), OFFDIAG)

    def test_rotation_rejected(self):
        with pytest.raises(NotMixedSign):
            two_by_two_normal_form(np.array([[0.0, 1.0], [-1.0, 0.0]]), OFFDIAG)

    def test_negative_coupling_rejected(self):
        with pytest.raises(NotStrictlyHyperbolic):
            two_by_two_normal_form(
                np.diag([1.0, -1.0]), np.array([[0.0, 1.0], [-1.0, 0.0]])
            )


class TestTwoByTwoLopatinski:
    @pytest.mark.parametrize(
        "a,c,expected",
        [
            (1.0, 0.0, True),
            (1.0, 0.99, True),
            (1.0, 1.0, False),
            (2.0, 0.4, True),
            (2.0, 0.6, False),
            (0.5, 1.9, True),
            (0.5, 2.1, False),
        ],
    )
    def test_cone_criterion(self, a, c, expected):
        nf = normal_form_reduction(a)
        assert two_by_two_lopatinski(nf, c) is expected

    def test_complex_condition(self):
        nf = normal_form_reduction(1.0)
        assert two_by_two_lopatinski(nf, 0.5 + 0.5j) is True
        assert two_by_two_lopatinski(nf, 0.9 + 0.9j) is False

    def test_stable_line_parameter_in_unit_disk(self):
        # z = eta / (mu + a*(tau - i gamma)) stays strictly inside the unit
        # disk for gamma > 0, and (1, -a z) spans the stable line
        for a in (0.5, 1.0, 1.7):
            for tau in (-1.0, -0.4, 0.3, 0.9):
                for eta in (-0.9, -0.2, 0.5, 1.0):
                    for gamma in (1e-3, 0.1, 0.7):
                        tt = tau - 1j * gamma
                        g = np.array(
                            [[tt / a, eta / a], [-a * eta, -a * tt]]
                        )
                        lam, vec = np.linalg.eig(g)
                        i_stab = int(np.argmin(lam.imag))
                        mu = lam[i_stab]
                        z = eta / (mu + a * tt)
                        assert abs(z) < 1.0
                        r = np.array([1.0, -a * z])
                        assert np.linalg.norm(g @ r - mu * r) < 1e-9


class TestTwoByTwoSymmetrizer:
    @staticmethod
    def split_block(a, phi=0.4):
        g0 = np.diag([1.0 / a, -a])
        g1 = np.array([[0.0, 1.0 / a], [-a, 0.0]])

        def sampler(dt, de, dg):
            return phi * np.eye(2) + (dt - 1j * dg) * g0 + de * g1

        return sampler, g0, g1

    def test_normal_form_diagonal_value(self):
        a = 1.6
        sampler, g0, g1 = self.split_block(a)
        cand, info = two_by_two_symmetrizer(sampler)
        assert info["alpha"] == pytest.approx(a * a, rel=1e-5)
        assert info["delta"] == pytest.approx(-1.0, rel=1e-5)
        # diag(a^2, -1) is a positive multiple of diag(a, -1/a)
        d_sig = np.diag(info["diagonal_base"])
        diag_ratios = d_sig / np.array([a, -1.0 / a])
        assert diag_ratios[0] == pytest.approx(diag_ratios[1], rel=1e-5)
        assert diag_ratios[0] > 0
        assert info["alpha"] * info["delta"] < 0
        assert info["observed_rate"] > 0

    def test_product_with_g0_positive_definite(self):
        sampler, _, _ = self.split_block(0.7)
        _, info = two_by_two_symmetrizer(sampler)
        e_eigs = np.linalg.eigvalsh(info["e_base"])
        assert np.min(e_eigs) > 0

    def test_conjugated_block_accepted(self):
        t = np.array([[1.0, 0.5], [-0.3, 1.2]])
        t_inv = np.linalg.inv(t)
        sampler, _, _ = self.split_block(1.3)

        def conj_sampler(dt, de, dg):
            return t @ sampler(dt, de, dg) @ t_inv

        cand, info = two_by_two_symmetrizer(conj_sampler)
        assert info["alpha"] * info["delta"] < 0
        assert info["observed_rate"] > 0
        sig = cand(None, None)
        assert np.linalg.norm(sig - sig.conj().T) < 1e-10

    def test_positive_determinant_rejected(self):
        def sampler(dt, de, dg):
            return (dt - 1j * dg) * np.diag([1.0, 2.0]) + de * OFFDIAG

        with pytest.raises(AssumptionFailure, match="determinant"):
            two_by_two_symmetrizer(sampler)

    def test_wrong_gamma_structure_rejected(self):
        g0 = np.diag([1.0, -1.0])

        def sampler(dt, de, dg):
            return (dt + 1j * dg) * g0 + de * np.array([[0.0, 1.0], [-1.0, 0.0]])

        with pytest.raises(AssumptionFailure, match="structure"):
            two_by_two_symmetrizer(sampler)

    def test_nonscalar_base_rejected(self):
        sampler_good, g0, g1 = self.split_block(1.0)

        def sampler(dt, de, dg):
            return sampler_good(dt, de, dg) + np.diag([0.1, -0.1])

        with pytest.raises(AssumptionFailure, match="base point"):
            two_by_two_symmetrizer(sampler)

    def test_positive_coupling_rejected(self):
        def sampler(dt, de, dg):
            return (dt - 1j * dg) * np.diag([1.0, -1.0]) + de * OFFDIAG

        with pytest.raises(AssumptionFailure, match="hyperbolicity"):
            two_by_two_symmetrizer(sampler)

    def test_complex_derivative_rejected(self):
        def sampler(dt, de, dg):
            return (dt - 1j * dg) * np.diag([1.0, -1.0]) + de * np.array(
                [[0.0, 1.0 + 0.5j], [-1.0, 0.0]]
            )

        with pytest.raises(AssumptionFailure, match="real"):
            two_by_two_symmetrizer(sampler)


class TestTotallyNonglancing:
    def test_incoming_cone_block(self):
        sys = cone_system(0.7)
        base = Frequency(-0.7, (0.0, 0.0), 0.0)
        cand, info = totally_nonglancing_symmetrizer(sys, None, base, 1.0)
        assert info["orientation"] == "incoming"
        assert info["kappa_rule"] == "constant"
        assert np.all(info["base_eigenvalues"] < 0)
        assert np.all(info["tangent_eigenvalues"] > 0)
        assert info["spectrum_gap"] < 1e-9

    def test_outgoing_cone_block(self):
        sys = cone_system(-0.7)
        base = Frequency(0.7, (0.0, 0.0), 0.0)
        cand, info = totally_nonglancing_symmetrizer(sys, None, base, 1.0)
        assert info["orientation"] == "outgoing"
        assert info["kappa_rule"] == "linear"
        assert np.all(info["base_eigenvalues"] > 0)
        assert np.all(info["tangent_eigenvalues"] < 0)

    def test_strict_sub_block_verified(self):
        # double root separated from a third simple mode: the block frames a
        # proper 2-dimensional invariant subspace of the 3x3 boundary symbol
        a1 = np.diag([1.0, -1.0, 0.0])
        a2 = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        a3 = np.diag([0.7, 0.7, -2.0])
        sys = HyperbolicSystem(
            n=3, d=3, coeff=lambda p: [a1, a2, a3], symmetrizer=lambda p: np.eye(3)
        )
        base = Frequency(-0.7, (0.0, 0.0), 0.0)
        samples = [
            Frequency(-0.7, (0.01, -0.02), 0.05),
            Frequency(-0.66, (0.0, 0.03), 0.15),
        ]
        cand, info = totally_nonglancing_symmetrizer(
            sys, None, base, 1.0, samples=samples
        )
        assert info["block_size"] == 2
        assert info["orientation"] == "incoming"
        assert info["verification"]["passed"]
        # the coercivity identity Im(Sigma_k G_k) = gamma V*SV is exact, and
        # with S = Id the advertised constant is attained
        assert abs(info["verification"]["worst_margin"]) < 1e-9

    def test_mixed_block_not_applicable(self):
        a1 = np.eye(2)
        a2 = np.zeros((2, 2))
        a3 = np.diag([1.0, -1.0])
        sys = HyperbolicSystem(
            n=2, d=3, coeff=lambda p: [a1, a2, a3], symmetrizer=lambda p: np.eye(2)
        )
        with pytest.raises(NotApplicable):
            totally_nonglancing_symmetrizer(
                sys, None, Frequency(-1.0, (1.0, 0.0), 0.0), 0.0
            )

    def test_glancing_root_not_applicable(self):
        sys = HyperbolicSystem(
            n=2,
            d=2,
            coeff=lambda p: [OFFDIAG, np.diag([1.0, -1.0])],
            symmetrizer=lambda p: np.eye(2),
        )
        with pytest.raises(NotApplicable):
            totally_nonglancing_symmetrizer(
                sys, None, Frequency(1.0, (1.0,), 0.0), 0.0
            )

    def test_gamma_positive_base_rejected(self):
        sys = cone_system(0.7)
        with pytest.raises(ValueError):
            totally_nonglancing_symmetrizer(
                sys, None, Frequency(-0.7, (0.0, 0.0), 0.1), 1.0
            )


class TestEstimateProbe:
    def scalar_problem(self, a=1.7):
        sys1 = HyperbolicSystem(n=1, d=1, coeff=lambda p: [np.array([[a]])])
        return sys1, constant_boundary_problem(sys1, np.array([[1.0]]))

    def test_scalar_closed_form(self):
        a = 1.7
        _, bp = self.scalar_problem(a)
        tau, gamma = 0.6, 0.35
        g_sym = (tau - 1j * gamma) / a
        g_dat = 2.3 - 0.7j
        probe = estimate_probe(
            bp,
            None,
            Frequency(tau, (), gamma),
            lambda x: np.array([np.exp(-x)]),
            [g_dat],
        )

        def u(x):
            return np.exp(-1j * g_sym * x) * g_dat + (
                np.exp(-x) - np.exp(-1j * g_sym * x)
            ) / (1j * g_sym - 1)

        assert probe.u0[0] == pytest.approx(u(0.0), rel=1e-10)
        x_top = np.log(1e12) / (gamma / a)
        interior = quad(lambda x: abs(u(x)) ** 2, 0, x_top, limit=400)[0]
        assert probe.interior_norm_sq == pytest.approx(interior, rel=1e-9)
        assert probe.forcing_norm_sq == pytest.approx(0.5, rel=1e-9)
        assert not probe.degenerate

    def test_two_mode_closed_form(self):
        # eta = 0 decouples the unit-speed model into scalar modes, one
        # decaying and one growing; the boundary condition couples them
        sys = normal_form_system(1.0)
        c = 0.5
        bp = constant_boundary_problem(sys, np.array([[1.0, -c]]))
        tau, gamma = 0.8, 0.25
        lt = tau - 1j * gamma
        lg = -lt
        g_dat = 1.1 + 0.4j
        probe = estimate_probe(
            bp,
            None,
            Frequency(tau, (0.0,), gamma),
            lambda x: np.array([np.exp(-x), np.exp(-2.0 * x)]),
            [g_dat],
        )

        def u2(x):
            return np.exp(-2 * x) / (1j * lg - 2)

        h = g_dat + c * u2(0.0)

        def u1(x):
            return np.exp(-1j * lt * x) * h + (
                np.exp(-x) - np.exp(-1j * lt * x)
            ) / (1j * lt - 1)

        assert probe.u0[0] == pytest.approx(u1(0.0), rel=1e-10)
        assert probe.u0[1] == pytest.approx(u2(0.0), rel=1e-10)
        x_top = np.log(1e12) / gamma
        interior = (
            quad(lambda x: abs(u1(x)) ** 2, 0, x_top, limit=600)[0]
            + quad(lambda x: abs(u2(x)) ** 2, 0, x_top, limit=600)[0]
        )
        assert probe.interior_norm_sq == pytest.approx(interior, rel=1e-9)

    def test_degenerate_data_returns_zero(self):
        _, bp = self.scalar_problem()
        probe = estimate_probe(bp, None, Frequency(0.6, (), 0.35), None, [0.0])
        assert probe.ratio == 0.0
        assert probe.degenerate

    def test_datum_only_solution(self):
        sys = normal_form_system(1.0)
        bp = constant_boundary_problem(sys, np.array([[1.0, -0.3]]))
        probe = estimate_probe(bp, None, Frequency(0.5, (0.2,), 0.4), None, [1.0])
        assert probe.forcing_norm_sq == 0.0
        assert probe.ratio > 0
        assert np.isfinite(probe.ratio)

    def test_singular_boundary_condition_raises(self):
        # align ker M with the stable line at one frequency: the bounded
        # solution cannot match generic data there
        tau, eta, gamma = 0.3, 0.8, 0.2
        tt = tau - 1j * gamma
        g = np.array([[tt, eta], [-eta, -tt]])
        lam, vec = np.linalg.eig(g)
        i_stab = int(np.argmin(lam.imag))
        r = vec[:, i_stab]
        c_bad = r[1] / r[0]  # M = (c_bad, -1)? choose M annihilating r
        m_bad = np.array([[1.0, -r[0] / r[1]]])
        sys = normal_form_system(1.0)
        bp = constant_boundary_problem(sys, m_bad)
        with pytest.raises(LopatinskiFailureAtPoint):
            estimate_probe(
                bp, None, Frequency(tau, (eta,), gamma), None, [1.0]
            )

    def test_ratio_grows_toward_cone_boundary(self):
        # near the glancing direction tau = -eta the stable line points
        # almost along (1, 1), so the margin of (1, -c) shrinks like 1 - c
        # and the measured ratio blows up as c approaches the cone boundary
        sys = normal_form_system(1.0)
        zeta = Frequency(-1.0, (1.0,), 0.01)
        forcing = lambda x: np.array([np.exp(-0.7 * x), 0.3 * np.exp(-1.3 * x)])
        ratios = []
        for c in (0.0, 0.5, 0.9, 0.99):
            bp = constant_boundary_problem(sys, np.array([[1.0, -c]]))
            probe = estimate_probe(bp, None, zeta, forcing, [0.8 - 0.2j])
            ratios.append(probe.ratio)
        assert all(b > a for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] > 10 * ratios[0]


class TestReportExport:
    def test_json_export_deterministic(self, rng, tmp_path):
        s, mats = random_friedrichs_family(rng, 3, 2)
        sys = HyperbolicSystem(
            n=3, d=2, coeff=lambda p: mats, symmetrizer=lambda p: s
        )
        cand = dissipative_symmetrizer(sys, None)
        report = verify_symmetrizer(cand, sys, random_frequencies(rng, 2, 4))
        p1 = tmp_path / "report1.json"
        p2 = tmp_path / "report2.json"
        report_to_json(report, p1)
        report_to_json(report, p2)
        assert p1.read_bytes() == p2.read_bytes()
        loaded = json.loads(p1.read_text())
        assert loaded["passed"] is True
        assert len(loaded["samples"]) == 4
