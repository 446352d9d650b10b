"""Bundled models: MHD wave structure, Lax shocks with the front-coupled
determinant, and the biaxial crystal's conical points."""
import json
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import euler_limit_point, mhd_stratum_point
from hypstab.boundary import Frequency, build_G, negative_space, positive_count
from hypstab.classify import classify_root, multiplicities, tangent_system
from hypstab.errors import (
    FrontDegeneracy,
    NotCharacteristic,
    NotLaxType,
    NotSemiSimple,
    Singular,
)
from hypstab.lopatinski import half_sphere_grid, lopatinski_det
from hypstab.models import (
    BiaxialCrystal,
    GammaLaw,
    MHDState,
    ShockProblem,
    conserved_flux,
    conserved_flux_jacobian,
    conserved_state,
    conserved_state_jacobian,
    construct_lax_shock,
    continued_shock,
    coordinate_scaling,
    cross_matrix,
    discriminant_split,
    dispersion_determinant,
    euler_system,
    fresnel_coefficients,
    householder_frame,
    lax_dimensions,
    majda_lopatinski,
    maxwell_biaxial_system,
    maxwell_double_roots,
    mhd_eigenvalues,
    mhd_system,
    noncharacteristic_margin,
    optic_axes,
    pencil_stable_space,
    rh_residual,
    shock_boundary_problem,
    shock_from_json,
    side_system,
    wave_speeds,
)
from hypstab.models import build as build_model
from hypstab.symbol import assemble, check_friedrichs, registered_system

LAW = GammaLaw(k=0.6, exponent=5.0 / 3.0)  # sound speed exactly 1 at rho = 1

MHD = mhd_system()


def random_state(rng, with_field=True):
    law = GammaLaw(
        k=float(rng.uniform(0.2, 2.0)), exponent=float(rng.uniform(1.1, 2.5))
    )
    field = tuple(rng.uniform(-5.0, 5.0, 3)) if with_field else (0.0, 0.0, 0.0)
    return MHDState(
        rho=float(rng.uniform(0.1, 10.0)),
        u=tuple(rng.uniform(-5.0, 5.0, 3)),
        H=field,
        pressure_law=law,
    )


def euler_mach2_shock():
    up = MHDState(1.0, (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), LAW)
    return construct_lax_shock(up, "fast", strength=1.0)


def rotation(rng) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


# ------------------------------------------------------------- wave speeds


class TestWaveStructure:
    def test_state_validation(self):
        with pytest.raises(ValueError):
            MHDState(-1.0, (0, 0, 0), (0, 0, 0), LAW)
        with pytest.raises(ValueError):
            GammaLaw(k=0.5, exponent=0.9)
        with pytest.raises(ValueError):
            wave_speeds(MHDState(1.0, pressure_law=LAW), (0.0, 0.0, 0.0))

    def test_hand_checked_point(self):
        # rho = 1, c = 1, H = e_1, omega = e_3: a = 0, b = 1, c_f = sqrt(2)
        state = MHDState(1.0, (0, 0, 0), (1.0, 0, 0), LAW)
        got = np.sort(mhd_eigenvalues(state, (0, 0, 1)))
        want = np.array([-np.sqrt(2.0), 0, 0, 0, 0, 0, np.sqrt(2.0)])
        assert np.max(np.abs(got - want)) < 1e-14

    def test_zero_field_closed_form(self, rng):
        for _ in range(20):
            state = random_state(rng, with_field=False)
            omega = rng.uniform(-2, 2, 3)
            lam0 = float(np.array(state.u) @ omega)
            gap = np.sqrt(state.sound_speed_sq) * np.linalg.norm(omega)
            want = np.sort([lam0] * 5 + [lam0 - gap, lam0 + gap])
            got = np.sort(mhd_eigenvalues(state, omega))
            assert np.max(np.abs(got - want)) < 1e-10 * max(1.0, abs(lam0) + gap)

    def test_parallel_field_pairing(self):
        # omega parallel to H: the signed field speed collides with the
        # slow pair below |H|^2 = rho c^2 and with the fast pair above
        weak = MHDState(1.0, (0.3, -0.1, 0.2), (0.0, 0.0, 0.5), LAW)
        speeds = wave_speeds(weak, (0, 0, 1))
        assert abs(abs(speeds["alfven"]) - speeds["slow"]) < 1e-14
        strong = MHDState(1.0, (0.3, -0.1, 0.2), (0.0, 0.0, 2.0), LAW)
        speeds = wave_speeds(strong, (0, 0, 1))
        assert abs(abs(speeds["alfven"]) - speeds["fast"]) < 1e-14

    def test_matches_eigensolver(self, rng):
        worst = 0.0
        for _ in range(200):
            state = random_state(rng)
            omega = rng.uniform(-1, 1, 3)
            if np.linalg.norm(omega) < 1e-2:
                continue
            closed = np.sort(mhd_eigenvalues(state, omega))
            numeric = np.sort(np.linalg.eigvals(assemble(MHD, state, omega)).real)
            scale = max(1.0, float(np.max(np.abs(closed))))
            worst = max(worst, float(np.max(np.abs(closed - numeric))) / scale)
        assert worst < 1e-9

    @given(
        rho=st.floats(0.1, 10.0),
        hx=st.floats(-5.0, 5.0),
        hz=st.floats(-5.0, 5.0),
        wx=st.floats(-1.0, 1.0),
        wz=st.floats(0.1, 1.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_speed_orderings(self, rho, hx, hz, wx, wz):
        state = MHDState(rho, (0, 0, 0), (hx, 0.0, hz), LAW)
        omega = np.array([wx, 0.3, wz])
        speeds = wave_speeds(state, omega)
        unit = omega / np.linalg.norm(omega)
        a = float(unit @ state.h_vec) / np.sqrt(rho)
        b_sq = float(np.cross(unit, state.h_vec) @ np.cross(unit, state.h_vec)) / rho
        c_sq = state.sound_speed_sq
        norm = np.linalg.norm(omega)
        slack = 1e-12 * max(1.0, c_sq + a * a + b_sq) * norm * norm
        assert speeds["slow"] ** 2 <= min(a * a, c_sq) * norm**2 + slack
        assert speeds["fast"] ** 2 >= max(a * a, c_sq) * norm**2 - slack
        # the fast speed also dominates c^2 + b^2, which keeps the
        # gas-dynamic jump bracket monotone
        assert speeds["fast"] ** 2 >= (c_sq + b_sq) * norm**2 - slack

    def test_constraint_mode(self, rng):
        for _ in range(10):
            state = random_state(rng)
            xi = rng.uniform(-2, 2, 3)
            mode = np.zeros(7)
            mode[4:] = xi / np.linalg.norm(xi)
            image = assemble(MHD, state, xi) @ mode
            lam0 = float(np.array(state.u) @ xi)
            assert np.max(np.abs(image - lam0 * mode)) < 1e-12 * max(1.0, abs(lam0))

    def test_friedrichs_property(self, rng):
        for _ in range(10):
            state = random_state(rng)
            assert check_friedrichs(MHD, state).passed
        assert check_friedrichs(euler_system(), random_state(rng, False)).passed

    def test_noncharacteristic_margin_zero_at_sonic(self):
        state = MHDState(1.0, (0, 0, 0), (0, 0, 0), LAW)
        assert noncharacteristic_margin(state, 1.0) < 1e-14  # sigma = -c_f
        assert noncharacteristic_margin(state, 0.4) > 0.3


# ----------------------------------------------------- conservative fluxes


class TestConservativeForm:
    def test_flux_against_inline_formula(self, rng):
        for _ in range(20):
            state = random_state(rng)
            u = np.array(state.u)
            h = np.array(state.H)
            p_tot = state.pressure + 0.5 * float(h @ h)
            for j in range(3):
                e = np.zeros(3)
                e[j] = 1.0
                want = np.concatenate(
                    [
                        [state.rho * u[j]],
                        state.rho * u[j] * u + p_tot * e - h[j] * h,
                        u[j] * h - h[j] * u,
                    ]
                )
                got = conserved_flux(state, j)
                assert np.max(np.abs(got - want)) < 1e-12 * max(1.0, np.max(np.abs(want)))

    def test_state_vector(self, rng):
        state = random_state(rng)
        want = np.concatenate([[state.rho], state.rho * np.array(state.u), state.H])
        assert np.max(np.abs(conserved_state(state) - want)) == 0.0

    @staticmethod
    def _numeric_jacobian(func, x0, step=1e-6):
        cols = []
        for k in range(x0.size):
            dx = np.zeros_like(x0)
            dx[k] = step
            cols.append((func(x0 + dx) - func(x0 - dx)) / (2 * step))
        return np.column_stack(cols)

    def test_jacobians_match_finite_differences(self, rng):
        for _ in range(10):
            state = random_state(rng)
            x0 = np.concatenate([[state.rho], state.u, state.H])

            def of_vector(x, j=None):
                trial = MHDState(x[0], tuple(x[1:4]), tuple(x[4:7]), state.pressure_law)
                return conserved_state(trial) if j is None else conserved_flux(trial, j)

            scale = max(1.0, float(np.max(np.abs(x0))))
            fd = self._numeric_jacobian(of_vector, x0)
            assert np.max(np.abs(fd - conserved_state_jacobian(state))) < 1e-6 * scale
            for j in range(3):
                fd = self._numeric_jacobian(lambda x, j=j: of_vector(x, j), x0)
                exact = conserved_flux_jacobian(state, j)
                assert np.max(np.abs(fd - exact)) < 1e-5 * max(scale, np.max(np.abs(exact)))


# --------------------------------------------------------- jump conditions


class TestRankineHugoniot:
    def test_equal_states_zero(self, rng):
        state = random_state(rng)
        assert np.max(np.abs(rh_residual(state, state, 0.7, (0, 0, 1)))) == 0.0

    def test_antisymmetry(self, rng):
        a, b = random_state(rng), random_state(rng)
        fwd = rh_residual(a, b, 0.3, (0, 0, 1))
        bwd = rh_residual(b, a, 0.3, (0, 0, 1))
        assert np.max(np.abs(fwd + bwd)) < 1e-12 * max(1.0, np.max(np.abs(fwd)))

    def test_unrelated_states_nonzero(self, rng):
        a, b = random_state(rng), random_state(rng)
        assert np.max(np.abs(rh_residual(a, b, 0.0, (0, 0, 1)))) > 1e-3

    def test_rotation_invariance(self, rng):
        for _ in range(5):
            a, b = random_state(rng), random_state(rng)
            sigma = float(rng.uniform(-1, 1))
            n = rng.standard_normal(3)
            n /= np.linalg.norm(n)
            base = np.linalg.norm(rh_residual(a, b, sigma, n))
            rot = rotation(rng)

            def spin(s):
                return MHDState(
                    s.rho, tuple(rot @ s.u), tuple(rot @ s.H), s.pressure_law
                )

            turned = np.linalg.norm(rh_residual(spin(a), spin(b), sigma, rot @ n))
            assert abs(base - turned) < 1e-10 * max(1.0, base)

    def test_normal_must_be_unit(self, rng):
        a = random_state(rng)
        with pytest.raises(ValueError):
            rh_residual(a, a, 0.0, (0, 0, 2.0))


# ------------------------------------------------------ shock construction


class TestShockConstruction:
    def test_mach2_matches_scalar_oracle(self):
        from scipy.optimize import brentq

        sp = euler_mach2_shock()
        rho_m, w_m = 1.0, 2.0  # upstream sound speed 1, Mach 2
        flux = rho_m * w_m

        def momentum_balance(rho):
            return flux**2 * (1.0 / rho_m - 1.0 / rho) - (
                LAW.pressure(rho) - LAW.pressure(rho_m)
            )

        oracle = brentq(momentum_balance, rho_m * (1 + 1e-12), 20.0, rtol=8.9e-16)
        assert abs(sp.plus.rho - oracle) < 1e-9
        assert abs(sp.sigma + 2.0) < 1e-14
        # mass conservation pins the downstream normal velocity
        w_plus = sp.plus.u[2] - sp.sigma
        assert abs(sp.plus.rho * w_plus - flux) < 1e-10

    def test_compressive_and_lax(self):
        sp = euler_mach2_shock()
        assert sp.plus.rho > sp.minus.rho
        w_plus = sp.plus.u[2] - sp.sigma
        c_plus = np.sqrt(sp.plus.sound_speed_sq)
        assert 0 < w_plus < c_plus  # subsonic behind, supersonic ahead

    def test_weak_shock_continuity(self):
        up = MHDState(1.0, (0, 0, 0), (0, 0, 0), LAW)
        gaps = []
        for strength in (1e-2, 1e-3):
            sp = construct_lax_shock(up, "fast", strength)
            gaps.append(
                abs(sp.plus.rho - up.rho) + float(np.max(np.abs(sp.plus.u)))
            )
        assert gaps[1] < 0.2 * gaps[0]
        assert gaps[0] < 0.1

    def test_small_field_continuation(self):
        up = MHDState(1.0, (0, 0, 0), (1e-3, 0, 0), LAW)
        sp = construct_lax_shock(up, "fast", 1.0)
        flux_scale = max(1.0, float(np.max(np.abs(conserved_flux(up, 2)))))
        resid = rh_residual(sp.minus, sp.plus, sp.sigma, (0, 0, 1))
        assert np.max(np.abs(resid)) < 1e-9 * flux_scale
        euler = euler_mach2_shock()
        assert abs(sp.plus.rho - euler.plus.rho) < 1e-2
        # compression amplifies the tangential field
        assert sp.plus.H[0] > sp.minus.H[0]

    def test_lax_count_random_frequencies(self, rng):
        sp = euler_mach2_shock()
        for _ in range(10):
            freq = Frequency(
                float(rng.uniform(-2, 2)),
                tuple(rng.uniform(-2, 2, 2)),
                float(rng.uniform(0.05, 1.5)),
            )
            dim_minus, dim_plus = lax_dimensions(sp, freq)
            assert (dim_minus, dim_plus) == (0, 6)

    def test_family_and_strength_guards(self):
        up = MHDState(1.0, (0, 0, 0), (0, 0, 0), LAW)
        with pytest.raises(ValueError):
            construct_lax_shock(up, "slow", 1.0)
        with pytest.raises(ValueError):
            construct_lax_shock(up, "fast", 0.0)

    def test_rejects_tampered_downstream(self):
        sp = euler_mach2_shock()
        bad = MHDState(sp.plus.rho * 1.01, sp.plus.u, sp.plus.H, LAW)
        with pytest.raises(ValueError, match="jump"):
            ShockProblem(sp.minus, bad, sp.sigma)

    def test_rejects_characteristic_front(self):
        state = MHDState(1.0, (0, 0, 0), (0, 0, 0), LAW)
        with pytest.raises(NotCharacteristic):
            ShockProblem(state, state, sigma=-1.0)  # sonic: u3 - sigma = c

    def test_rejects_non_lax_pair(self):
        state = MHDState(1.0, (0, 0, 0), (0, 0, 0), LAW)
        with pytest.raises(NotLaxType):
            ShockProblem(state, state, sigma=-2.0)  # supersonic both sides

    def test_upstream_label_checked(self):
        state = MHDState(1.0, (0, 0, 0), (0, 0, 0), LAW)
        with pytest.raises(ValueError, match="upstream"):
            ShockProblem(state, state, sigma=-2.0, upstream="plus")

    def test_dphi_shape_guard(self):
        sp = euler_mach2_shock()
        with pytest.raises(ValueError):
            ShockProblem(sp.minus, sp.plus, sp.sigma, dphi=(0.1, 0.2, 0.3))

    def test_tilted_front(self):
        # rotate the whole Mach-2 picture about the x1 axis; in the tilted
        # parametrization the same shock must validate and stay stable
        sp = euler_mach2_shock()
        alpha = 0.35
        rot = np.array(
            [
                [1.0, 0.0, 0.0],
                [0.0, np.cos(alpha), -np.sin(alpha)],
                [0.0, np.sin(alpha), np.cos(alpha)],
            ]
        )

        def spin(s):
            return MHDState(s.rho, tuple(rot @ s.u), tuple(rot @ s.H), s.pressure_law)

        normal = rot @ np.array([0.0, 0.0, 1.0])
        dphi = (-normal[0] / normal[2], -normal[1] / normal[2])
        tilted = ShockProblem(
            spin(sp.minus), spin(sp.plus), sigma=sp.sigma / normal[2], dphi=dphi
        )
        unit, speed = tilted.unit_front()
        assert np.max(np.abs(unit - normal)) < 1e-14
        assert abs(speed - sp.sigma) < 1e-14
        val = majda_lopatinski(tilted, Frequency(0.6, (0.3, -0.2), 0.4))
        assert val > 1e-4

    def test_continuation_keeps_front_speed(self):
        sp = euler_mach2_shock()
        cont = continued_shock(sp, (1e-2, 0.0, 0.0))
        assert cont.sigma == sp.sigma
        assert abs(cont.minus.H[0] - 1e-2) < 1e-15
        with pytest.raises(NotLaxType):
            continued_shock(sp, (10.0, 0.0, 0.0))

    def test_json_roundtrip(self, tmp_path):
        sp = euler_mach2_shock()
        back = shock_from_json(sp.to_json())
        assert back == sp
        path = tmp_path / "shock.json"
        path.write_text(sp.to_json(), encoding="utf-8")
        assert shock_from_json(str(path)) == sp
        assert shock_from_json(sp.to_dict()) == sp

    def test_custom_law_does_not_serialize(self):
        class TableLaw:  # same numbers as LAW, but not a polytropic object
            def pressure(self, rho):
                return LAW.pressure(rho)

            def sound_speed_sq(self, rho):
                return LAW.sound_speed_sq(rho)

        sp = euler_mach2_shock()
        odd = ShockProblem(
            MHDState(1.0, (0, 0, 0), (0, 0, 0), TableLaw()),
            MHDState(sp.plus.rho, sp.plus.u, sp.plus.H, TableLaw()),
            sp.sigma,
        )
        with pytest.raises(ValueError, match="polytropic"):
            odd.to_json()


# --------------------------------------------------- transmission problem


class TestTransmission:
    def test_boundary_operator_shape_and_rank(self):
        sp = euler_mach2_shock()
        tp = shock_boundary_problem(sp)
        freq = Frequency(0.7, (0.3, 0.2), 0.4)
        rows = tp.problem.boundary_condition(sp, freq)
        assert rows.shape == (6, 14)
        assert np.linalg.matrix_rank(rows, tol=1e-10) == 6
        assert positive_count(tp.problem.sys, sp) == 6

    def test_doubled_system_is_friedrichs(self):
        sp = euler_mach2_shock()
        tp = shock_boundary_problem(sp)
        assert check_friedrichs(tp.problem.sys, sp).passed

    def test_front_vector_matches_flux_jumps(self, rng):
        sp = continued_shock(euler_mach2_shock(), (5e-2, 1e-2, 0.0))
        tp = shock_boundary_problem(sp)
        jump0 = conserved_state(sp.plus) - conserved_state(sp.minus)
        jump1 = conserved_flux(sp.plus, 0) - conserved_flux(sp.minus, 0)
        jump2 = conserved_flux(sp.plus, 1) - conserved_flux(sp.minus, 1)
        for _ in range(5):
            freq = Frequency(
                float(rng.uniform(-2, 2)),
                tuple(rng.uniform(-2, 2, 2)),
                float(rng.uniform(0, 1)),
            )
            want = (freq.tau - 1j * freq.gamma) * jump0
            want = want + freq.eta[0] * jump1 + freq.eta[1] * jump2
            got = tp.front_vector(freq)
            assert np.max(np.abs(got - want)) < 1e-12 * max(1.0, np.max(np.abs(want)))

    def test_degenerate_front_raises(self):
        state = MHDState(1.0, (0, 0, 0), (0, 0, 0), LAW)
        fake = SimpleNamespace(minus=state, plus=state, sigma=-2.0, dphi=(0.0, 0.0))
        tp = shock_boundary_problem(fake)
        with pytest.raises(FrontDegeneracy):
            tp.front_vector(Frequency(0.5, (0.1, 0.2), 0.3))

    def test_transmission_residual_and_front_recovery(self, rng):
        sp = euler_mach2_shock()
        tp = shock_boundary_problem(sp)
        freq = Frequency(0.9, (0.2, -0.4), 0.6)
        zero = tp.transmission_residual(freq, np.zeros(14), 0.0)
        assert np.max(np.abs(zero)) == 0.0
        x = tp.front_vector(freq)
        only_front = tp.transmission_residual(freq, np.zeros(14), 2.0)
        assert np.max(np.abs(only_front - 2.0 * x)) < 1e-14
        # a trace whose jump image lies along X is compatible; the front
        # map must recover the coefficient and zero the residual
        coeff = 0.7 - 0.3j
        trace = np.linalg.lstsq(tp.jump_matrix, coeff * x, rcond=None)[0]
        got = complex(tp.front_map(freq) @ trace)
        assert abs(got - coeff) < 1e-10
        resid = tp.transmission_residual(freq, trace, got)
        assert np.max(np.abs(resid)) < 1e-10

    def test_reflected_side_system(self):
        sp = euler_mach2_shock()
        straight = side_system(sp, "minus").matrices(None)
        flipped = side_system(sp, "minus", reflected=True).matrices(None)
        assert np.array_equal(straight[0], flipped[0])
        assert np.array_equal(straight[1], flipped[1])
        assert np.array_equal(straight[2], -flipped[2])
        with pytest.raises(ValueError):
            side_system(sp, "middle")


# ------------------------------------------------------- front determinant


class TestMajdaDeterminant:
    def test_stable_shock_positive_on_grid(self):
        sp = euler_mach2_shock()
        grid = half_sphere_grid(3, directions=24, gamma_levels=3, include_zero=False)
        values = [majda_lopatinski(sp, z) for z in grid]
        assert min(values) > 1e-3
        assert max(values) <= 1.0 + 1e-12

    def test_consistent_with_reduced_operator(self, rng):
        sp = euler_mach2_shock()
        tp = shock_boundary_problem(sp)
        ratios = []
        for _ in range(8):
            freq = Frequency(
                float(rng.uniform(-2, 2)),
                tuple(rng.uniform(-2, 2, 2)),
                float(rng.uniform(0.05, 1.0)),
            )
            full = majda_lopatinski(sp, freq)
            reduced = lopatinski_det(tp.problem, sp, freq)
            assert full > 1e-6 and reduced > 1e-6  # same verdict: stable
            ratios.append(full / reduced)
        assert max(ratios) / min(ratios) < 2.0  # same zero set, mild gauge

    def test_degree_zero_homogeneity(self):
        sp = euler_mach2_shock()
        z = Frequency(0.8, (0.5, -0.3), 0.4)
        base = majda_lopatinski(sp, z)
        assert abs(majda_lopatinski(sp, z.scaled(7.0)) - base) < 1e-9

    def test_gamma_zero_limit_is_continuous(self):
        sp = euler_mach2_shock()
        at_zero = majda_lopatinski(sp, Frequency(1.0, (0.3, -0.2), 0.0))
        near_zero = majda_lopatinski(sp, Frequency(1.0, (0.3, -0.2), 1e-5))
        assert abs(at_zero - near_zero) < 1e-2

    def test_field_continuation_approaches_euler(self):
        base = euler_mach2_shock()
        grid = half_sphere_grid(3, directions=16, gamma_levels=3, include_zero=False)
        euler_vals = np.array([majda_lopatinski(base, z) for z in grid])
        sups = []
        for h in (1e-1, 1e-3):
            cont = continued_shock(base, (h, 0.0, 0.0))
            vals = np.array([majda_lopatinski(cont, z) for z in grid])
            sups.append(float(np.max(np.abs(vals - euler_vals))))
        assert sups[1] < sups[0]
        assert sups[1] < 1e-2


# ------------------------------------------------------------ MHD strata


class TestStrata:
    def test_orthogonal_stratum_spot(self, rng):
        for _ in range(3):
            state, xi, tau, mult = mhd_stratum_point(rng, "orthogonal")
            rc = classify_root(MHD, state, tau, xi[:2], xi[2])
            assert rc.alg_mult == mult == 5
            assert rc.regularity == "geometrically_regular"

    def test_parallel_stratum_spot(self, rng):
        for _ in range(3):
            state, xi, tau, mult = mhd_stratum_point(rng, "parallel")
            rc = classify_root(MHD, state, tau, xi[:2], xi[2])
            assert rc.alg_mult == mult == 2
            assert rc.regularity == "algebraically_regular"
            assert rc.glancing in ("totally_incoming", "totally_outgoing")

    def test_generic_stratum_spot(self, rng):
        for _ in range(3):
            state, xi, tau, mult = mhd_stratum_point(rng, "generic")
            rc = classify_root(MHD, state, tau, xi[:2], xi[2])
            assert rc.alg_mult == mult == 1
            assert rc.regularity == "simple"

    def test_zero_field_quintuple_spot(self, rng):
        for _ in range(3):
            state, xi, tau = euler_limit_point(rng)
            rc = classify_root(MHD, state, tau, xi[:2], xi[2])
            assert rc.alg_mult == 5
            assert rc.glancing in ("totally_incoming", "totally_outgoing")


# ---------------------------------------------------------------- Maxwell


class TestMaxwell:
    def test_crystal_validation(self):
        with pytest.raises(ValueError):
            BiaxialCrystal((2.0, 2.0, 1.0))  # isotropic plane degenerates
        with pytest.raises(ValueError):
            BiaxialCrystal((1.0, 2.0, 3.0))
        with pytest.raises(ValueError):
            BiaxialCrystal((3.0, 2.0, 0.0))

    def test_cross_matrix(self, rng):
        a, b = rng.standard_normal(3), rng.standard_normal(3)
        assert np.max(np.abs(cross_matrix(a) @ b - np.cross(a, b))) < 1e-14

    def test_friedrichs(self):
        sys6 = maxwell_biaxial_system(BiaxialCrystal((3.0, 2.0, 1.0)))
        assert check_friedrichs(sys6, None).passed

    def test_determinant_identity(self, rng):
        crystal = BiaxialCrystal((2.7, 1.4, 0.6))
        sys6 = maxwell_biaxial_system(crystal)
        for _ in range(25):
            xi = rng.uniform(-2, 2, 3)
            tau = float(rng.uniform(-3, 3))
            closed = dispersion_determinant(crystal, tau, xi)
            numeric = float(
                np.linalg.det(tau * np.eye(6) + assemble(sys6, None, xi)).real
            )
            assert abs(closed - numeric) < 1e-9 * max(1.0, abs(closed))

    def test_discriminant_split_nonnegative(self, rng):
        crystal = BiaxialCrystal((3.0, 2.0, 1.0))
        for _ in range(25):
            xi = rng.uniform(-2, 2, 3)
            psi, phi = fresnel_coefficients(crystal, xi)
            p, q = discriminant_split(crystal, xi)
            disc = psi * psi - 4.0 * float(xi @ xi) * phi
            assert q >= 0.0
            assert abs(disc - (p * p + q)) < 1e-10 * max(1.0, abs(disc))

    def test_optic_axes_standard_crystal(self):
        crystal = BiaxialCrystal((3.0, 2.0, 1.0))
        assert abs(crystal.optic_angle - np.pi / 4) < 1e-14
        assert abs(crystal.double_speed - np.sqrt(2.0)) < 1e-14
        axes = optic_axes(crystal)
        assert len(axes) == 4
        for axis in axes:
            assert abs(np.linalg.norm(axis) - 1.0) < 1e-14
            assert axis[1] == 0.0
            p, q = discriminant_split(crystal, axis)
            assert abs(p) < 1e-14 and q == 0.0

    def test_double_roots_normal_form(self):
        crystal = BiaxialCrystal((3.0, 2.0, 1.0))
        roots = maxwell_double_roots(crystal, check_points=20)
        assert len(roots) == 8
        for root in roots:
            assert abs(abs(root.tau) - np.sqrt(2.0)) < 1e-12
            assert root.tangent.m == 2
            assert abs(root.normal_form.a - 1.0) < 1e-9
            assert root.tangent.e_spread < 1e-8

    def test_double_roots_generic_crystal(self):
        roots = maxwell_double_roots(BiaxialCrystal((2.3, 1.1, 0.4)), check_points=20)
        for root in roots:
            assert abs(root.normal_form.a - 1.0) < 1e-9

    def test_constraint_modes_decouple(self, rng):
        crystal = BiaxialCrystal((3.0, 2.0, 1.0))
        sys6 = maxwell_biaxial_system(crystal)
        s_mat = sys6.s_matrix(None)
        root = maxwell_double_roots(crystal, check_points=10)[0]
        xi = root.direction
        for mode in (np.r_[xi, np.zeros(3)], np.r_[np.zeros(3), xi]):
            image = assemble(sys6, None, xi) @ mode
            assert np.max(np.abs(image)) < 1e-14  # zero-speed constraint pair
            overlap = mode @ s_mat @ root.tangent.v
            assert np.max(np.abs(overlap)) < 1e-10

    def test_characteristic_boundary_refused(self):
        sys6 = maxwell_biaxial_system(BiaxialCrystal((3.0, 2.0, 1.0)))
        with pytest.raises(Singular):
            build_G(sys6, None, Frequency(0.5, (0.1, 0.2), 0.3))

    def test_pencil_stable_dimension(self, rng):
        sys6 = maxwell_biaxial_system(BiaxialCrystal((3.0, 2.0, 1.0)))
        n_plus = positive_count(sys6, None)
        assert n_plus == 2
        for _ in range(10):
            freq = Frequency(
                float(rng.uniform(-2, 2)),
                tuple(rng.uniform(-2, 2, 2)),
                float(rng.uniform(0.05, 1.0)),
            )
            assert pencil_stable_space(sys6, None, freq).dim == n_plus

    def test_pencil_matches_reduction_when_invertible(self, rng):
        state = MHDState(1.0, (0.2, -0.4, 0.8), (0.6, 0.1, -0.3), LAW)
        freq = Frequency(0.7, (0.4, -0.2), 0.5)
        direct = negative_space(MHD, state, freq)
        pencil = pencil_stable_space(MHD, state, freq)
        assert pencil.dim == direct.dim
        gap = np.linalg.norm(direct.projector() - pencil.projector())
        assert gap < 1e-8

    def test_pencil_needs_positive_gamma(self):
        sys6 = maxwell_biaxial_system(BiaxialCrystal((3.0, 2.0, 1.0)))
        with pytest.raises(ValueError):
            pencil_stable_space(sys6, None, Frequency(1.0, (0.1, 0.2), 0.0))


# ----------------------------------------------------------- model registry


class TestRegistry:
    def test_registered_names(self):
        for name, size in (("mhd", 7), ("euler-isentropic", 4), ("maxwell-biaxial", 6)):
            system, param = registered_system(name, None)
            assert system.n == size
            if name != "maxwell-biaxial":
                assert isinstance(param, MHDState)

    def test_default_state_has_unit_sound_speed(self):
        _, state = build_model("mhd")
        assert abs(state.sound_speed_sq - 1.0) < 1e-15

    def test_config_round(self):
        system, state = build_model(
            "mhd",
            {"rho": 2.0, "u": [0.1, 0.0, 0.3], "H": [0.0, 0.5, 0.0],
             "pressure": {"k": 1.0, "exponent": 2.0}},
        )
        assert state.rho == 2.0 and state.H == (0.0, 0.5, 0.0)
        assert check_friedrichs(system, state).passed

    def test_unknown_fields_rejected(self):
        with pytest.raises(ValueError, match="unknown"):
            build_model("mhd", {"rho": 1.0, "speed": 3.0})
        with pytest.raises(ValueError, match="unknown"):
            build_model("maxwell-biaxial", {"beta": [1, 2, 3]})

    def test_euler_rejects_field(self):
        with pytest.raises(ValueError, match="field"):
            build_model("euler-isentropic", {"H": [1.0, 0.0, 0.0]})

    def test_unknown_model(self):
        with pytest.raises(ValueError, match="available"):
            build_model("navier-stokes")


# ------------------------------------------------------- householder frame


class TestHouseholderFrame:
    def test_real_vector(self, rng):
        x = rng.standard_normal(7)
        frame = householder_frame(x)
        assert frame.dtype == np.float64
        assert np.max(np.abs(frame.T @ frame - np.eye(7))) < 1e-13
        assert np.max(np.abs(frame[:, 0] - x / np.linalg.norm(x))) < 1e-14

    def test_complex_vector(self, rng):
        x = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        frame = householder_frame(x)
        assert np.max(np.abs(frame.conj().T @ frame - np.eye(5))) < 1e-13
        assert np.max(np.abs(frame[:, 0] - x / np.linalg.norm(x))) < 1e-14

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            householder_frame(np.zeros(4))
