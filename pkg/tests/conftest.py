"""Shared test fixtures: random symmetrizable hyperbolic systems."""
from __future__ import annotations

import numpy as np
import pytest


def random_spd(rng: np.random.Generator, n: int, cond: float = 10.0) -> np.ndarray:
    """Random real SPD matrix with controlled conditioning."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eigs = np.exp(rng.uniform(0.0, np.log(cond), size=n))
    return (q * eigs) @ q.T


def random_friedrichs_family(
    rng: np.random.Generator, n: int, d: int, noncharacteristic: bool = True
):
    """Random system (S, [A_1..A_d]) with S SPD and every S A_j symmetric.

    The last matrix is the boundary matrix; when ``noncharacteristic`` it is
    resampled until well invertible.
    """
    s = random_spd(rng, n)
    s_inv = np.linalg.inv(s)
    mats = []
    for j in range(d):
        for _ in range(50):
            sym = rng.standard_normal((n, n))
            sym = 0.5 * (sym + sym.T)
            a = s_inv @ sym
            if j < d - 1 or not noncharacteristic:
                break
            # keep the boundary matrix comfortably invertible
            if np.min(np.abs(np.linalg.eigvals(a))) > 0.05:
                break
        mats.append(a)
    return s, mats


def boundary_symbol(mats, tau: float, eta, gamma: float) -> np.ndarray:
    """G = A_d^{-1}((tau - i gamma) Id + sum eta_j A_j)."""
    n = mats[0].shape[0]
    a_d = mats[-1]
    acc = (tau - 1j * gamma) * np.eye(n, dtype=complex)
    for aj, e in zip(mats[:-1], np.atleast_1d(eta)):
        acc = acc + e * aj
    return np.linalg.solve(a_d, acc)


def normal_form_system(a: float):
    """2x2 half-plane model with boundary speeds a and -1/a.

    The tangential coefficient couples the components with unit strength;
    the identity is a Friedrichs symmetrizer.  The oblique boundary
    condition (1, -c) admits a uniform Lopatinski bound exactly when
    a |c| < 1.
    """
    from hypstab.symbol import HyperbolicSystem

    b = np.array([[0.0, 1.0], [1.0, 0.0]])
    a_d = np.array([[a, 0.0], [0.0, -1.0 / a]])
    return HyperbolicSystem(
        n=2,
        d=2,
        coeff=lambda p: [b, a_d],
        symmetrizer=lambda p: np.eye(2),
        label=f"normal-form(a={a})",
    )


def mhd_stratum_point(rng: np.random.Generator, stratum: str):
    """Random admissible MHD state and frequency inside one root stratum.

    Returns (state, xi, tau_root, expected_multiplicity).  Rejection
    sampling keeps 0 < |H|^2 != rho c^2 with margin, the rest-frame
    boundary noncharacteristic, and the relevant eigenvalue gaps open so
    the expected classification is unambiguous.  For the parallel stratum
    the extra nonglancing condition (|u_3 -+ H_3/sqrt(rho)| bounded below)
    is enforced and the returned root is the double at lambda_0 + h |xi|.
    """
    from hypstab.models import (
        GammaLaw,
        MHDState,
        mhd_eigenvalues,
        noncharacteristic_margin,
    )

    for _ in range(2000):
        law = GammaLaw(
            k=float(rng.uniform(0.3, 1.5)), exponent=float(rng.uniform(1.2, 2.2))
        )
        rho = float(rng.uniform(0.3, 3.0))
        c2 = law.sound_speed_sq(rho)
        if rng.uniform() < 0.5:
            ratio = float(rng.uniform(0.25, 0.75))
        else:
            ratio = float(rng.uniform(1.4, 3.0))
        h_dir = rng.standard_normal(3)
        h_dir /= np.linalg.norm(h_dir)
        h_vec = np.sqrt(ratio * rho * c2) * h_dir
        u = rng.uniform(-2.0, 2.0, size=3)
        state = MHDState(rho, tuple(u), tuple(h_vec), law)
        if noncharacteristic_margin(state, 0.0) < 0.05:
            continue
        if stratum == "parallel":
            scale = float(rng.uniform(0.5, 2.0))
            xi = h_vec / np.linalg.norm(h_vec) * scale
            v3 = h_vec[2] / np.sqrt(rho)
            if min(abs(u[2] + v3), abs(u[2] - v3)) < 0.08:
                continue
            h_speed = float(np.linalg.norm(h_vec)) / np.sqrt(rho)
            # keep the double away from lambda_0 and from the fast pair
            gap = min(h_speed, abs(np.sqrt(c2) - h_speed)) * scale
            if gap < 0.05:
                continue
            lam = float(u @ xi) + h_speed * scale
            return state, xi, -lam, 2
        if stratum == "orthogonal":
            raw = rng.standard_normal(3)
            xi = raw - (raw @ h_vec) * h_vec / float(h_vec @ h_vec)
            if np.linalg.norm(xi) < 0.2:
                continue
            xi *= float(rng.uniform(0.5, 2.0)) / np.linalg.norm(xi)
            return state, xi, -float(u @ xi), 5
        if stratum != "generic":
            raise ValueError(f"unknown stratum {stratum!r}")
        xi = rng.standard_normal(3)
        xi *= float(rng.uniform(0.5, 2.0)) / np.linalg.norm(xi)
        eigs = np.sort(mhd_eigenvalues(state, xi))
        if np.min(np.diff(eigs)) < 0.04:
            continue
        k = int(rng.integers(0, 7))
        return state, xi, -float(eigs[k]), 1
    raise RuntimeError(f"could not sample stratum {stratum!r}")


def euler_limit_point(rng: np.random.Generator):
    """Zero-field MHD state with a noncharacteristic rest-frame boundary
    and a frequency whose quintuple root is isolated: (state, xi, tau)."""
    from hypstab.models import GammaLaw, MHDState

    for _ in range(2000):
        law = GammaLaw(
            k=float(rng.uniform(0.3, 1.5)), exponent=float(rng.uniform(1.2, 2.2))
        )
        rho = float(rng.uniform(0.3, 3.0))
        c = np.sqrt(law.sound_speed_sq(rho))
        u = rng.uniform(-2.0, 2.0, size=3)
        if min(abs(u[2]), abs(u[2] - c), abs(u[2] + c)) < 0.08:
            continue
        state = MHDState(rho, tuple(u), (0.0, 0.0, 0.0), law)
        xi = rng.standard_normal(3)
        norm = np.linalg.norm(xi)
        if norm < 0.1:
            continue
        xi *= float(rng.uniform(0.5, 2.0)) / norm
        if c * np.linalg.norm(xi) < 0.2:
            continue
        return state, xi, -float(u @ xi)
    raise RuntimeError("could not sample a zero-field point")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260825)
