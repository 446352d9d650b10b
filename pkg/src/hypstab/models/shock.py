"""Planar Lax shocks for isentropic MHD: construction by root-finding,
the doubled half-space boundary problem with its front unknown eliminated,
and the front-coupled stability determinant.

The two constant states sit on either side of the front x3 = sigma t +
dphi . y; the change of variables that flattens the front leaves the
tangential coefficients alone and replaces the normal one by the sheared
matrix A3 - dphi_1 A1 - dphi_2 A2 - sigma Id.  Reflecting the minus side
through the front yields one 14-dimensional problem on a half-line whose
boundary condition is the linearized jump relation projected onto the
orthogonal complement of the front direction vector X(zeta); the projected
operator has rank 6 and the front trace is recovered from the X component.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from ..boundary import (
    BoundaryProblem,
    Frequency,
    _as_frequency,
    build_G,
    limit_negative_space,
    negative_space,
)
from ..errors import FrontDegeneracy, NotCharacteristic, NotLaxType
from ..spectral import orthonormal_basis
from ..symbol import HyperbolicSystem
from .mhd import (
    GammaLaw,
    MHDState,
    conserved_flux,
    conserved_flux_jacobian,
    conserved_state,
    conserved_state_jacobian,
    coordinate_scaling,
    householder_frame,
    mhd_system,
    noncharacteristic_margin,
    rh_residual,
    wave_speeds,
)

__all__ = [
    "ShockProblem",
    "construct_lax_shock",
    "continued_shock",
    "side_system",
    "lax_dimensions",
    "TransmissionProblem",
    "shock_boundary_problem",
    "majda_lopatinski",
    "shock_from_json",
]

_MHD = mhd_system()

# fixed gamma > 0 probes for the dimension count done at construction
_LAX_PROBES = (
    Frequency(0.7, (0.4, -0.3), 0.8),
    Frequency(-1.2, (0.5, 1.0), 0.3),
)


@dataclass(frozen=True)
class ShockProblem:
    """Two states, a front speed, and a front slope forming a Lax shock.

    ``sigma`` is the speed of the front x3 = sigma t + dphi . y measured
    along x3; ``upstream`` names the side the mass flux comes from.
    Construction verifies the jump conditions, that both sides are
    noncharacteristic, and the Lax dimension count (stable dimensions
    summing to 6 at gamma > 0 probes).
    """

    minus: MHDState
    plus: MHDState
    sigma: float
    dphi: tuple[float, float] = (0.0, 0.0)
    upstream: str = "minus"

    def __post_init__(self):
        object.__setattr__(self, "sigma", float(self.sigma))
        dphi = np.asarray(self.dphi, dtype=float).reshape(-1)
        if dphi.shape != (2,):
            raise ValueError(f"dphi must have two components, got {dphi.shape}")
        object.__setattr__(self, "dphi", (float(dphi[0]), float(dphi[1])))
        if self.upstream not in ("minus", "plus"):
            raise ValueError(f"upstream must be 'minus' or 'plus', not {self.upstream!r}")

        normal, speed = self.unit_front()
        flux_scale = max(
            1.0,
            float(np.max(np.abs(conserved_flux(self.minus, 2)))),
            float(np.max(np.abs(conserved_flux(self.plus, 2)))),
        )
        resid = rh_residual(self.minus, self.plus, speed, normal)
        if np.max(np.abs(resid)) > 1e-9 * flux_scale:
            raise ValueError(
                f"jump conditions violated: residual {np.max(np.abs(resid)):.3e}"
            )
        for side in (self.minus, self.plus):
            speeds = wave_speeds(side, normal)
            speed_scale = max(1.0, speeds["fast"])
            if noncharacteristic_margin(side, speed, normal) <= 1e-8 * speed_scale:
                raise NotCharacteristic(
                    "front is characteristic or nearly so on one side"
                )
        flux = self.minus.rho * (float(self.minus.u_vec @ normal) - speed)
        if (flux > 0) != (self.upstream == "minus"):
            raise ValueError("mass flux direction contradicts the upstream label")
        for probe in _LAX_PROBES:
            dim_minus, dim_plus = lax_dimensions(self, probe)
            if dim_minus + dim_plus != 6:
                raise NotLaxType(
                    f"stable dimensions {dim_minus} + {dim_plus} != 6 at {probe}"
                )

    def unit_front(self) -> tuple[np.ndarray, float]:
        """Unit normal of the tilted front and the speed along it."""
        slope = np.array([-self.dphi[0], -self.dphi[1], 1.0])
        scale = float(np.linalg.norm(slope))
        return slope / scale, self.sigma / scale

    def side(self, which: str) -> MHDState:
        if which not in ("minus", "plus"):
            raise ValueError(f"side must be 'minus' or 'plus', not {which!r}")
        return self.minus if which == "minus" else self.plus

    def to_dict(self) -> dict:
        law = self.minus.pressure_law
        if not isinstance(law, GammaLaw) or law != self.plus.pressure_law:
            raise ValueError("only a shared polytropic pressure law serializes")
        return {
            "rho_minus": self.minus.rho,
            "u_minus": list(self.minus.u),
            "H_minus": list(self.minus.H),
            "rho_plus": self.plus.rho,
            "u_plus": list(self.plus.u),
            "H_plus": list(self.plus.H),
            "sigma": self.sigma,
            "dphi": list(self.dphi),
            "upstream": self.upstream,
            "pressure": {"k": law.k, "exponent": law.exponent},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def shock_from_json(source) -> ShockProblem:
    """Rebuild a ShockProblem from a dict, JSON string, or JSON file path."""
    if isinstance(source, dict):
        doc = source
    else:
        try:
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        except (OSError, TypeError):
            text = source
        doc = json.loads(text)
    law = GammaLaw(**doc.get("pressure", {}))
    minus = MHDState(doc["rho_minus"], doc["u_minus"], doc["H_minus"], law)
    plus = MHDState(doc["rho_plus"], doc["u_plus"], doc["H_plus"], law)
    return ShockProblem(
        minus=minus,
        plus=plus,
        sigma=float(doc["sigma"]),
        dphi=tuple(doc.get("dphi", (0.0, 0.0))),
        upstream=str(doc.get("upstream", "minus")),
    )


# ------------------------------------------------------------ construction


def _sheared_normal(state: MHDState, dphi, sigma: float) -> np.ndarray:
    mats = _MHD.matrices(state)
    return (
        mats[2]
        - dphi[0] * mats[0]
        - dphi[1] * mats[1]
        - sigma * np.eye(7)
    )


def side_system(sp: ShockProblem, which: str, reflected: bool = False) -> HyperbolicSystem:
    """The 7x7 half-space system on one side of the flattened front.

    Tangential coefficients are those of the state itself; the normal one is
    the sheared matrix.  With ``reflected`` the normal coefficient is negated
    (the minus side folded onto the positive half-line).
    """
    state = sp.side(which)
    mats = _MHD.matrices(state)
    sign = -1.0 if reflected else 1.0
    fixed = [mats[0], mats[1], sign * _sheared_normal(state, sp.dphi, sp.sigma)]
    s_mat = _MHD.s_matrix(state)
    return HyperbolicSystem(
        n=7,
        d=3,
        coeff=lambda p, _m=fixed: _m,
        symmetrizer=lambda p, _s=s_mat: _s,
        label=f"shock-{which}{'-reflected' if reflected else ''}",
    )


def lax_dimensions(sp: ShockProblem, zeta) -> tuple[int, int]:
    """(dim E-, dim E+): modes decaying at -inf on the minus side and at
    +inf on the plus side, counted from the two one-sided symbols."""
    freq = _as_frequency(zeta, 3)
    if freq.gamma <= 0:
        raise ValueError("the dimension count needs gamma > 0")
    eig_plus = np.linalg.eigvals(build_G(side_system(sp, "plus"), None, freq))
    eig_minus = np.linalg.eigvals(build_G(side_system(sp, "minus"), None, freq))
    return int(np.sum(eig_minus.imag > 0)), int(np.sum(eig_plus.imag < 0))


def construct_lax_shock(
    upstream: MHDState, family: str = "fast", strength: float = 1.0
) -> ShockProblem:
    """Build a planar Lax shock ahead of ``upstream`` by root-finding.

    ``strength`` is the upstream normal Mach number relative to the fast
    speed, minus one; the front speed is sigma = u3 - (1 + strength) c_fast.
    The downstream state is seeded from the scalar gas-dynamic jump (with
    the tangential field compressed by the density ratio) and polished on
    the full seven jump conditions.  Only the extreme ``fast`` family is
    implemented; it is the one that continues to the zero-field limit.
    """
    if family != "fast":
        raise ValueError(f"only the 'fast' shock family is implemented, not {family!r}")
    if not strength > 0:
        raise ValueError("strength must be positive (weak limit excluded)")
    fast = wave_speeds(upstream, (0.0, 0.0, 1.0))["fast"]
    w_up = (1.0 + strength) * fast
    sigma = upstream.u[2] - w_up
    law = upstream.pressure_law
    mass_flux = upstream.rho * w_up
    ht_sq = upstream.H[0] ** 2 + upstream.H[1] ** 2

    def scalar_jump(rho: float) -> float:
        # mass + normal momentum with the tangential field slaved to the
        # density ratio; exact when H is tangential, a seed otherwise
        ram = mass_flux**2 / rho + law.pressure(rho)
        ram += 0.5 * ht_sq * (rho / upstream.rho) ** 2
        base = mass_flux**2 / upstream.rho + law.pressure(upstream.rho) + 0.5 * ht_sq
        return ram - base

    lo = upstream.rho * (1.0 + 1e-9)
    hi = upstream.rho * 2.0
    tries = 0
    while scalar_jump(hi) <= 0:
        hi *= 2.0
        tries += 1
        if tries > 60:
            raise RuntimeError("no compressive density bracket found")
    if scalar_jump(lo) >= 0:
        rho_seed = lo  # jump too weak to bracket; polish from the near side
    else:
        rho_seed = optimize.brentq(scalar_jump, lo, hi, rtol=8.9e-16)
    ratio = rho_seed / upstream.rho
    seed = np.empty(7)
    seed[0] = rho_seed
    seed[1:3] = upstream.u[0:2]
    seed[3] = sigma + mass_flux / rho_seed
    seed[4:6] = ratio * np.asarray(upstream.H[0:2])
    seed[6] = upstream.H[2]

    def residual(x: np.ndarray) -> np.ndarray:
        if x[0] <= 0:
            return np.full(7, 1e6 * (1.0 + abs(x[0])))
        trial = MHDState(x[0], tuple(x[1:4]), tuple(x[4:7]), law)
        return rh_residual(upstream, trial, sigma, (0.0, 0.0, 1.0))

    sol = optimize.root(residual, seed, method="hybr", tol=1e-14)
    worst = float(np.max(np.abs(residual(sol.x))))
    if worst > 1e-10 * max(1.0, float(np.max(np.abs(conserved_flux(upstream, 2))))):
        raise RuntimeError(
            f"shock root-finder did not converge (residual {worst:.3e})"
        )
    downstream = MHDState(sol.x[0], tuple(sol.x[1:4]), tuple(sol.x[4:7]), law)
    return ShockProblem(minus=upstream, plus=downstream, sigma=sigma)


def continued_shock(base: ShockProblem, field) -> ShockProblem:
    """Lax shock with the upstream field replaced, same front speed.

    Used to follow a gas-dynamic shock into small nonzero magnetic fields:
    the upstream density, velocity, pressure law, and sigma are kept, and
    the strength is adjusted so the relative normal speed is unchanged.
    """
    if base.upstream != "minus" or base.dphi != (0.0, 0.0):
        raise ValueError("continuation expects an untilted, minus-upstream shock")
    up = base.minus
    w_up = up.u[2] - base.sigma
    new_up = MHDState(up.rho, up.u, field, up.pressure_law)
    fast = wave_speeds(new_up, (0.0, 0.0, 1.0))["fast"]
    strength = w_up / fast - 1.0
    if strength <= 0:
        raise NotLaxType("field too strong: the front is no longer supersonic")
    return construct_lax_shock(new_up, "fast", strength)


# ------------------------------------------------- doubled boundary problem


def _doubled_matrices(sp: ShockProblem) -> list[np.ndarray]:
    mats_plus = _MHD.matrices(sp.plus)
    mats_minus = _MHD.matrices(sp.minus)
    out = []
    for j in range(2):
        a = np.zeros((14, 14))
        a[:7, :7] = mats_plus[j]
        a[7:, 7:] = mats_minus[j]
        out.append(a)
    a = np.zeros((14, 14))
    a[:7, :7] = _sheared_normal(sp.plus, sp.dphi, sp.sigma)
    a[7:, 7:] = -_sheared_normal(sp.minus, sp.dphi, sp.sigma)
    out.append(a)
    return out


def _doubled_symmetrizer(sp: ShockProblem) -> np.ndarray:
    s = np.zeros((14, 14))
    s[:7, :7] = _MHD.s_matrix(sp.plus)
    s[7:, 7:] = _MHD.s_matrix(sp.minus)
    return s


_DOUBLED = HyperbolicSystem(
    n=14,
    d=3,
    coeff=_doubled_matrices,
    symmetrizer=_doubled_symmetrizer,
    label="doubled-shock",
)


def _front_vector(sp: ShockProblem, freq: Frequency) -> np.ndarray:
    jump0 = conserved_state(sp.plus) - conserved_state(sp.minus)
    jumps = [conserved_flux(sp.plus, j) - conserved_flux(sp.minus, j) for j in range(2)]
    x = complex(freq.tau, -freq.gamma) * jump0
    for eta_j, jump in zip(freq.eta_array, jumps):
        x = x + eta_j * jump
    scale = freq.norm * max(
        float(np.max(np.abs(jump0))),
        max(float(np.max(np.abs(j))) for j in jumps),
        1e-300,
    )
    if np.linalg.norm(x) <= 1e-12 * scale:
        raise FrontDegeneracy(f"front direction vector vanishes at {freq}")
    return x


def _sheared_flux_jacobian(state: MHDState, dphi, sigma: float) -> np.ndarray:
    jac = conserved_flux_jacobian(state, 2)
    jac = jac - dphi[0] * conserved_flux_jacobian(state, 0)
    jac = jac - dphi[1] * conserved_flux_jacobian(state, 1)
    return jac - sigma * conserved_state_jacobian(state)


def _jump_matrix(sp: ShockProblem) -> np.ndarray:
    """Jacobian of the linearized jump [F~3' u] on doubled traces, 7 x 14."""
    out = np.zeros((7, 14))
    out[:, :7] = _sheared_flux_jacobian(sp.plus, sp.dphi, sp.sigma) @ coordinate_scaling(sp.plus)
    out[:, 7:] = -_sheared_flux_jacobian(sp.minus, sp.dphi, sp.sigma) @ coordinate_scaling(sp.minus)
    return out


def _boundary_rows(sp: ShockProblem, freq: Frequency) -> np.ndarray:
    x = _front_vector(sp, freq)
    frame = householder_frame(x)
    return frame[:, 1:].conj().T @ _jump_matrix(sp)


@dataclass(frozen=True)
class TransmissionProblem:
    """The doubled boundary problem of a shock plus its front recovery data.

    ``problem`` is a standard 14-dimensional half-space boundary problem
    whose parameter point is the ShockProblem itself; the boundary operator
    is the linearized jump projected onto the orthogonal complement of the
    front direction vector.  ``front_map`` recovers the front trace from a
    doubled boundary trace once the projected conditions hold.
    """

    shock: ShockProblem
    problem: BoundaryProblem

    def front_vector(self, zeta) -> np.ndarray:
        """X(zeta): the direction multiplying the front unknown, 7-vector."""
        freq = _as_frequency(zeta, 3)
        return _front_vector(self.shock, freq)

    @property
    def jump_matrix(self) -> np.ndarray:
        return _jump_matrix(self.shock)

    def front_map(self, zeta) -> np.ndarray:
        """Row vector recovering the front trace from a homogeneous
        boundary trace: phi = front_map(zeta) @ trace."""
        x = self.front_vector(zeta)
        return (x.conj() @ self.jump_matrix) / float((x.conj() @ x).real)

    def transmission_residual(self, zeta, trace, front_value: complex) -> np.ndarray:
        """Residual of the full (rank 7) linearized transmission relation."""
        trace = np.asarray(trace, dtype=complex).reshape(14)
        return complex(front_value) * self.front_vector(zeta) - self.jump_matrix @ trace


def shock_boundary_problem(sp: ShockProblem) -> TransmissionProblem:
    """Fold a shock into one half-space boundary problem with rank-6 fronts.

    The minus side is reflected through the front, giving a 14-dimensional
    system on x > 0 whose stable subspace at gamma > 0 collects decaying
    modes of both sides; the Lax count makes that subspace 6-dimensional,
    matching the projected jump conditions.
    """
    bp = BoundaryProblem(_DOUBLED, _boundary_rows, label="shock-transmission")
    return TransmissionProblem(shock=sp, problem=bp)


# ------------------------------------------------------------- determinant


def _one_sided_trace(sys: HyperbolicSystem, freq: Frequency, gammas):
    if freq.gamma > 0:
        return negative_space(sys, None, freq), True
    basis, report = limit_negative_space(sys, None, freq, gammas=gammas)
    return basis, bool(report["converged"])


def majda_lopatinski(sp: ShockProblem, zeta, gammas=None) -> float:
    """Modulus of the front-coupled stability determinant at ``zeta``.

    Columns: images of the decaying one-sided traces under the sheared
    conservative flux Jacobians (each family orthonormalized) and the
    normalized front direction vector.  Zero means a nontrivial bounded
    solution with zero data; values are in [0, 1].  At gamma = 0 the traces
    are continued from gamma > 0; if the continuation does not settle the
    reported value is the infimum over the approach samples.
    """
    freq = _as_frequency(zeta, 3)
    plus_sys = side_system(sp, "plus")
    minus_sys = side_system(sp, "minus", reflected=True)
    e_plus, ok_plus = _one_sided_trace(plus_sys, freq, gammas)
    e_minus, ok_minus = _one_sided_trace(minus_sys, freq, gammas)
    if not (ok_plus and ok_minus):
        values = []
        for g in np.geomspace(1e-2, 1e-5, 7):
            values.append(majda_lopatinski(sp, freq.with_gamma(float(g))))
        return min(values)
    if e_minus.dim + e_plus.dim != 6:
        raise NotLaxType(
            f"stable dimensions {e_minus.dim} + {e_plus.dim} != 6 at {freq}"
        )
    cols = np.empty((7, 7), dtype=complex)
    k = 0
    for state, basis in ((sp.minus, e_minus), (sp.plus, e_plus)):
        if basis.dim == 0:
            continue
        image = (
            _sheared_flux_jacobian(state, sp.dphi, sp.sigma)
            @ coordinate_scaling(state)
            @ basis.matrix
        )
        cols[:, k : k + basis.dim] = orthonormal_basis(image).matrix
        k += basis.dim
    x = _front_vector(sp, freq)
    cols[:, 6] = x / np.linalg.norm(x)
    return float(abs(np.linalg.det(cols)))
