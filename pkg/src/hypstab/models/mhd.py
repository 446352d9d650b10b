"""Isentropic magnetohydrodynamics and its zero-field gas-dynamics reduction.

The 7x7 symbol is assembled in scaled state coordinates (relative density
perturbation, velocity, magnetic field over sqrt(rho)); in these coordinates
block-diag(c^2, Id, Id) is a Friedrichs symmetrizer for every admissible
state.  Conversion to physical (density, velocity, field) perturbations is a
diagonal matrix exposed as :func:`coordinate_scaling`, and the conservative
fluxes and their Jacobians live here so the shock module can assemble jump
conditions against the same state type.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..symbol import HyperbolicSystem

__all__ = [
    "GammaLaw",
    "MHDState",
    "mhd_system",
    "euler_system",
    "mhd_eigenvalues",
    "wave_speeds",
    "noncharacteristic_margin",
    "rh_residual",
    "conserved_state",
    "conserved_flux",
    "conserved_state_jacobian",
    "conserved_flux_jacobian",
    "coordinate_scaling",
    "householder_frame",
]


@dataclass(frozen=True)
class GammaLaw:
    """Polytropic pressure law p = k rho^exponent (k > 0, exponent > 1)."""

    k: float = 1.0
    exponent: float = 5.0 / 3.0

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"pressure coefficient k = {self.k} must be positive")
        if not self.exponent > 1:
            raise ValueError(f"pressure exponent {self.exponent} must exceed 1")

    def pressure(self, rho: float) -> float:
        return self.k * float(rho) ** self.exponent

    def sound_speed_sq(self, rho: float) -> float:
        """c^2 = dp/drho, positive for every positive density."""
        return self.k * self.exponent * float(rho) ** (self.exponent - 1.0)


def _vec3(value, name: str) -> tuple[float, float, float]:
    arr = np.asarray(value, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {arr.shape}")
    return (float(arr[0]), float(arr[1]), float(arr[2]))


@dataclass(frozen=True)
class MHDState:
    """Constant state (density, velocity, magnetic field) with its pressure law.

    Any object with ``pressure`` and ``sound_speed_sq`` methods may replace
    the default polytropic law; the sound speed squared must be positive.
    """

    rho: float
    u: tuple[float, float, float] = (0.0, 0.0, 0.0)
    H: tuple[float, float, float] = (0.0, 0.0, 0.0)
    pressure_law: GammaLaw = GammaLaw()

    def __post_init__(self):
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "u", _vec3(self.u, "u"))
        object.__setattr__(self, "H", _vec3(self.H, "H"))
        if not self.rho > 0:
            raise ValueError(f"density {self.rho} must be positive")
        if not self.sound_speed_sq > 0:
            raise ValueError("pressure law has nonpositive dp/drho at this density")

    @property
    def u_vec(self) -> np.ndarray:
        return np.array(self.u, dtype=float)

    @property
    def h_vec(self) -> np.ndarray:
        return np.array(self.H, dtype=float)

    @property
    def alfven_vec(self) -> np.ndarray:
        """The field scaled to velocity units, H / sqrt(rho)."""
        return self.h_vec / np.sqrt(self.rho)

    @property
    def pressure(self) -> float:
        return float(self.pressure_law.pressure(self.rho))

    @property
    def sound_speed_sq(self) -> float:
        return float(self.pressure_law.sound_speed_sq(self.rho))

    def boosted(self, velocity) -> "MHDState":
        """Same state in a frame moving with ``velocity``."""
        shift = _vec3(velocity, "velocity")
        new_u = tuple(a - b for a, b in zip(self.u, shift))
        return MHDState(self.rho, new_u, self.H, self.pressure_law)


def _mhd_matrices(state: MHDState) -> list[np.ndarray]:
    # blocks in scaled coordinates: index 0 relative density, 1:4 velocity,
    # 4:7 scaled field
    c2 = state.sound_speed_sq
    v = state.alfven_vec
    mats = []
    for j in range(3):
        e = np.zeros(3)
        e[j] = 1.0
        a = state.u[j] * np.eye(7)
        a[0, 1:4] = e
        a[1:4, 0] = c2 * e
        a[1:4, 4:7] = np.outer(e, v) - v[j] * np.eye(3)
        a[4:7, 1:4] = np.outer(v, e) - v[j] * np.eye(3)
        mats.append(a)
    return mats


def _mhd_symmetrizer(state: MHDState) -> np.ndarray:
    return np.diag([state.sound_speed_sq, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0])


def mhd_system() -> HyperbolicSystem:
    """Isentropic MHD as a 7x7 system parametrized by an MHDState."""
    return HyperbolicSystem(
        n=7,
        d=3,
        coeff=_mhd_matrices,
        symmetrizer=_mhd_symmetrizer,
        label="isentropic-mhd",
    )


def _euler_matrices(state: MHDState) -> list[np.ndarray]:
    c2 = state.sound_speed_sq
    mats = []
    for j in range(3):
        e = np.zeros(3)
        e[j] = 1.0
        a = state.u[j] * np.eye(4)
        a[0, 1:4] = e
        a[1:4, 0] = c2 * e
        mats.append(a)
    return mats


def euler_system() -> HyperbolicSystem:
    """Isentropic gas dynamics: the 4x4 zero-field reduction of MHD."""
    return HyperbolicSystem(
        n=4,
        d=3,
        coeff=_euler_matrices,
        symmetrizer=lambda p: np.diag([p.sound_speed_sq, 1.0, 1.0, 1.0]),
        label="isentropic-euler",
    )


def coordinate_scaling(state: MHDState) -> np.ndarray:
    """Diagonal map from scaled coordinates to physical perturbations.

    Sends (relative density, velocity, scaled field) to (density, velocity,
    field), i.e. diag(rho, Id, sqrt(rho) Id).
    """
    root = np.sqrt(state.rho)
    return np.diag([state.rho, 1.0, 1.0, 1.0, root, root, root])


def wave_speeds(state: MHDState, omega) -> dict:
    """Characteristic speeds relative to advection, in direction ``omega``.

    Returns ``advection`` (u . omega), the nonnegative ``slow`` and ``fast``
    magnetoacoustic speeds times |omega|, and the signed ``alfven`` speed
    omega . H / sqrt(rho).
    """
    w = np.asarray(omega, dtype=float).reshape(-1)
    if w.shape != (3,):
        raise ValueError(f"direction must be a 3-vector, got shape {w.shape}")
    scale = float(np.linalg.norm(w))
    if scale == 0.0:
        raise ValueError("direction must be nonzero")
    what = w / scale
    v = state.alfven_vec
    c2 = state.sound_speed_sq
    a = float(what @ v)
    b2 = float(np.cross(what, v) @ np.cross(what, v))
    h2 = a * a + b2
    disc = np.sqrt(max((c2 - h2) ** 2 + 4.0 * b2 * c2, 0.0))
    fast = np.sqrt(0.5 * (c2 + h2 + disc))
    slow = np.sqrt(max(0.5 * (c2 + h2 - disc), 0.0))
    return {
        "advection": float(state.u_vec @ w),
        "slow": float(slow * scale),
        "alfven": float(a * scale),
        "fast": float(fast * scale),
    }


def mhd_eigenvalues(state: MHDState, omega) -> np.ndarray:
    """The seven characteristic speeds in direction ``omega``, sorted.

    Closed form: advection (once), advection plus/minus each of the slow,
    field-aligned, and fast speeds.
    """
    sp = wave_speeds(state, omega)
    lam0 = sp["advection"]
    vals = [
        lam0,
        lam0 + sp["slow"],
        lam0 - sp["slow"],
        lam0 + sp["alfven"],
        lam0 - sp["alfven"],
        lam0 + sp["fast"],
        lam0 - sp["fast"],
    ]
    return np.sort(np.asarray(vals, dtype=float))


def noncharacteristic_margin(state: MHDState, sigma: float, normal=(0.0, 0.0, 1.0)) -> float:
    """Distance from the relative normal speed to the characteristic set.

    A planar front moving at ``sigma`` along ``normal`` is noncharacteristic
    for this state exactly when the margin is positive: the relative speed
    u.n - sigma must avoid zero and the signed slow, field-aligned, and fast
    speeds in the normal direction.
    """
    n = np.asarray(normal, dtype=float)
    sp = wave_speeds(state, n / np.linalg.norm(n))
    w = float(state.u_vec @ n / np.linalg.norm(n)) - float(sigma)
    gaps = [abs(w)]
    for key in ("slow", "alfven", "fast"):
        gaps.append(abs(w - sp[key]))
        gaps.append(abs(w + sp[key]))
    return float(min(gaps))


# ------------------------------------------------------------ conservation


def conserved_state(state: MHDState) -> np.ndarray:
    """Conserved densities (mass, momentum, field), a 7-vector."""
    out = np.empty(7)
    out[0] = state.rho
    out[1:4] = state.rho * state.u_vec
    out[4:7] = state.h_vec
    return out


def conserved_flux(state: MHDState, j: int) -> np.ndarray:
    """Conservative flux in coordinate direction ``j`` (0, 1, or 2).

    Mass rho u_j; momentum rho u_j u + (p + |H|^2/2) e_j - H_j H; field
    u_j H - H_j u.
    """
    u = state.u_vec
    h = state.h_vec
    e = np.zeros(3)
    e[j] = 1.0
    ptot = state.pressure + 0.5 * float(h @ h)
    out = np.empty(7)
    out[0] = state.rho * u[j]
    out[1:4] = state.rho * u[j] * u + ptot * e - h[j] * h
    out[4:7] = u[j] * h - h[j] * u
    return out


def conserved_state_jacobian(state: MHDState) -> np.ndarray:
    """Jacobian of :func:`conserved_state` in physical variables (rho, u, H)."""
    jac = np.zeros((7, 7))
    jac[0, 0] = 1.0
    jac[1:4, 0] = state.u_vec
    jac[1:4, 1:4] = state.rho * np.eye(3)
    jac[4:7, 4:7] = np.eye(3)
    return jac


def conserved_flux_jacobian(state: MHDState, j: int) -> np.ndarray:
    """Jacobian of :func:`conserved_flux` in physical variables (rho, u, H)."""
    u = state.u_vec
    h = state.h_vec
    c2 = state.sound_speed_sq
    e = np.zeros(3)
    e[j] = 1.0
    jac = np.zeros((7, 7))
    jac[0, 0] = u[j]
    jac[0, 1:4] = state.rho * e
    jac[1:4, 0] = u[j] * u + c2 * e
    jac[1:4, 1:4] = state.rho * (np.outer(u, e) + u[j] * np.eye(3))
    jac[1:4, 4:7] = np.outer(e, h) - np.outer(h, e) - h[j] * np.eye(3)
    jac[4:7, 1:4] = np.outer(h, e) - h[j] * np.eye(3)
    jac[4:7, 4:7] = u[j] * np.eye(3) - np.outer(u, e)
    return jac


# ------------------------------------------------------- jump conditions


def householder_frame(vector) -> np.ndarray:
    """Unitary matrix whose first column is ``vector`` normalized.

    The remaining columns are a deterministic orthonormal basis of the
    orthogonal complement (single Householder reflector, sign-stabilized).
    Real input produces a real orthogonal matrix.
    """
    v = np.asarray(vector)
    if v.ndim != 1 or v.shape[0] < 1:
        raise ValueError(f"expected a vector, got shape {v.shape}")
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("cannot build a frame from the zero vector")
    x = v / norm
    if not np.iscomplexobj(x):
        x = x.astype(float)
    n = x.shape[0]
    lead = x[0]
    phase = lead / abs(lead) if abs(lead) > 0 else 1.0
    w = x.copy()
    w[0] += phase
    reflector = np.eye(n, dtype=x.dtype) - 2.0 * np.outer(w, w.conj()) / (w.conj() @ w)
    frame = reflector.copy()
    frame[:, 0] = x  # reflector column 0 is -conj(phase) x; rescale exactly
    return frame


def rh_residual(minus: MHDState, plus: MHDState, sigma: float, normal=(0.0, 0.0, 1.0)) -> np.ndarray:
    """The seven independent jump conditions for a planar front.

    ``normal`` must be a unit vector and ``sigma`` the front speed along it.
    Components: mass flux, the three momentum fluxes, the two tangential
    field-transport conditions, and continuity of the normal field (which
    subsumes the normal component of field transport).
    """
    n = np.asarray(normal, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > 1e-9:
        raise ValueError("normal must be a unit vector")
    frame = householder_frame(n)
    t1, t2 = frame[:, 1], frame[:, 2]

    def pieces(state: MHDState):
        u = state.u_vec
        h = state.h_vec
        w = float(u @ n) - float(sigma)
        hn = float(h @ n)
        ptot = state.pressure + 0.5 * float(h @ h)
        out = np.empty(7)
        out[0] = state.rho * w
        out[1:4] = state.rho * w * u + ptot * n - hn * h
        out[4] = w * float(h @ t1) - hn * float(u @ t1)
        out[5] = w * float(h @ t2) - hn * float(u @ t2)
        out[6] = hn
        return out

    return pieces(plus) - pieces(minus)
