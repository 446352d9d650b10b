"""Lopatinski determinants: pointwise evaluation, uniform scans over the
compactified frequency half-sphere, and reduced boundary conditions obtained
by splitting the state space into invariant blocks of the boundary symbol.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import subspace_angles
from scipy.optimize import minimize

from .boundary import (
    BoundaryProblem,
    Frequency,
    _as_frequency,
    build_G,
    limit_negative_space,
    negative_space,
    positive_count,
)
from .errors import (
    AssumptionFailure,
    DimensionMismatch,
    GapTooSmall,
    InternalInconsistency,
    OnBoundary,
    Singular,
)
from .spectral import (
    SubspaceBasis,
    half_plane_subspace,
    orthonormal_basis,
    spectral_projector,
    subspace_determinant,
)
from .util import unit_directions

__all__ = [
    "lopatinski_det",
    "estimate_margin",
    "half_sphere_grid",
    "uniform_scan",
    "refine_scan_minimum",
    "ScanResult",
    "ReducedPair",
    "reduce_boundary",
    "check_reduced_equivalence",
]


def _stable_space(
    bp: BoundaryProblem, p, freq: Frequency, gammas=None
) -> tuple[SubspaceBasis, dict]:
    """Stable subspace of G at freq; gamma = 0 points go through the limit."""
    if freq.gamma > 0:
        return negative_space(bp.sys, p, freq), {"converged": True, "method": "direct"}
    basis, report = limit_negative_space(bp.sys, p, freq, gammas=gammas)
    info = {
        "converged": report["converged"],
        "method": "limit",
        "angles": report["max_angles"],
        "gammas": report["gammas"],
    }
    return basis, info


def lopatinski_det(
    bp: BoundaryProblem, p, zeta, gammas=None, details: bool = False
):
    """Modulus of the Lopatinski determinant det(E_-, ker M) at zeta.

    Both subspaces enter through orthonormal bases, so the value is basis
    independent and lies in [0, 1]; zero means the stable subspace meets the
    boundary kernel.  For gamma = 0 the stable subspace is continued from
    gamma > 0; if that limit does not settle, the reported value is the
    infimum over the sampled approach points and the detail record is
    flagged as unconverged.

    Raises
    ------
    DimensionMismatch
        If dim E_- + dim ker M differs from the state dimension.
    """
    freq = _as_frequency(zeta, bp.sys.d)
    kernel = bp.kernel(p, freq)
    e_minus, info = _stable_space(bp, p, freq, gammas=gammas)
    if e_minus.dim + kernel.dim != bp.sys.n:
        raise DimensionMismatch(
            f"stable dimension {e_minus.dim} + kernel dimension {kernel.dim} "
            f"!= state dimension {bp.sys.n}"
        )
    if freq.gamma == 0 and not info["converged"]:
        # no settled limit: fall back to the infimum over the approach samples
        values = []
        for g in info["gammas"]:
            try:
                basis = negative_space(bp.sys, p, freq.with_gamma(g))
            except GapTooSmall:
                continue
            values.append(subspace_determinant(basis, bp.kernel(p, freq.with_gamma(g))))
        value = min(values) if values else 0.0
        info = dict(info, method="infimum", samples=len(values))
    else:
        value = subspace_determinant(e_minus, kernel)
    if details:
        return value, info
    return value


def estimate_margin(bp: BoundaryProblem, p, zeta, gammas=None) -> float:
    """Smallest singular value of M restricted to the stable subspace.

    This is the best constant in |M h| >= margin |h| for h in E_-, the
    quantity controlled by a uniform lower bound on the Lopatinski
    determinant.  Zero margin and zero determinant coincide.
    """
    freq = _as_frequency(zeta, bp.sys.d)
    m = bp.boundary_condition(p, freq)
    e_minus, _ = _stable_space(bp, p, freq, gammas=gammas)
    if e_minus.dim == 0:
        return float("inf")
    sv = np.linalg.svd(m @ e_minus.matrix, compute_uv=False)
    return float(sv[-1]) if len(sv) >= e_minus.dim else 0.0


# ------------------------------------------------------------------ scanning


def half_sphere_grid(
    d: int,
    directions: int = 64,
    gamma_levels: int = 5,
    gamma_floor: float = 1e-3,
    gamma_top: float = 0.9,
    include_zero: bool = True,
) -> list[Frequency]:
    """Deterministic grid of unit frequencies covering the closed half-sphere.

    Each gamma level carries a ring of ``directions`` unit vectors in the
    (tau, eta) slice, rescaled so |zeta| = 1; levels run geometrically from
    ``gamma_top`` down to ``gamma_floor``, optionally extended by the
    gamma = 0 boundary ring, plus the single pole tau = eta = 0, gamma = 1.
    """
    if not (0 < gamma_floor <= gamma_top < 1):
        raise ValueError("need 0 < gamma_floor <= gamma_top < 1")
    levels = [0.0] if include_zero else []
    if gamma_levels > 0:
        levels.extend(np.geomspace(gamma_floor, gamma_top, gamma_levels))
    rays = unit_directions(directions, d)
    grid: list[Frequency] = []
    for g in levels:
        r = float(np.sqrt(1.0 - g * g))
        for w in rays:
            grid.append(Frequency(r * w[0], tuple(r * w[1:]), g))
    grid.append(Frequency(0.0, (0.0,) * (d - 1), 1.0))
    return grid


@dataclass
class ScanResult:
    """Outcome of a Lopatinski scan over a frequency grid."""

    grid: list[Frequency]
    values: np.ndarray
    gamma_floor: float
    converged: list[bool]
    failures: list[dict] = field(default_factory=list)
    label: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if len(self.grid) != len(self.values) or len(self.grid) != len(self.converged):
            raise DimensionMismatch("grid, values and flags must align")
        if np.any(self.values < 0):
            raise InternalInconsistency("determinant moduli must be nonnegative")

    @property
    def min_value(self) -> float:
        return float(np.min(self.values))

    @property
    def argmin(self) -> Frequency:
        return self.grid[int(np.argmin(self.values))]

    def to_csv(self, path) -> None:
        d = len(self.grid[0].eta) + 1
        header = ["tau"] + [f"eta{j}" for j in range(1, d)] + ["gamma", "absD", "converged"]
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for freq, val, ok in zip(self.grid, self.values, self.converged):
                nums = [freq.tau, *freq.eta, freq.gamma, val]
                fh.write(",".join("%.17g" % x for x in nums))
                fh.write(",%d\n" % int(ok))

    def summary(self) -> dict:
        return {
            "min_value": self.min_value,
            "argmin": {
                "tau": self.argmin.tau,
                "eta": list(self.argmin.eta),
                "gamma": self.argmin.gamma,
            },
            "grid_points": len(self.grid),
            "gamma_floor": self.gamma_floor,
            "unconverged_points": int(sum(not ok for ok in self.converged)),
            "failures": self.failures,
            "label": self.label,
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def uniform_scan(
    bp: BoundaryProblem,
    p,
    grid: Sequence[Frequency] | None = None,
    directions: int = 64,
    gamma_levels: int = 5,
    gamma_floor: float = 1e-3,
    include_zero: bool = True,
    gammas=None,
    label: str = "",
) -> ScanResult:
    """Evaluate |D| over a half-sphere grid and report the minimum.

    Points where the evaluation fails outright (characteristic boundary,
    unresolvable spectral gap) are recorded in ``failures`` with value 0,
    keeping the scan conservative.  The scan is deterministic for a fixed
    grid; ties in the minimum resolve to the lowest grid index.
    """
    if grid is None:
        grid = half_sphere_grid(
            bp.sys.d,
            directions=directions,
            gamma_levels=gamma_levels,
            gamma_floor=gamma_floor,
            include_zero=include_zero,
        )
    grid = [_as_frequency(z, bp.sys.d) for z in grid]
    values = np.zeros(len(grid))
    converged = [True] * len(grid)
    failures: list[dict] = []
    for i, freq in enumerate(grid):
        try:
            val, info = lopatinski_det(bp, p, freq, gammas=gammas, details=True)
        except (GapTooSmall, Singular, DimensionMismatch) as exc:
            failures.append({"index": i, "gamma": freq.gamma, "reason": str(exc)})
            values[i] = 0.0
            converged[i] = False
            continue
        values[i] = val
        converged[i] = bool(info["converged"])
    return ScanResult(
        grid=list(grid),
        values=values,
        gamma_floor=gamma_floor,
        converged=converged,
        failures=failures,
        label=label,
    )


def refine_scan_minimum(
    bp: BoundaryProblem,
    p,
    start,
    gammas=None,
    maxiter: int = 300,
) -> tuple[float, Frequency]:
    """Polish a grid minimum by derivative-free search on the half-sphere.

    Grid scans resolve |D| only to the grid spacing; an actual Lopatinski
    zero sits at an isolated frequency between grid points.  This seeds a
    Nelder-Mead search at ``start`` (typically a scan argmin), folding gamma
    through its absolute value so iterates stay on the closed half-sphere.
    Returns the refined value and frequency.
    """
    start = _as_frequency(start, bp.sys.d)
    x0 = start.as_array()

    def fold(x: np.ndarray) -> Frequency | None:
        v = np.array([*x[:-1], abs(x[-1])])
        norm = np.linalg.norm(v)
        if norm == 0:
            return None
        v = v / norm
        return Frequency(v[0], tuple(v[1:-1]), v[-1])

    def objective(x: np.ndarray) -> float:
        freq = fold(x)
        if freq is None:
            return 1.0
        try:
            return lopatinski_det(bp, p, freq, gammas=gammas)
        except (GapTooSmall, Singular, DimensionMismatch):
            return 1.0

    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={"maxiter": maxiter, "xatol": 1e-12, "fatol": 1e-15},
    )
    best = fold(res.x)
    if best is None or res.fun > objective(x0):
        return objective(x0), start
    return float(res.fun), best


# ------------------------------------------------- reduced boundary conditions


@dataclass
class ReducedPair:
    """Boundary conditions split across an invariant decomposition.

    The state space splits as the direct sum of two invariant subspaces of
    the boundary symbol.  The boundary-target space splits as F0 + F1 with
    F0 the image of the stable part of the first block and F1 its orthogonal
    complement; the reduced condition for block j is the compression of M
    between block j and F_j.  By construction the F1 component of M
    annihilates the stable part of block 0 (recorded as a residual).
    """

    zeta: Frequency
    e0: SubspaceBasis
    e1: SubspaceBasis
    e0_minus: SubspaceBasis
    e1_minus: SubspaceBasis | None
    f0: SubspaceBasis
    f1: SubspaceBasis
    m0: np.ndarray
    m1: np.ndarray
    g0: np.ndarray
    g1: np.ndarray
    decoupling_residual: float = 0.0

    def __post_init__(self):
        if self.f0.dim != self.e0_minus.dim:
            raise InternalInconsistency(
                f"F0 dimension {self.f0.dim} != stable block-0 dimension "
                f"{self.e0_minus.dim}"
            )
        if self.decoupling_residual > 1e-10:
            raise InternalInconsistency(
                "F1 component of the boundary condition does not vanish on the "
                f"stable part of block 0: residual {self.decoupling_residual:.3e}"
            )

    def _block(self, j: int):
        if j == 0:
            return self.e0, self.e0_minus, self.m0, self.g0
        if j == 1:
            return self.e1, self.e1_minus, self.m1, self.g1
        raise ValueError("block index must be 0 or 1")

    def kernel(self, j: int) -> SubspaceBasis:
        """Kernel of the reduced condition, in block-j coordinates."""
        _, _, m_j, g_j = self._block(j)
        dim = g_j.shape[0]
        if m_j.shape[0] == 0:
            return SubspaceBasis(np.eye(dim, dtype=complex))
        _, sv, vh = np.linalg.svd(m_j)
        rank = int(np.sum(sv > 1e-10 * max(1.0, sv[0])))
        return SubspaceBasis(vh[rank:].conj().T)

    def stable_coordinates(self, j: int) -> SubspaceBasis:
        """Stable subspace of block j, in block-j coordinates."""
        v_j, minus, _, _ = self._block(j)
        if minus is None:
            raise GapTooSmall(
                "stable part of block 1 was not continued to gamma = 0"
            )
        coords = v_j.matrix.conj().T @ minus.matrix
        if coords.shape[1] == 0:
            return SubspaceBasis(coords)
        return orthonormal_basis(coords)

    def reduced_determinant(self, j: int) -> float:
        """|det(E_j,-, ker M_j)| inside block j.

        Raises
        ------
        DimensionMismatch
            If the stable and kernel dimensions do not fill the block.
        """
        stable = self.stable_coordinates(j)
        return subspace_determinant(stable, self.kernel(j))


def _split_projector(g: np.ndarray, split) -> np.ndarray:
    """Spectral projector onto the invariant block selected by ``split``."""
    return spectral_projector(g, split)


def reduce_boundary(
    bp: BoundaryProblem,
    p,
    zeta,
    split: Callable[[complex], bool],
    gammas=None,
    angle_tol: float = 1e-5,
    transversality_tol: float = 1e-8,
) -> ReducedPair:
    """Split the boundary conditions across an invariant decomposition.

    ``split`` selects, by eigenvalue, the block E1 of the boundary symbol
    (typically the cluster under study); E0 collects the rest.  The stable
    part of E0 must extend continuously to gamma = 0 along the default
    approach, the boundary condition must have full rank, and its kernel
    must meet the stable part of E0 trivially.  Each clause failing raises
    AssumptionFailure naming the clause.
    """
    freq = _as_frequency(zeta, bp.sys.d)
    try:
        m = bp.boundary_condition(p, freq)
    except Singular as exc:
        raise AssumptionFailure(f"boundary condition rank deficient: {exc}") from exc
    g = build_G(bp.sys, p, freq)
    n = bp.sys.n

    proj1 = _split_projector(g, split)
    rank1 = int(round(np.real(np.trace(proj1))))
    u, _, _ = np.linalg.svd(proj1)
    v1 = SubspaceBasis(u[:, :rank1])
    u0, _, _ = np.linalg.svd(np.eye(n) - proj1)
    v0 = SubspaceBasis(u0[:, : n - rank1])

    def restriction(v: SubspaceBasis) -> np.ndarray:
        g_j = v.matrix.conj().T @ g @ v.matrix
        resid = np.linalg.norm(g @ v.matrix - v.matrix @ g_j)
        if resid > 1e-8 * max(1.0, np.linalg.norm(g)):
            raise InternalInconsistency(
                f"selected block is not invariant: residual {resid:.3e}"
            )
        return g_j

    g0 = restriction(v0)
    g1 = restriction(v1)

    empty = SubspaceBasis(np.zeros((n, 0), dtype=complex))

    # stable parts; block 0 must be continuable to gamma = 0
    if v0.dim == 0:
        e0_minus = empty
    elif freq.gamma > 0:
        try:
            s0 = half_plane_subspace(g0, "im<0")
        except Exception as exc:
            raise AssumptionFailure(
                f"stable part of block 0 unresolved at gamma > 0: {exc}"
            ) from exc
        e0_minus = orthonormal_basis(v0.matrix @ s0.matrix) if s0.dim else empty
    else:
        e0_minus, continuity = _limit_block_stable(
            bp, p, freq, split, gammas=gammas, angle_tol=angle_tol
        )
        if not continuity["converged"]:
            raise AssumptionFailure(
                "continuity: stable part of block 0 did not converge along the "
                f"approach to gamma = 0 (last angle {continuity['angles'][-1]:.3e})"
                if continuity.get("angles")
                else "continuity: stable part of block 0 did not converge"
            )
    if v1.dim == 0:
        e1_minus = empty
    elif freq.gamma > 0:
        try:
            s1 = half_plane_subspace(g1, "im<0")
        except OnBoundary:
            s1 = None
        e1_minus = (
            (orthonormal_basis(v1.matrix @ s1.matrix) if s1.dim else empty)
            if s1 is not None
            else None
        )
    else:
        e1_minus = None

    # full-rank and kernel-dimension clause
    n_plus = positive_count(bp.sys, p)
    kernel = bp.kernel(p, freq)
    if kernel.dim != n - n_plus:
        raise AssumptionFailure(
            f"kernel dimension {kernel.dim} != {n - n_plus} (state dimension "
            "minus stable dimension)"
        )

    # transversality clause: ker M meets the stable part of block 0 trivially
    if e0_minus.dim and kernel.dim:
        overlap = np.linalg.svd(
            e0_minus.matrix.conj().T @ kernel.matrix, compute_uv=False
        )
        if overlap[0] > 1.0 - transversality_tol:
            raise AssumptionFailure(
                "transversality: ker M meets the stable part of block 0 "
                f"(largest subspace alignment {overlap[0]:.12f})"
            )

    # image of the stable block-0 part under M, and its orthocomplement
    mf = m @ e0_minus.matrix
    if e0_minus.dim:
        sv_f = np.linalg.svd(mf, compute_uv=False)
        if sv_f[-1] <= 1e-10 * max(1.0, sv_f[0]):
            raise AssumptionFailure(
                "transversality: M drops rank on the stable part of block 0"
            )
        f0 = orthonormal_basis(mf)
    else:
        f0 = SubspaceBasis(np.zeros((n_plus, 0), dtype=complex))
    comp = np.eye(n_plus, dtype=complex) - f0.projector()
    uq, _, _ = np.linalg.svd(comp)
    f1 = SubspaceBasis(uq[:, : n_plus - f0.dim])

    m0 = f0.matrix.conj().T @ m @ v0.matrix
    m1 = f1.matrix.conj().T @ m @ v1.matrix
    residual = (
        float(np.linalg.norm(f1.matrix.conj().T @ mf) / max(1.0, np.linalg.norm(m)))
        if e0_minus.dim
        else 0.0
    )

    return ReducedPair(
        zeta=freq,
        e0=v0,
        e1=v1,
        e0_minus=e0_minus,
        e1_minus=e1_minus,
        f0=f0,
        f1=f1,
        m0=m0,
        m1=m1,
        g0=g0,
        g1=g1,
        decoupling_residual=residual,
    )


def _limit_block_stable(
    bp: BoundaryProblem,
    p,
    freq: Frequency,
    split,
    gammas=None,
    angle_tol: float = 1e-5,
):
    """Continue the stable part of block 0 down to gamma = 0."""
    if gammas is None:
        gammas = [2.0 ** (-k) for k in range(4, 21)]
    bases: list[SubspaceBasis] = []
    used = []
    n = bp.sys.n
    for gval in gammas:
        fq = freq.with_gamma(float(gval))
        g = build_G(bp.sys, p, fq)
        proj1 = _split_projector(g, split)
        rank1 = int(round(np.real(np.trace(proj1))))
        if rank1 == n:
            bases.append(SubspaceBasis(np.zeros((n, 0), dtype=complex)))
            used.append(float(gval))
            continue
        u0, _, _ = np.linalg.svd(np.eye(n) - proj1)
        v0 = SubspaceBasis(u0[:, : n - rank1])
        g0 = v0.matrix.conj().T @ g @ v0.matrix
        try:
            s0 = half_plane_subspace(g0, "im<0")
        except Exception:
            continue
        if s0.dim == 0:
            bases.append(SubspaceBasis(np.zeros((n, 0), dtype=complex)))
        else:
            bases.append(orthonormal_basis(v0.matrix @ s0.matrix))
        used.append(float(gval))
    if not bases:
        raise AssumptionFailure(
            "continuity: no approach point resolved the stable part of block 0"
        )
    angles = []
    for prev, cur in zip(bases, bases[1:]):
        if prev.dim != cur.dim:
            angles.append(np.pi / 2)
        elif prev.dim == 0:
            angles.append(0.0)
        else:
            ang = subspace_angles(prev.matrix, cur.matrix)
            angles.append(float(ang[0]) if len(ang) else 0.0)
    converged = bool(angles and angles[-1] < angle_tol) or len(bases) == 1
    return bases[-1], {
        "converged": converged,
        "method": "limit",
        "angles": angles,
        "gammas": used,
    }


def check_reduced_equivalence(
    bp: BoundaryProblem,
    p,
    zetas: Sequence,
    split: Callable[[complex], bool],
    threshold: float = 1e-6,
    gammas=None,
) -> dict:
    """Compare the full Lopatinski bound with the two reduced bounds.

    Evaluates |D| and both reduced determinants at every sample and checks
    that a uniform lower bound on the full determinant holds exactly when
    both reduced determinants admit one.  The report carries per-sample
    values, the three minima, the pass/fail verdicts and, when the verdicts
    disagree in the marginal regime, the side that failed.
    """
    rows = []
    for z in zetas:
        freq = _as_frequency(z, bp.sys.d)
        pair = reduce_boundary(bp, p, freq, split, gammas=gammas)
        full = lopatinski_det(bp, p, freq, gammas=gammas)
        rows.append(
            {
                "zeta": {"tau": freq.tau, "eta": list(freq.eta), "gamma": freq.gamma},
                "full": float(full),
                "reduced0": float(pair.reduced_determinant(0)),
                "reduced1": float(pair.reduced_determinant(1)),
            }
        )
    mins = {
        "full": min(r["full"] for r in rows),
        "reduced0": min(r["reduced0"] for r in rows),
        "reduced1": min(r["reduced1"] for r in rows),
    }
    full_pass = mins["full"] >= threshold
    red_pass = mins["reduced0"] >= threshold and mins["reduced1"] >= threshold
    failing = None
    if not red_pass:
        failing = "reduced0" if mins["reduced0"] < threshold else "reduced1"
    elif not full_pass:
        failing = "full"
    return {
        "samples": rows,
        "minima": mins,
        "threshold": threshold,
        "full_pass": full_pass,
        "reduced_pass": red_pass,
        "agree": full_pass == red_pass,
        "failing_side": failing,
    }
