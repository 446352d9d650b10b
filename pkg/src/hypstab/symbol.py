"""First-order hyperbolic systems: symbol assembly, exact characteristic
polynomials, and structural checks (hyperbolicity, Friedrichs symmetry,
noncharacteristic boundary, genuine coupling of a viscous extension).

A system is N equations in d space dimensions, tau Id + sum_j xi_j A_j(p);
parameters p are opaque closures' arguments, never interpreted here.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .errors import MissingSymmetrizer, MultiplicityMismatch
from .poly import MultivariatePolynomial
from .util import unit_directions

__all__ = [
    "HyperbolicSystem",
    "ViscousExtension",
    "assemble",
    "char_poly",
    "check_hyperbolic",
    "check_friedrichs",
    "check_noncharacteristic",
    "taylor_localization",
    "check_genuine_coupling",
    "load_system",
    "registered_system",
    "MODEL_NAMES",
]

MODEL_NAMES = ("mhd", "euler-isentropic", "maxwell-biaxial")


@dataclass(frozen=True)
class HyperbolicSystem:
    """A first-order system tau Id + sum_j xi_j A_j(p).

    Parameters
    ----------
    n : int
        State dimension.
    d : int
        Space dimension.
    coeff : callable
        Maps a parameter p to the list [A_1(p), ..., A_d(p)] of real N x N
        arrays.  Must be safe to call from concurrent workers.
    symmetrizer : callable, optional
        Maps p to a symmetric positive definite S(p) with every S A_j
        symmetric (Friedrichs symmetrizer).
    boundary_index : int
        1-based index of the distinguished boundary coordinate; defaults to d
        (the last one).
    label : str
        Informal name used in reports.
    """

    n: int
    d: int
    coeff: Callable[[object], Sequence[np.ndarray]]
    symmetrizer: Callable[[object], np.ndarray] | None = None
    boundary_index: int = 0  # 0 means "default to d"
    label: str = ""

    def __post_init__(self):
        if self.boundary_index == 0:
            object.__setattr__(self, "boundary_index", self.d)
        if not (1 <= self.boundary_index <= self.d):
            raise ValueError(
                f"boundary_index {self.boundary_index} outside 1..{self.d}"
            )

    @property
    def boundary_axis(self) -> int:
        """0-based position of the boundary coordinate."""
        return self.boundary_index - 1

    @property
    def tangential_axes(self) -> list[int]:
        return [j for j in range(self.d) if j != self.boundary_axis]

    def matrices(self, p) -> list[np.ndarray]:
        mats = [np.asarray(a, dtype=float) for a in self.coeff(p)]
        if len(mats) != self.d:
            raise ValueError(f"coefficient provider returned {len(mats)} matrices, expected {self.d}")
        for a in mats:
            if a.shape != (self.n, self.n):
                raise ValueError(f"coefficient matrix has shape {a.shape}, expected {(self.n, self.n)}")
        return mats

    def boundary_matrix(self, p) -> np.ndarray:
        return self.matrices(p)[self.boundary_axis]

    def s_matrix(self, p) -> np.ndarray:
        if self.symmetrizer is None:
            raise MissingSymmetrizer(f"system {self.label or '<anonymous>'} has no symmetrizer")
        return np.asarray(self.symmetrizer(p), dtype=float)


@dataclass(frozen=True)
class ViscousExtension:
    """Second-order (viscous) extension: matrices B_{j,k}(p), j,k = 1..d.

    ``b(p)`` returns a d x d nested list of real N x N arrays; the quadratic
    symbol is B(p, xi) = sum_{j,k} xi_j xi_k B_{j,k}(p).
    """

    b: Callable[[object], Sequence[Sequence[np.ndarray]]]

    def symbol(self, p, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        rows = self.b(p)
        n = np.asarray(rows[0][0]).shape[0]
        out = np.zeros((n, n))
        for j in range(len(xi)):
            for k in range(len(xi)):
                out = out + xi[j] * xi[k] * np.asarray(rows[j][k], dtype=float)
        return out


def assemble(sys: HyperbolicSystem, p, xi) -> np.ndarray:
    """A(p, xi) = sum_j xi_j A_j(p)."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (sys.d,):
        raise ValueError(f"xi must have {sys.d} entries")
    mats = sys.matrices(p)
    out = np.zeros((sys.n, sys.n))
    for x, a in zip(xi, mats):
        if x:
            out = out + x * a
    return out


def char_poly(sys: HyperbolicSystem, p) -> MultivariatePolynomial:
    """Exact characteristic polynomial det(tau Id + A(p, xi)).

    Variables are ordered (tau, xi_1, ..., xi_d).  The expansion is exact
    (cofactor expansion by minors over column subsets with memoization);
    entries are affine in the frequency variables so no division occurs.

    Raises
    ------
    ValueError
        If N > 14 (dense expansion would be infeasible).
    """
    n, d = sys.n, sys.d
    if n > 14:
        raise ValueError(f"char_poly limited to N <= 14, got N = {n}")
    mats = sys.matrices(p)
    nvars = 1 + d
    entries: list[list[MultivariatePolynomial | None]] = []
    for i in range(n):
        row = []
        for j in range(n):
            lin = [1.0 if i == j else 0.0] + [mats[k][i, j] for k in range(d)]
            if any(lin):
                row.append(MultivariatePolynomial.affine(0.0, lin))
            else:
                row.append(None)
        entries.append(row)

    # determinant by expansion over column subsets: level r holds the minors
    # of the first r rows against every r-subset of columns
    prev: dict[int, MultivariatePolynomial] = {0: MultivariatePolynomial.constant(nvars, 1.0)}
    for r in range(1, n + 1):
        cur: dict[int, MultivariatePolynomial] = {}
        row = entries[r - 1]
        for cols in combinations(range(n), r):
            total = None
            for t, j in enumerate(cols):
                e = row[j]
                if e is None:
                    continue
                mask = 0
                for c in cols:
                    if c != j:
                        mask |= 1 << c
                sub = prev.get(mask)
                if sub is None:
                    continue
                term = e * sub
                if (r - 1 + t) % 2:
                    term = -term
                total = term if total is None else total + term
            if total is not None and total.coeffs:
                mask_full = 0
                for c in cols:
                    mask_full |= 1 << c
                cur[mask_full] = total
        prev = cur
    full_mask = (1 << n) - 1
    return prev.get(full_mask, MultivariatePolynomial.zero(nvars))


def taylor_localization(
    poly: MultivariatePolynomial, root, m: int, rel_tol: float = 1e-9
) -> MultivariatePolynomial:
    """Degree-m homogeneous Taylor term of ``poly`` at ``root``.

    ``root`` is the full frequency point (tau, xi_1, ..., xi_d).  All Taylor
    terms of total degree below m must vanish (relative tolerance
    ``rel_tol``); they are dropped exactly, and terms above m are discarded,
    so the result is homogeneous of degree m.

    Raises
    ------
    MultiplicityMismatch
        If a lower-degree term survives, or the degree-m part vanishes.
    """
    point = np.asarray(root, dtype=complex)
    shifted = poly.shift(point)
    scale = max(1e-300, shifted.max_abs_coeff)
    worst = 0.0
    for k, v in shifted.coeffs.items():
        if sum(k) < m:
            worst = max(worst, abs(v))
    if worst > rel_tol * scale:
        raise MultiplicityMismatch(
            f"Taylor term of degree < {m} has size {worst:.3e} "
            f"(relative {worst / scale:.3e}); the root multiplicity is lower than {m}"
        )
    out = shifted.homogeneous_part(m)
    if not out.coeffs or out.max_abs_coeff <= rel_tol * scale:
        raise MultiplicityMismatch(
            f"degree-{m} Taylor term vanishes; the root multiplicity exceeds {m}"
        )
    return out


# ---- structural checks ------------------------------------------------


@dataclass(frozen=True)
class HyperbolicityReport:
    passed: bool
    worst_imag: float
    worst_xi: np.ndarray
    tolerance: float
    samples: int

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "worst_imag": self.worst_imag,
            "worst_xi": list(map(float, self.worst_xi)),
            "tolerance": self.tolerance,
            "samples": self.samples,
        }


def check_hyperbolic(sys: HyperbolicSystem, p, sample_count: int = 200) -> HyperbolicityReport:
    """Sample unit frequencies and test that A(p, xi) has real spectrum.

    Tolerance is 1e-8 times the Frobenius norm of the sampled symbol.
    """
    dirs = unit_directions(sample_count, sys.d)
    worst = -1.0
    worst_xi = dirs[0]
    tol_used = 0.0
    passed = True
    for xi in dirs:
        a = assemble(sys, p, xi)
        scale = max(1.0, float(np.linalg.norm(a)))
        tol = 1e-8 * scale
        im = float(np.max(np.abs(np.linalg.eigvals(a).imag)))
        if im > worst:
            worst, worst_xi, tol_used = im, xi, tol
        if im > tol:
            passed = False
    return HyperbolicityReport(passed, worst, np.asarray(worst_xi), tol_used, sample_count)


@dataclass(frozen=True)
class FriedrichsReport:
    passed: bool
    min_eigenvalue: float
    max_asymmetry: float

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "min_eigenvalue": self.min_eigenvalue,
            "max_asymmetry": self.max_asymmetry,
        }


def check_friedrichs(sys: HyperbolicSystem, p) -> FriedrichsReport:
    """Verify S(p) is SPD and every S(p) A_j(p) is symmetric.

    Raises
    ------
    MissingSymmetrizer
        If the system carries no symmetrizer.
    """
    s = sys.s_matrix(p)
    sym_err = float(np.linalg.norm(s - s.T))
    min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (s + s.T))))
    max_asym = sym_err
    for a in sys.matrices(p):
        sa = s @ a
        max_asym = max(max_asym, float(np.max(np.abs(sa - sa.T))))
    passed = min_eig > 1e-10 and max_asym <= 1e-10 * max(1.0, float(np.linalg.norm(s)))
    return FriedrichsReport(passed, min_eig, max_asym)


@dataclass(frozen=True)
class NoncharacteristicReport:
    passed: bool
    det_abs: float
    threshold: float

    def to_dict(self) -> dict:
        return {"passed": self.passed, "det_abs": self.det_abs, "threshold": self.threshold}


def check_noncharacteristic(sys: HyperbolicSystem, p) -> NoncharacteristicReport:
    """|det A_d(p)| against the scale-aware threshold 1e-10 * ||A_d||^N."""
    a_d = sys.boundary_matrix(p)
    det = float(abs(np.linalg.det(a_d)))
    norm = float(np.linalg.norm(a_d, 2))
    threshold = 1e-10 * norm**sys.n if norm > 0 else 1e-10
    return NoncharacteristicReport(det > threshold, det, threshold)


@dataclass(frozen=True)
class GenuineCouplingReport:
    passed: bool
    min_eigenvector_margin: float
    min_cluster_eigenvalue: float
    worst_xi: np.ndarray
    samples: int
    viscosity_psd_margin: float

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "min_eigenvector_margin": self.min_eigenvector_margin,
            "min_cluster_eigenvalue": self.min_cluster_eigenvalue,
            "worst_xi": list(map(float, self.worst_xi)),
            "samples": self.samples,
            "viscosity_psd_margin": self.viscosity_psd_margin,
        }


def check_genuine_coupling(
    sys: HyperbolicSystem,
    visc: ViscousExtension,
    p,
    sample_count: int = 100,
    margin_tol: float = 1e-8,
) -> GenuineCouplingReport:
    """No eigenvector of A(p, xi) may lie in ker B(p, xi), on sampled unit xi.

    Reports the minimum of ||B v|| over unit eigenvectors v, and per
    eigenvalue cluster with orthonormal basis V the minimum eigenvalue of
    V^H S B V.  Also reports the worst PSD margin of S B(xi) (the
    dissipativity of the viscous extension).
    """
    from .spectral import cluster_eigenvalues

    s = sys.s_matrix(p)
    dirs = unit_directions(sample_count, sys.d)
    min_margin = np.inf
    min_cluster = np.inf
    psd_margin = np.inf
    worst_xi = dirs[0]
    for xi in dirs:
        a = assemble(sys, p, xi)
        b = visc.symbol(p, xi)
        sb = s @ b
        sb_h = 0.5 * (sb + sb.T)
        psd_margin = min(psd_margin, float(np.min(np.linalg.eigvalsh(sb_h))))
        _, vecs = np.linalg.eig(a)
        norms = np.linalg.norm(b @ vecs, axis=0) / np.linalg.norm(vecs, axis=0)
        m = float(np.min(norms))
        if m < min_margin:
            min_margin, worst_xi = m, xi
        for cl in cluster_eigenvalues(a):
            u, sv, _ = np.linalg.svd(cl.projector)
            vbasis = u[:, : cl.multiplicity]
            h = vbasis.conj().T @ sb_h @ vbasis
            min_cluster = min(
                min_cluster, float(np.min(np.linalg.eigvalsh(0.5 * (h + h.conj().T))))
            )
    passed = min_margin > margin_tol and min_cluster > margin_tol * 1e-2
    return GenuineCouplingReport(
        passed, float(min_margin), float(min_cluster), np.asarray(worst_xi), sample_count, float(psd_margin)
    )


# ---- loading and registry ----------------------------------------------


def load_system(source) -> HyperbolicSystem:
    """Build a constant-coefficient system from a JSON document.

    ``source`` may be a dict, a JSON string, or a path to a JSON file with
    fields {"N", "d", "matrices", "symmetrizer"?, "boundary_index"?}; matrices
    are row-major nested lists, one per space dimension.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = None
        try:
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        except (OSError, TypeError):
            text = source
        doc = json.loads(text)
    n = int(doc["N"])
    d = int(doc["d"])
    mats = [np.asarray(m, dtype=float) for m in doc["matrices"]]
    if len(mats) != d:
        raise ValueError(f"expected {d} matrices, got {len(mats)}")
    for m in mats:
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} != ({n}, {n})")
    symmetrizer = None
    if doc.get("symmetrizer") is not None:
        s = np.asarray(doc["symmetrizer"], dtype=float)
        if s.shape != (n, n):
            raise ValueError(f"symmetrizer shape {s.shape} != ({n}, {n})")
        symmetrizer = lambda p, _s=s: _s  # noqa: E731
    return HyperbolicSystem(
        n=n,
        d=d,
        coeff=lambda p, _m=mats: _m,
        symmetrizer=symmetrizer,
        boundary_index=int(doc.get("boundary_index", d)),
        label=str(doc.get("label", "json-system")),
    )


def registered_system(name: str, config: dict | None = None):
    """Bundled model by name: returns (system, parameter_value).

    Recognized names: "mhd", "euler-isentropic", "maxwell-biaxial".
    ``config`` carries model-specific state fields; missing fields use the
    model's documented defaults.
    """
    from . import models

    return models.build(name, config or {})
