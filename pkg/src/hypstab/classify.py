"""Classification of characteristic roots: multiplicities, tangent systems,
regularity class (geometrically regular, algebraically regular, linearly
splitting), glancing class, linear-splitting validation, and the block
structure condition for boundary-symbol blocks.

Regularity classification is evidence-based: eigenvalue branches are sampled
along rays off the root and their splitting order and limiting eigendirections
are measured.  When the evidence is inconsistent the verdict is
``undetermined`` — the classifier never guesses.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import symbol as symbol_mod
from .errors import (
    InternalInconsistency,
    BadManifold,
    NotCharacteristic,
    NotSemiSimple,
)
from .poly import MultivariatePolynomial
from .spectral import spectral_projector
from .symbol import HyperbolicSystem, assemble, char_poly, taylor_localization
from .util import unit_directions

__all__ = [
    "TangentSystem",
    "RootClassification",
    "RegularityProbe",
    "multiplicities",
    "tangent_system",
    "classify_regularity",
    "classify_glancing",
    "classify_root",
    "check_linear_splitting",
    "check_block_structure",
]


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class TangentSystem:
    """First-order localized system at a semi-simple multiple root.

    The reduced symbol is tau Id_m + sum_j xi_j a_prime[j]; ``v`` (N x m) and
    ``w`` (m x N) are the right/left reduction bases with w @ v = Id, and
    ``e_const`` is the constant relating det(tau Id + A'(xi)) to the Taylor
    localization of the full characteristic polynomial.
    """

    m: int
    a_prime: list[np.ndarray]
    v: np.ndarray
    w: np.ndarray
    tau_root: float
    xi_root: np.ndarray
    boundary_axis: int
    e_const: complex
    e_spread: float

    def a_prime_dir(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = np.zeros((self.m, self.m), dtype=complex)
        for x, a in zip(xi, self.a_prime):
            out = out + x * a
        return out

    @property
    def boundary_block(self) -> np.ndarray:
        """The tangent system's boundary matrix A'_d."""
        return self.a_prime[self.boundary_axis]


@dataclass
class RootClassification:
    """Aggregated verdicts for one characteristic root."""

    tau_root: float
    eta_root: np.ndarray
    xi_normal: float
    alg_mult: int
    geom_mult: int
    semi_simple: bool
    regularity: str
    splitting_codim: int | None
    glancing: str
    tangent: TangentSystem | None
    evidence: dict

    def __post_init__(self):
        if self.geom_mult > self.alg_mult:
            raise InternalInconsistency("geometric multiplicity exceeds algebraic")
        if self.semi_simple != (self.geom_mult == self.alg_mult):
            raise InternalInconsistency("semi_simple flag inconsistent")
        if self.glancing in ("totally_incoming", "totally_outgoing") and not self.evidence.get(
            "nonglancing", True
        ):
            raise InternalInconsistency("totally in/outgoing root marked glancing")

    def to_json(self) -> str:
        doc = {
            "tau": self.tau_root,
            "eta": list(map(float, np.atleast_1d(self.eta_root))),
            "xi_normal": self.xi_normal,
            "alg_mult": self.alg_mult,
            "geom_mult": self.geom_mult,
            "semi_simple": self.semi_simple,
            "regularity": self.regularity,
            "splitting_codim": self.splitting_codim,
            "glancing": self.glancing,
            "evidence": _jsonable(self.evidence),
        }
        return json.dumps(doc, sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


@dataclass(frozen=True)
class RegularityProbe:
    """Sampling parameters for the ray-probe regularity classifier."""

    directions: int = 64
    s_max: float = 1e-2
    s_min: float = 1e-6
    s_count: int = 9
    projector_tol: float = 1e-5
    smooth_rel_tol: float = 1e-2
    seed: int = 1799

    @property
    def s_values(self) -> np.ndarray:
        return np.geomspace(self.s_max, self.s_min, self.s_count)


# ---------------------------------------------------------- multiplicities


def multiplicities(
    sys: HyperbolicSystem, p, tau_root: float, xi_root, poly: MultivariatePolynomial | None = None
) -> tuple[int, int, bool]:
    """(algebraic, geometric, semi-simple) multiplicity of a characteristic root.

    Algebraic multiplicity comes from vanishing tau-derivatives of the exact
    characteristic polynomial; geometric multiplicity is the kernel dimension
    of tau Id + A(p, xi) with singular-value threshold 1e-8 ||A||.

    Raises
    ------
    NotCharacteristic
        If (tau_root, xi_root) is not a root.
    """
    xi_root = np.asarray(xi_root, dtype=float)
    if poly is None:
        poly = char_poly(sys, p)
    alg = poly.tau_multiplicity((tau_root, *xi_root))
    if alg == 0:
        val = poly((tau_root, *xi_root))
        raise NotCharacteristic(
            f"(tau, xi) = ({tau_root}, {xi_root}) is not a characteristic root "
            f"(polynomial value {abs(val):.3e})"
        )
    a = assemble(sys, p, xi_root)
    mat = tau_root * np.eye(sys.n) + a
    svals = np.linalg.svd(mat, compute_uv=False)
    thresh = 1e-8 * max(1.0, float(np.linalg.norm(a)))
    geom = int(np.sum(svals <= thresh))
    return alg, geom, bool(alg == geom)


# ---------------------------------------------------------- tangent system


def tangent_system(
    sys: HyperbolicSystem,
    p,
    tau_root: float,
    xi_root,
    poly: MultivariatePolynomial | None = None,
    check_points: int = 50,
) -> TangentSystem:
    """Reduce the symbol to the m x m tangent system at a semi-simple root.

    The right basis spans the eigenspace (orthonormal columns); the left basis
    is V^H S normalized to W V = Id when a symmetrizer is available, and the
    Riesz projector dual otherwise.  The determinant identity
    det(tau Id + A'(xi)) = e_const * (localized characteristic polynomial) is
    verified at ``check_points`` random frequencies.

    Raises
    ------
    NotSemiSimple
        If the root's geometric multiplicity is below the algebraic one.
    """
    xi_root = np.asarray(xi_root, dtype=float)
    if poly is None:
        poly = char_poly(sys, p)
    alg, geom, semi = multiplicities(sys, p, tau_root, xi_root, poly=poly)
    if not semi:
        raise NotSemiSimple(f"root has alg mult {alg} but geom mult {geom}")
    m = alg
    a_base = assemble(sys, p, xi_root)
    lam = -tau_root

    proj = spectral_projector(a_base, lambda mu: abs(mu - lam) < _cluster_radius(a_base, lam))
    u, sv, _ = np.linalg.svd(proj)
    v = u[:, :m]
    if sys.symmetrizer is not None:
        s = sys.s_matrix(p)
        w0 = v.conj().T @ s
        w = np.linalg.solve(w0 @ v, w0)
    else:
        w = v.conj().T @ proj
    wv = w @ v
    if np.linalg.norm(wv - np.eye(m)) > 1e-10 * max(1.0, m):
        raise InternalInconsistency("left/right tangent bases fail W V = Id")
    a_prime = [w @ aj @ v for aj in sys.matrices(p)]
    base = sum(x * a for x, a in zip(xi_root, a_prime))
    if np.linalg.norm(base + tau_root * np.eye(m)) > 1e-9 * max(1.0, abs(tau_root)):
        raise InternalInconsistency("tangent system violates A'(xi_root) = -tau Id")

    # determinant identity against the localized characteristic polynomial
    loc = taylor_localization(poly, (tau_root, *xi_root), m)
    rng = np.random.default_rng(98101)
    ratios = []
    tries = 0
    while len(ratios) < check_points and tries < 20 * check_points:
        tries += 1
        pt = rng.standard_normal(1 + sys.d)
        denom = loc(pt)
        a_dir = sum(x * a for x, a in zip(pt[1:], a_prime))
        num = np.linalg.det(pt[0] * np.eye(m) + a_dir)
        if abs(denom) < 1e-6 * max(1.0, loc.max_abs_coeff):
            continue
        ratios.append(num / denom)
    if len(ratios) < check_points:
        raise InternalInconsistency("could not sample the determinant identity")
    ratios = np.asarray(ratios)
    e_const = complex(np.mean(ratios))
    spread = float(np.max(np.abs(ratios - e_const)) / max(1e-300, abs(e_const)))
    if spread > 1e-3:
        raise InternalInconsistency(
            f"tangent determinant identity violated: constant spread {spread:.3e}"
        )
    return TangentSystem(
        m=m,
        a_prime=a_prime,
        v=v,
        w=w,
        tau_root=float(tau_root),
        xi_root=xi_root,
        boundary_axis=sys.boundary_axis,
        e_const=e_const,
        e_spread=spread,
    )


def _cluster_radius(a: np.ndarray, lam: float) -> float:
    """Half-distance from lam to the nearest eigenvalue outside its cluster."""
    eigs = np.linalg.eigvals(a)
    d = np.sort(np.abs(eigs - lam))
    scale = max(1.0, float(np.linalg.norm(a)))
    inside = d[d <= 1e-6 * scale]
    outside = d[d > 1e-6 * scale]
    if len(outside) == 0:
        return np.inf
    if len(inside) == 0:
        return 0.5 * float(outside[0])
    return 0.5 * (float(outside[0]) + float(inside[-1]))


# ------------------------------------------------------ regularity probing


def _branch_samples(sys, p, xi_root, lam, omega, s_values, m):
    """Eigenvalues near lam along the ray xi_root + s*omega, per s.

    Returns (s_used, branches (len(s_used) x m sorted), scale) dropping s
    where the cluster cannot be separated from the remaining spectrum.
    """
    s_used, rows, scales = [], [], []
    for s in s_values:
        a = assemble(sys, p, xi_root + s * omega)
        eigs = np.linalg.eigvals(a)
        order = np.argsort(np.abs(eigs - lam))
        cluster = eigs[order[:m]]
        if len(eigs) > m:
            d_in = np.max(np.abs(cluster - lam))
            d_out = np.abs(eigs[order[m]] - lam)
            if d_out < max(2.0 * d_in, 1e-9):
                continue  # external branch bleeding into the cluster
        rows.append(np.sort(cluster.real))
        s_used.append(s)
        scales.append(float(np.linalg.norm(a)))
    return np.asarray(s_used), np.asarray(rows), (max(scales) if scales else 1.0)


def _ray_fit(s_used, rows, lam, scale, probe):
    """Per-ray branch fit: splitting order, smoothness, slopes."""
    m = rows.shape[1]
    noise = 1e3 * np.finfo(float).eps * scale
    sep = np.array([np.max(row) - np.min(row) for row in rows])
    info = {"n_s": len(s_used)}
    if np.all(sep <= 10 * noise):
        info["kind"] = "constant"
        return info
    usable = sep > 100 * noise
    if np.sum(usable) < 3:
        info["kind"] = "faint"
        return info
    slope, _ = np.polyfit(np.log(s_used[usable]), np.log(sep[usable]), 1)
    info["sep_order"] = float(slope)
    # quadratic fit per branch; smoothness relative to the branch spread
    max_resid = 0.0
    slopes = []
    for i in range(m):
        vals = rows[:, i] - lam
        spread = max(np.max(np.abs(vals)), noise)
        coeff = np.polyfit(s_used, vals, 2)
        resid = np.max(np.abs(np.polyval(coeff, s_used) - vals))
        max_resid = max(max_resid, resid / spread)
        slopes.append(float(coeff[1]))
    info["fit_residual"] = float(max_resid)
    info["slopes"] = slopes
    info["smooth"] = bool(max_resid < probe.smooth_rel_tol)
    if abs(slope - 1.0) < 0.25:
        info["kind"] = "linear"
        info["split_rate"] = float(np.max(slopes) - np.min(slopes))
    elif slope > 1.6:
        info["kind"] = "quadratic"
    else:
        info["kind"] = "other"
    return info


def _ray_projectors(sys, p, xi_root, lam, omega, s_used, m, scale):
    """Extrapolated limits of the 1-d eigen-direction projectors along a ray.

    Returns a list of m rank-one orthogonal projectors, or None when the
    branches never separate enough for reliable eigenvectors.
    """
    gap_floor = max(1e-8 * scale, 1e4 * np.finfo(float).eps * scale)
    usable = []
    for s in s_used[::-1]:  # small s first
        a = assemble(sys, p, xi_root + s * omega)
        eigs, vecs = np.linalg.eig(a)
        order = np.argsort(np.abs(eigs - lam))
        idx = order[:m]
        cluster = eigs[idx]
        perm = np.argsort(cluster.real)
        idx = idx[perm]
        cluster = cluster[perm]
        gaps = np.diff(cluster.real)
        ext_gap = np.abs(eigs[order[m]] - lam) if len(eigs) > m else np.inf
        if len(gaps) and np.min(gaps) < gap_floor:
            continue
        if ext_gap < gap_floor:
            continue
        projs = []
        for j in idx:
            vv = vecs[:, j] / np.linalg.norm(vecs[:, j])
            projs.append(np.outer(vv, vv.conj()))
        usable.append((s, projs))
        if len(usable) == 2:
            break
    if len(usable) < 2:
        return None
    (s1, p1), (s2, p2) = usable  # s1 < s2
    r = s2 / s1
    return [(r * a - b) / (r - 1.0) for a, b in zip(p1, p2)]


def _projector_set_distance(set_a, set_b) -> float:
    """Min-cost matching distance between two equal-size projector sets."""
    na, nb = len(set_a), len(set_b)
    if na != nb:
        return np.inf
    cost = np.zeros((na, nb))
    for i, a in enumerate(set_a):
        for j, b in enumerate(set_b):
            cost[i, j] = np.linalg.norm(a - b)
    rr, cc = linear_sum_assignment(cost)
    return float(np.max(cost[rr, cc]))


def classify_regularity(
    sys: HyperbolicSystem,
    p,
    tau_root: float,
    xi_root,
    probe: RegularityProbe | None = None,
    poly: MultivariatePolynomial | None = None,
) -> tuple[str, int | None, dict]:
    """Regularity class of a characteristic root from ray-probe evidence.

    Returns (class, splitting_codim, evidence) where class is one of
    ``simple``, ``geometrically_regular``, ``algebraically_regular``,
    ``linearly_splitting``, ``nonregular``, ``undetermined``; the codimension
    is only set for ``linearly_splitting``.

    The evidence dict records, per ray, the branch splitting order, fit
    residuals, and projector-limit distances; and the aggregate decision path.
    A caveat: smooth-fit evidence cannot distinguish infinitely differentiable
    from analytic behaviour; the verdict refers to the sampled scales.
    """
    probe = probe or RegularityProbe()
    xi_root = np.asarray(xi_root, dtype=float)
    if poly is None:
        poly = char_poly(sys, p)
    alg, geom, semi = multiplicities(sys, p, tau_root, xi_root, poly=poly)
    evidence: dict = {
        "alg_mult": alg,
        "geom_mult": geom,
        "caveat": "smoothness attested at sampled scales only",
    }
    if alg == 1:
        evidence["decision"] = "simple root"
        return "simple", None, evidence

    lam = -tau_root
    dirs = unit_directions(probe.directions, sys.d)
    s_values = probe.s_values
    rays = []
    proj_sets = {}
    for r, omega in enumerate(dirs):
        s_used, rows, scale = _branch_samples(sys, p, xi_root, lam, omega, s_values, alg)
        if len(s_used) < 4:
            rays.append({"kind": "unusable", "direction": omega.tolist()})
            continue
        info = _ray_fit(s_used, rows, lam, scale, probe)
        info["direction"] = omega.tolist()
        if info["kind"] in ("linear", "quadratic", "other"):
            projs = _ray_projectors(sys, p, xi_root, lam, omega, s_used, alg, scale)
            if projs is not None:
                proj_sets[r] = projs
                info["projectors"] = "collected"
        rays.append(info)
    evidence["rays"] = rays

    kinds = [r["kind"] for r in rays]
    n_usable = sum(k != "unusable" for k in kinds)
    if n_usable < max(4, probe.directions // 4):
        evidence["decision"] = "too few usable rays"
        return "undetermined", None, evidence

    if all(k in ("constant", "faint") for k in kinds if k != "unusable") and kinds.count(
        "constant"
    ) >= n_usable // 2:
        evidence["decision"] = "constant multiplicity along all rays"
        evidence["constant_multiplicity"] = True
        return "geometrically_regular", None, evidence

    split_rays = [r for r in rays if r["kind"] in ("linear", "quadratic", "other")]
    if not split_rays:
        evidence["decision"] = "no splitting evidence"
        return "undetermined", None, evidence
    smooth_frac = np.mean([bool(r.get("smooth")) for r in split_rays])
    evidence["smooth_fraction"] = float(smooth_frac)

    # projector-limit direction dependence
    if len(proj_sets) < max(4, len(split_rays) // 2):
        evidence["decision"] = "too few projector-limit rays"
        return "undetermined", None, evidence
    keys = sorted(proj_sets)
    ref = proj_sets[keys[0]]
    dists = np.array(
        [_projector_set_distance(ref, proj_sets[k]) for k in keys[1:]]
    )
    evidence["projector_distances"] = {
        "max": float(np.max(dists)),
        "median": float(np.median(dists)),
    }
    independent = bool(np.max(dists) < probe.projector_tol)
    dependent = bool(
        np.max(dists) > 1e-2 and np.median(dists) > 10 * probe.projector_tol
    )

    if independent and smooth_frac > 0.9:
        evidence["decision"] = "smooth splitting, direction-independent eigenvector limits"
        return "geometrically_regular", None, evidence

    order_counts = {
        "linear": sum(r["kind"] == "linear" for r in split_rays),
        "quadratic": sum(r["kind"] == "quadratic" for r in split_rays),
    }
    evidence["order_counts"] = order_counts

    if dependent and smooth_frac > 0.9 and order_counts["quadratic"] > 0.8 * len(split_rays):
        evidence["decision"] = (
            "smooth branches, eigenvector limits depend on the ray direction"
        )
        return "algebraically_regular", None, evidence

    if dependent and order_counts["linear"] > 0.8 * len(split_rays):
        codim, fit_resid = _conic_rate_codim(rays, sys.d)
        evidence["rate_form_residual"] = fit_resid
        if codim is not None and fit_resid < 5e-2:
            ok = _transversal_strictness(sys, p, tau_root, xi_root, poly)
            evidence["transversal_strict"] = ok
            if ok:
                evidence["decision"] = (
                    "linear direction-dependent splitting with conic rates"
                )
                return "linearly_splitting", codim, evidence
        evidence["decision"] = "linear splitting but rate form unresolved"
        return "undetermined", None, evidence

    evidence["decision"] = "mixed evidence"
    return "undetermined", None, evidence


def _conic_rate_codim(rays, d) -> tuple[int | None, float]:
    """Fit splitting-rate^2 as a quadratic form of the ray direction; the
    codimension is its numerical rank."""
    pts = []
    vals = []
    for r in rays:
        if r.get("kind") == "linear" and "split_rate" in r:
            pts.append(np.asarray(r["direction"]))
            vals.append(float(r["split_rate"]) ** 2)
    if len(pts) < d * (d + 1):
        return None, np.inf
    pts = np.asarray(pts)
    vals = np.asarray(vals)
    cols = []
    for i in range(d):
        for j in range(i, d):
            f = pts[:, i] * pts[:, j]
            cols.append(f if i == j else 2.0 * f)
    a = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(a, vals, rcond=None)
    fit = a @ coef
    resid = float(np.linalg.norm(fit - vals) / max(1e-300, np.linalg.norm(vals)))
    q = np.zeros((d, d))
    k = 0
    for i in range(d):
        for j in range(i, d):
            q[i, j] = q[j, i] = coef[k]
            k += 1
    eigs = np.abs(np.linalg.eigvalsh(q))
    rank = int(np.sum(eigs > 1e-3 * np.max(eigs))) if np.max(eigs) > 0 else 0
    return rank, resid


def _transversal_strictness(sys, p, tau_root, xi_root, poly, count: int = 16) -> bool:
    """Tangent system strictly hyperbolic on random (hence transversal)
    directions: real, simple eigenvalues."""
    try:
        ts = tangent_system(sys, p, tau_root, xi_root, poly=poly)
    except (NotSemiSimple, InternalInconsistency):
        return False
    rng = np.random.default_rng(55229)
    for _ in range(count):
        w = rng.standard_normal(sys.d)
        w /= np.linalg.norm(w)
        eigs = np.linalg.eigvals(ts.a_prime_dir(w))
        if np.max(np.abs(eigs.imag)) > 1e-7 * max(1.0, np.max(np.abs(eigs))):
            return False
        re = np.sort(eigs.real)
        if len(re) > 1 and np.min(np.diff(re)) < 1e-7 * max(1.0, re[-1] - re[0], 1.0):
            return False
    return True


# --------------------------------------------------------------- glancing


def classify_glancing(
    sys: HyperbolicSystem,
    p,
    tau_root: float,
    eta_root,
    xi_normal: float,
    poly: MultivariatePolynomial | None = None,
    tol: float = 1e-7,
) -> tuple[str, dict]:
    """Glancing class of a real characteristic root.

    Two routes are computed: the polynomial route evaluates the localized
    characteristic polynomial on the boundary covector dx, and (for
    semi-simple roots) the matrix route inspects the spectrum of the tangent
    system's boundary matrix.  The routes must agree.

    Returns (class, evidence) with class in {"nonglancing_mixed",
    "totally_incoming", "totally_outgoing", "glancing"}.

    Raises
    ------
    InternalInconsistency
        If the two routes disagree.
    """
    eta_root = np.atleast_1d(np.asarray(eta_root, dtype=float))
    xi_full = _full_frequency(sys, eta_root, xi_normal)
    if poly is None:
        poly = char_poly(sys, p)
    alg, geom, semi = multiplicities(sys, p, tau_root, xi_full, poly=poly)
    loc = taylor_localization(poly, (tau_root, *xi_full), alg)
    dx = np.zeros(1 + sys.d)
    dx[1 + sys.boundary_axis] = 1.0
    val = abs(loc(dx))
    scale = loc.max_abs_coeff
    poly_nonglancing = bool(val > tol * scale)
    evidence: dict = {
        "alg_mult": alg,
        "localized_at_dx": val,
        "localized_scale": scale,
        "nonglancing": poly_nonglancing,
        "semi_simple": semi,
    }

    if not semi:
        evidence["matrix_route"] = "skipped (not semi-simple)"
        return ("nonglancing_mixed" if poly_nonglancing else "glancing"), evidence

    ts = tangent_system(sys, p, tau_root, xi_full, poly=poly)
    a_d = ts.boundary_block
    eigs = np.linalg.eigvals(a_d)
    if np.max(np.abs(eigs.imag)) > 1e-7 * max(1.0, np.max(np.abs(eigs))):
        raise InternalInconsistency("tangent boundary matrix has complex spectrum")
    re = eigs.real
    mat_scale = max(1.0, float(np.linalg.norm(a_d)))
    mat_nonglancing = bool(np.min(np.abs(re)) > tol * mat_scale)
    evidence["boundary_spectrum"] = sorted(map(float, re))
    if mat_nonglancing != poly_nonglancing:
        raise InternalInconsistency(
            f"glancing routes disagree: polynomial says nonglancing={poly_nonglancing} "
            f"(value {val:.3e} vs scale {scale:.3e}), matrix spectrum {sorted(re)}"
        )
    if not poly_nonglancing:
        return "glancing", evidence
    if np.all(re > 0):
        return "totally_incoming", evidence
    if np.all(re < 0):
        return "totally_outgoing", evidence
    return "nonglancing_mixed", evidence


def convexity_route(a_d: np.ndarray, count: int = 100) -> bool:
    """Invertibility of alpha Id + (1-alpha) A_d along alpha in [0,1].

    The segment alpha + (1-alpha)*lam crosses zero exactly when lam is real
    and nonpositive, so the verdict is decided per eigenvalue; a grid of
    ``count`` sampled determinants cross-checks it.  True exactly when the
    spectrum of A_d avoids (-inf, 0], the characterization of totally
    incoming roots.
    """
    m = a_d.shape[0]
    scale = max(1.0, float(np.linalg.norm(a_d)))
    eigs = np.linalg.eigvals(a_d)
    for lam in eigs:
        if abs(lam.imag) <= 1e-9 * scale and lam.real <= 1e-9 * scale:
            return False
    for alpha in np.linspace(0.0, 1.0, count):
        mat = alpha * np.eye(m) + (1.0 - alpha) * a_d
        if np.min(np.abs(np.linalg.eigvals(mat))) < 1e-9 * scale:
            raise InternalInconsistency(
                "segment determinant vanished although no eigenvalue lies on (-inf, 0]"
            )
    return True


def _full_frequency(sys: HyperbolicSystem, eta, xi_normal: float) -> np.ndarray:
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    if eta.shape != (sys.d - 1,):
        raise ValueError(f"eta must have {sys.d - 1} entries")
    out = np.zeros(sys.d)
    for e, j in zip(eta, sys.tangential_axes):
        out[j] = e
    out[sys.boundary_axis] = xi_normal
    return out


def classify_root(
    sys: HyperbolicSystem,
    p,
    tau_root: float,
    eta_root,
    xi_normal: float,
    probe: RegularityProbe | None = None,
) -> RootClassification:
    """Full classification bundle for one root of the boundary problem."""
    eta_root = np.atleast_1d(np.asarray(eta_root, dtype=float))
    xi_full = _full_frequency(sys, eta_root, xi_normal)
    poly = char_poly(sys, p)
    alg, geom, semi = multiplicities(sys, p, tau_root, xi_full, poly=poly)
    regularity, codim, ev_reg = classify_regularity(
        sys, p, tau_root, xi_full, probe=probe, poly=poly
    )
    glancing, ev_gl = classify_glancing(
        sys, p, tau_root, eta_root, xi_normal, poly=poly
    )
    tangent = None
    if semi:
        tangent = tangent_system(sys, p, tau_root, xi_full, poly=poly)
    evidence = {"regularity": ev_reg, "glancing": ev_gl}
    evidence["nonglancing"] = glancing != "glancing"
    return RootClassification(
        tau_root=float(tau_root),
        eta_root=eta_root,
        xi_normal=float(xi_normal),
        alg_mult=alg,
        geom_mult=geom,
        semi_simple=semi,
        regularity=regularity,
        splitting_codim=codim,
        glancing=glancing,
        tangent=tangent,
        evidence=evidence,
    )


# ----------------------------------------------------- linear splitting


def check_linear_splitting(
    sys: HyperbolicSystem,
    p,
    tau_root: float,
    xi_root,
    manifold: Callable[[np.ndarray], np.ndarray],
    manifold_dim: int,
    sample_scale: float = 1e-3,
    samples: int = 12,
) -> tuple[bool, dict]:
    """Validate a linearly-splitting root against a candidate root manifold.

    ``manifold`` maps chart parameters in R^manifold_dim to frequency points,
    with manifold(0) = xi_root.  Verifies (a) constant semi-simple
    multiplicity of the eigenvalue branch on sampled manifold points, and
    (b) strict hyperbolicity (real simple spectrum) of the tangent system on
    directions transversal to the manifold.  Also reports whether codimension
    one applies, which upgrades the root to geometrically regular.

    Raises
    ------
    BadManifold
        If the chart misses the root or the multiplicity is not constant on
        the manifold.
    """
    xi_root = np.asarray(xi_root, dtype=float)
    at0 = np.asarray(manifold(np.zeros(manifold_dim)), dtype=float)
    if np.linalg.norm(at0 - xi_root) > 1e-9 * max(1.0, np.linalg.norm(xi_root)):
        raise BadManifold("chart(0) does not hit the root frequency")
    poly = char_poly(sys, p)
    alg, geom, semi = multiplicities(sys, p, tau_root, xi_root, poly=poly)
    if not semi:
        raise NotSemiSimple("linear splitting is defined at semi-simple roots")
    lam = -tau_root
    a0 = assemble(sys, p, xi_root)
    radius = _cluster_radius(a0, lam)

    # (a) multiplicity along the manifold: the eigenvalue moves, so track the
    # cluster nearest the continued branch value
    rng = np.random.default_rng(77003)
    report: dict = {"alg_mult": alg, "manifold_dim": manifold_dim}
    for _ in range(samples):
        t = sample_scale * rng.standard_normal(manifold_dim)
        xi = np.asarray(manifold(t), dtype=float)
        a = assemble(sys, p, xi)
        eigs = np.linalg.eigvals(a)
        order = np.argsort(np.abs(eigs - lam))
        cluster = eigs[order[:alg]]
        spread = np.max(np.abs(cluster - np.mean(cluster)))
        d_out = (
            np.abs(eigs[order[alg]] - np.mean(cluster)) if len(eigs) > alg else np.inf
        )
        if spread > 1e-5 * max(1.0, np.linalg.norm(a)) or d_out < 10 * spread + 1e-9:
            raise BadManifold(
                f"multiplicity not constant on the manifold at chart point {t}"
            )
        mat = -np.mean(cluster).real * np.eye(sys.n) + a
        sv = np.linalg.svd(mat, compute_uv=False)
        geom_here = int(np.sum(sv <= 1e-8 * max(1.0, np.linalg.norm(a))))
        if geom_here != alg:
            raise BadManifold("eigenvalue not semi-simple on the manifold")

    # (b) strict hyperbolicity of the tangent system transversally
    ts = tangent_system(sys, p, tau_root, xi_root, poly=poly)
    # tangent directions of the chart at 0, via central differences
    h = 1e-6
    tang = []
    for i in range(manifold_dim):
        e = np.zeros(manifold_dim)
        e[i] = h
        tang.append((np.asarray(manifold(e)) - np.asarray(manifold(-e))) / (2 * h))
    tang = np.asarray(tang)
    codim = sys.d - manifold_dim
    report["codim"] = codim
    strict = True
    worst_gap = np.inf
    for _ in range(samples):
        w = rng.standard_normal(sys.d)
        if tang.size:
            # remove the tangent component to test a genuinely transversal ray
            q, _ = np.linalg.qr(tang.T)
            w = w - q @ (q.conj().T @ w)
        if np.linalg.norm(w) < 1e-8:
            continue
        w /= np.linalg.norm(w)
        eigs = np.linalg.eigvals(ts.a_prime_dir(w))
        if np.max(np.abs(eigs.imag)) > 1e-7 * max(1.0, np.max(np.abs(eigs))):
            strict = False
            break
        re = np.sort(eigs.real)
        gap = np.min(np.diff(re)) if len(re) > 1 else np.inf
        worst_gap = min(worst_gap, gap)
        if len(re) > 1 and gap < 1e-7 * max(1.0, re[-1] - re[0], 1.0):
            strict = False
            break
    report["transversal_strict"] = strict
    report["worst_transversal_gap"] = float(worst_gap if np.isfinite(worst_gap) else -1)
    if codim == 1 and strict:
        report["codim_one_implies_geometrically_regular"] = True
    return strict, report


# ------------------------------------------------------- block structure


def check_block_structure(
    block_sampler: Callable[[float, np.ndarray, float], np.ndarray],
    tau: float,
    eta,
    gamma: float,
    tol: float = 1e-7,
    fd_step: float = 1e-5,
) -> tuple[bool | None, dict]:
    """Verify the block structure condition for one boundary-symbol block.

    ``block_sampler(tau, eta, gamma)`` returns the block (a small complex
    matrix) near the base frequency.  The verdict is True when the block is
    (i) elliptic (spectrum off the real axis), (ii) scalar real with nonzero
    gamma-derivative, (iii) a single real Jordan block with nonzero lower-left
    corner of the gamma-derivative in the Jordan basis, or (iv) real
    semi-simple and smoothly splittable into scalar blocks.  False when the
    structure demonstrably fails (e.g. direction-dependent eigenvector limits
    at a real semi-simple eigenvalue); None when rank decisions sit inside the
    tolerance band (undetermined).
    """
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    g0 = np.asarray(block_sampler(tau, eta, gamma), dtype=complex)
    m = g0.shape[0]
    eigs = np.linalg.eigvals(g0)
    scale = max(1.0, float(np.linalg.norm(g0)))
    report: dict = {"size": m, "eigenvalues": [complex(e) for e in eigs]}

    if np.min(np.abs(eigs.imag)) > tol * scale:
        report["case"] = "elliptic"
        return True, report

    if np.max(np.abs(eigs.imag)) > tol * scale:
        report["case"] = "mixed real/nonreal spectrum in one block"
        return None, report

    mu = complex(np.mean(eigs))
    dgamma = (
        np.asarray(block_sampler(tau, eta, gamma + fd_step), dtype=complex) - g0
    ) / fd_step
    if m == 1:
        ok = abs(dgamma[0, 0]) > tol
        report["case"] = "scalar real"
        report["dgamma"] = complex(dgamma[0, 0])
        return bool(ok), report

    nil = g0 - mu * np.eye(m)
    ranks = []
    power = np.eye(m, dtype=complex)
    for _ in range(m):
        power = power @ nil
        sv = np.linalg.svd(power, compute_uv=False)
        ranks.append(int(np.sum(sv > tol * max(1.0, sv[0] if sv[0] > 0 else 1.0, scale))))
    report["nilpotent_ranks"] = ranks

    single_jordan = ranks == list(range(m - 1, -1, -1))
    if single_jordan:
        # Jordan chain basis: columns N^{m-1} v, ..., N v, v
        u, sv, vh = np.linalg.svd(np.linalg.matrix_power(nil, m - 1))
        seed = vh[0].conj()
        cols = [seed]
        for _ in range(m - 1):
            cols.append(nil @ cols[-1])
        t = np.stack(cols[::-1], axis=1)
        if np.linalg.cond(t) > 1e8:
            report["case"] = "jordan basis ill-conditioned"
            return None, report
        dg_j = np.linalg.solve(t, dgamma @ t)
        corner = dg_j[m - 1, 0]
        report["case"] = "single real Jordan block"
        report["dgamma_corner"] = complex(corner)
        # real coefficients at gamma = 0 on sampled nearby frequencies
        coeff_real = _real_coeff_check(block_sampler, tau, eta, scale)
        report["real_coefficients_at_gamma0"] = coeff_real
        ok = abs(corner) > tol * max(1.0, float(np.linalg.norm(dg_j)))
        return bool(ok and coeff_real), report

    if ranks[0] == 0:
        # real semi-simple multiple eigenvalue: block structure needs a smooth
        # splitting into scalar blocks, detectable by direction-independent
        # eigenvector limits along frequency rays
        verdict, detail = _semi_simple_split_check(
            block_sampler, tau, eta, gamma, mu, m, scale, tol
        )
        report["case"] = "real semi-simple"
        report["split_detail"] = detail
        return verdict, report

    report["case"] = "nilpotent structure neither scalar nor single Jordan"
    return None, report


def _real_coeff_check(block_sampler, tau, eta, scale, count: int = 8) -> bool:
    rng = np.random.default_rng(40087)
    for _ in range(count):
        dt = 1e-3 * rng.standard_normal()
        de = 1e-3 * rng.standard_normal(eta.shape)
        g = np.asarray(block_sampler(tau + dt, eta + de, 0.0), dtype=complex)
        coeffs = np.poly(g)
        if np.max(np.abs(coeffs.imag)) > 1e-9 * max(1.0, np.max(np.abs(coeffs))):
            return False
    return True


def _semi_simple_split_check(block_sampler, tau, eta, gamma, mu, m, scale, tol):
    """Direction-dependence of eigenvector limits for a real semi-simple block
    eigenvalue; independence means the block splits into scalar blocks."""
    n_eta = len(eta)
    dirs = unit_directions(16, 1 + n_eta)
    steps = np.geomspace(1e-2, 1e-5, 7)
    proj_sets = []
    for w in dirs:
        got = []
        for s in steps:
            g = np.asarray(
                block_sampler(tau + s * w[0], eta + s * w[1:], gamma), dtype=complex
            )
            eigs, vecs = np.linalg.eig(g)
            order = np.argsort(eigs.real)
            gaps = np.diff(eigs.real[order])
            if len(gaps) and np.min(gaps) < 1e-8 * scale:
                continue
            projs = []
            for j in order:
                v = vecs[:, j] / np.linalg.norm(vecs[:, j])
                projs.append(np.outer(v, v.conj()))
            got.append(projs)
            if len(got) == 2:
                break
        if len(got) == 2:
            proj_sets.append(got[-1])
    if len(proj_sets) < 6:
        return None, {"reason": "too few usable directions"}
    ref = proj_sets[0]
    dists = [_projector_set_distance(ref, s) for s in proj_sets[1:]]
    detail = {"max_dist": float(np.max(dists)), "median_dist": float(np.median(dists))}
    if np.max(dists) < 1e-4:
        # scalar-splittable; each branch must still move with gamma
        g_at = lambda gg: np.asarray(block_sampler(tau, eta, gg), dtype=complex)
        dg = (np.sort(np.linalg.eigvals(g_at(gamma + 1e-5)).imag))
        detail["gamma_motion"] = [float(x) for x in dg]
        moved = np.all(np.abs(dg) > 1e-9)
        return bool(moved), detail
    if np.median(dists) > 1e-2:
        return False, detail
    return None, detail
