"""Dense spectral building blocks: eigenvalue clustering, Riesz projectors,
half-plane invariant subspaces, subspace determinants, and block reduction
of matrix families near a base point.

All routines work on explicit complex matrices of moderate size (the intended
regime is N up to ~100) and are pure functions of their inputs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import (
    ClusterCollision,
    DimensionMismatch,
    GapTooSmall,
    InternalInconsistency,
    OnBoundary,
)

__all__ = [
    "EigenCluster",
    "SubspaceBasis",
    "BlockReduction",
    "cluster_eigenvalues",
    "spectral_projector",
    "half_plane_subspace",
    "subspace_determinant",
    "block_reduce",
]

HALF_PLANES = ("im<0", "im>0", "re<0", "re>0")


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal basis of a subspace of C^N, stored as an N x k matrix.

    Columns are orthonormal to Frobenius tolerance 1e-12; construction
    verifies this and fails loudly rather than silently re-orthonormalizing.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2:
            raise DimensionMismatch(f"basis must be 2-d, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)
        k = m.shape[1]
        if k:
            gram = m.conj().T @ m
            err = np.linalg.norm(gram - np.eye(k))
            if err > 1e-12 * max(1.0, np.sqrt(k)):
                raise InternalInconsistency(
                    f"basis columns not orthonormal: Gram residual {err:.3e}"
                )

    @property
    def ambient_dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def projector(self) -> np.ndarray:
        """Orthogonal projector onto the spanned subspace."""
        return self.matrix @ self.matrix.conj().T


def orthonormal_basis(columns: np.ndarray) -> SubspaceBasis:
    """Orthonormalize a full-column-rank matrix into a SubspaceBasis via QR."""
    cols = np.asarray(columns, dtype=complex)
    if cols.ndim == 1:
        cols = cols[:, None]
    if cols.shape[1] == 0:
        return SubspaceBasis(cols.reshape(cols.shape[0], 0))
    q, r = np.linalg.qr(cols)
    if np.min(np.abs(np.diag(r))) < 1e-12 * max(1.0, np.max(np.abs(r))):
        raise DimensionMismatch("columns are numerically rank deficient")
    return SubspaceBasis(q)


@dataclass(frozen=True)
class EigenCluster:
    """A group of mutually close eigenvalues of one matrix, with its Riesz
    spectral projector.

    Invariants checked at construction: the projector is idempotent and its
    trace equals the algebraic multiplicity (eigenvalue count).
    """

    eigenvalues: np.ndarray
    projector: np.ndarray
    linking_tol: float

    def __post_init__(self):
        object.__setattr__(
            self, "eigenvalues", np.asarray(self.eigenvalues, dtype=complex)
        )
        object.__setattr__(self, "projector", np.asarray(self.projector, dtype=complex))
        p = self.projector
        scale = max(1.0, float(np.linalg.norm(p)) ** 2)
        idem = np.linalg.norm(p @ p - p)
        if idem > 1e-10 * scale:
            raise InternalInconsistency(f"projector not idempotent: {idem:.3e}")
        tr = np.trace(p)
        if abs(tr - self.multiplicity) > 1e-8 * max(1.0, self.multiplicity):
            raise InternalInconsistency(
                f"projector trace {tr:.6f} != multiplicity {self.multiplicity}"
            )

    @property
    def multiplicity(self) -> int:
        return len(self.eigenvalues)

    @property
    def center(self) -> complex:
        return complex(np.mean(self.eigenvalues))

    def contains(self, mu: complex, slack: float = 3.0) -> bool:
        """Whether mu lies within the cluster's linking distance (times slack)."""
        return bool(
            np.min(np.abs(self.eigenvalues - mu)) <= slack * max(self.linking_tol, 1e-300)
        )


def _union_find_clusters(eigs: np.ndarray, tol: float) -> list[np.ndarray]:
    """Partition eigenvalue indices by the transitive closure of |mu_i - mu_j| <= tol."""
    n = len(eigs)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(eigs[i] - eigs[j]) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    # stable order: by mean real part, then imaginary part
    keys = sorted(
        groups.values(),
        key=lambda idx: (np.mean(eigs[idx]).real, np.mean(eigs[idx]).imag),
    )
    return [np.array(idx) for idx in keys]


def _schur_projector_for_selection(
    t: np.ndarray, z: np.ndarray, sdim: int
) -> np.ndarray:
    """Riesz projector onto the leading sdim-dimensional invariant subspace of
    an ordered Schur form (t, z)."""
    n = t.shape[0]
    if sdim == 0:
        return np.zeros((n, n), dtype=complex)
    if sdim == n:
        return np.eye(n, dtype=complex)
    t11 = t[:sdim, :sdim]
    t12 = t[:sdim, sdim:]
    t22 = t[sdim:, sdim:]
    # In the Schur basis the projector is [[I, Y], [0, 0]] with
    # T11 Y - Y T22 = T12.
    y = scipy.linalg.solve_sylvester(t11, -t22, t12)
    p_schur = np.zeros((n, n), dtype=complex)
    p_schur[:sdim, :sdim] = np.eye(sdim)
    p_schur[:sdim, sdim:] = y
    return z @ p_schur @ z.conj().T


def cluster_eigenvalues(matrix, tol: float | None = None) -> list[EigenCluster]:
    """Group the eigenvalues of a matrix into clusters by transitive closure.

    Two eigenvalues are linked when their distance is at most ``tol``; the
    clusters are the connected components of this relation.  Each cluster is
    returned with its Riesz spectral projector.

    Parameters
    ----------
    matrix : (N, N) array_like
    tol : float, optional
        Linking distance.  Default is 1e-7 times the Frobenius norm.

    Returns
    -------
    list[EigenCluster]
        Ordered by cluster center (real part, then imaginary part).

    Raises
    ------
    GapTooSmall
        If the spectral gap between two clusters is below ten times the
        linking tolerance, so projectors cannot be trusted.
    """
    m = _as_matrix(matrix)
    norm = float(np.linalg.norm(m))
    if tol is None:
        tol = 1e-7 * norm
    eigs = np.linalg.eigvals(m)
    groups = _union_find_clusters(eigs, tol)
    if len(groups) > 1:
        # gap between distinct clusters must dominate the linking scale
        for a in range(len(groups)):
            for b in range(a + 1, len(groups)):
                gap = np.min(
                    np.abs(eigs[groups[a]][:, None] - eigs[groups[b]][None, :])
                )
                if gap < 10 * tol:
                    raise GapTooSmall(
                        f"clusters separated by {gap:.3e} < 10*tol = {10 * tol:.3e}"
                    )
    clusters = []
    for idx in groups:
        members = eigs[idx]
        if len(idx) == len(eigs):
            proj = np.eye(m.shape[0], dtype=complex)
        else:
            center = np.mean(members)
            radius = np.max(np.abs(members - center)) + 3 * tol

            def select(mu, _c=center, _r=radius):
                return abs(mu - _c) <= _r

            t, z, sdim = scipy.linalg.schur(m, output="complex", sort=select)
            if sdim != len(idx):
                raise InternalInconsistency(
                    f"Schur reordering selected {sdim} eigenvalues, expected {len(idx)}"
                )
            proj = _schur_projector_for_selection(t, z, sdim)
        clusters.append(EigenCluster(members, proj, linking_tol=tol))
    return clusters


def spectral_projector(matrix, cluster_selector, tol: float | None = None) -> np.ndarray:
    """Riesz projector onto the invariant subspace of the selected eigenvalues.

    Computed from an ordered Schur decomposition and a Sylvester solve, never
    by contour quadrature.

    Parameters
    ----------
    matrix : (N, N) array_like
    cluster_selector : set of int, or callable
        Either indices into ``cluster_eigenvalues(matrix, tol)`` naming the
        clusters to project onto, or a predicate on a complex eigenvalue
        (True marks it as selected).
    tol : float, optional
        Clustering scale and gap safety threshold, default 1e-7 times the
        Frobenius norm of the matrix.

    Raises
    ------
    GapTooSmall
        If the selected/unselected spectral gap is below ``10 * tol``.
    """
    m = _as_matrix(matrix)
    if tol is None:
        tol = 1e-7 * float(np.linalg.norm(m))
    if callable(cluster_selector):
        select = cluster_selector
    else:
        indices = set(int(i) for i in cluster_selector)
        clusters = cluster_eigenvalues(m, tol=tol)
        bad = indices - set(range(len(clusters)))
        if bad:
            raise DimensionMismatch(
                f"cluster indices {sorted(bad)} out of range (have {len(clusters)})"
            )
        chosen_eigs = np.concatenate(
            [clusters[i].eigenvalues for i in sorted(indices)]
        ) if indices else np.array([], dtype=complex)
        other_eigs = np.concatenate(
            [clusters[i].eigenvalues for i in range(len(clusters)) if i not in indices]
        ) if len(indices) < len(clusters) else np.array([], dtype=complex)

        def select(mu):
            if len(chosen_eigs) == 0:
                return False
            if len(other_eigs) == 0:
                return True
            return np.min(np.abs(chosen_eigs - mu)) < np.min(np.abs(other_eigs - mu))

    eigs = np.linalg.eigvals(m)
    chosen = np.array([bool(select(mu)) for mu in eigs])
    if chosen.any() and not chosen.all():
        gap = np.min(np.abs(eigs[chosen][:, None] - eigs[~chosen][None, :]))
        if gap < 10 * tol:
            raise GapTooSmall(f"selection gap {gap:.3e} < {10 * tol:.3e}")
    t, z, sdim = scipy.linalg.schur(m, output="complex", sort=lambda mu: bool(select(mu)))
    if sdim != int(np.sum(chosen)):
        raise InternalInconsistency(
            "Schur sort disagreed with the eigenvalue predicate; "
            "an eigenvalue may sit on the selection boundary"
        )
    return _schur_projector_for_selection(t, z, sdim)


_HALF_PLANE_FUNS: dict[str, tuple[Callable, Callable]] = {
    # predicate, signed distance to the dividing line
    "im<0": (lambda mu: mu.imag < 0, lambda mu: mu.imag),
    "im>0": (lambda mu: mu.imag > 0, lambda mu: mu.imag),
    "re<0": (lambda mu: mu.real < 0, lambda mu: mu.real),
    "re>0": (lambda mu: mu.real > 0, lambda mu: mu.real),
}


def _half_plane_2x2(m: np.ndarray, pred) -> np.ndarray | None:
    """Closed-form invariant-subspace basis for 2x2 matrices; None if the
    eigenproblem is too ill-conditioned for the explicit formulas."""
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    half_tr = 0.5 * (a + d)
    disc = np.sqrt(0.25 * (a - d) ** 2 + b * c)
    mu1, mu2 = half_tr + disc, half_tr - disc
    scale = max(1.0, abs(a), abs(b), abs(c), abs(d))
    if abs(mu1 - mu2) < 1e-8 * scale:
        return None  # near-defective: let the Schur path decide
    sel1, sel2 = pred(mu1), pred(mu2)
    if sel1 and sel2:
        return np.eye(2, dtype=complex)
    if not sel1 and not sel2:
        return np.zeros((2, 0), dtype=complex)
    mu = mu1 if sel1 else mu2
    # eigenvector of the 2x2: take the better-conditioned of the two rows
    v1 = np.array([b, mu - a])
    v2 = np.array([mu - d, c])
    v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
    nv = np.linalg.norm(v)
    if nv < 1e-13 * scale:
        return None
    return (v / nv)[:, None]


def half_plane_subspace(
    matrix, half_plane: str, boundary_tol: float = 1e-10
) -> SubspaceBasis:
    """Orthonormal basis of the invariant subspace for eigenvalues in an open
    half plane.

    Parameters
    ----------
    matrix : (N, N) array_like
    half_plane : str
        One of ``"im<0"``, ``"im>0"``, ``"re<0"``, ``"re>0"``.
    boundary_tol : float
        Minimum allowed distance of any eigenvalue to the dividing line.

    Returns
    -------
    SubspaceBasis

    Raises
    ------
    OnBoundary
        If some eigenvalue lies within ``boundary_tol`` of the dividing line.
    InternalInconsistency
        If the computed basis fails the invariance residual check
        ``norm((I - B B^H) M B) <= 1e-9 * max(1, norm(M))``.
    """
    m = _as_matrix(matrix)
    if half_plane not in _HALF_PLANE_FUNS:
        raise ValueError(f"half_plane must be one of {HALF_PLANES}")
    pred, line_dist = _HALF_PLANE_FUNS[half_plane]
    eigs = np.linalg.eigvals(m)
    dmin = np.min(np.abs([line_dist(mu) for mu in eigs])) if len(eigs) else np.inf
    if dmin < boundary_tol:
        raise OnBoundary(
            f"eigenvalue within {dmin:.3e} of the dividing line for '{half_plane}'"
        )
    basis = None
    if m.shape[0] == 2:
        basis = _half_plane_2x2(m, pred)
    if basis is None:
        t, z, sdim = scipy.linalg.schur(
            m, output="complex", sort=lambda mu: bool(pred(mu))
        )
        basis = z[:, :sdim]
    resid = np.linalg.norm((np.eye(m.shape[0]) - basis @ basis.conj().T) @ m @ basis)
    if resid > 1e-9 * max(1.0, float(np.linalg.norm(m))):
        raise InternalInconsistency(
            f"invariant-subspace residual {resid:.3e} exceeds tolerance"
        )
    return SubspaceBasis(basis)


def subspace_determinant(a: SubspaceBasis, b: SubspaceBasis) -> float:
    """Absolute determinant of the matrix whose columns are the two bases.

    For orthonormal inputs the value lies in [0, 1]; it is 1 exactly when the
    subspaces are orthogonal complements and 0 when they intersect.

    Raises
    ------
    DimensionMismatch
        If the dimensions do not sum to the ambient dimension.
    """
    if isinstance(a, np.ndarray):
        a = SubspaceBasis(a)
    if isinstance(b, np.ndarray):
        b = SubspaceBasis(b)
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatch("bases live in different ambient spaces")
    n = a.ambient_dim
    if a.dim + b.dim != n:
        raise DimensionMismatch(
            f"subspace dimensions {a.dim} + {b.dim} != ambient {n}"
        )
    if n == 0:
        return 1.0
    val = abs(np.linalg.det(np.hstack([a.matrix, b.matrix])))
    # orthonormal columns bound the determinant by 1; clip rounding overshoot
    return float(min(val, 1.0))


@dataclass
class BlockReduction:
    """Conjugation of a matrix family to block-diagonal form near a base point.

    ``base_V`` has the per-cluster bases as column groups, ``base_W = base_V^{-1}``
    as row groups, so ``base_W @ m(base) @ base_V`` is block diagonal with
    ``blocks[k]`` of size ``multiplicities[k]``.  ``at(p)`` re-derives the
    factorization at a nearby parameter with continuous basis gauge.
    """

    family: Callable[[object], np.ndarray]
    base_point: object
    base_V: np.ndarray
    base_W: np.ndarray
    slices: list[slice]
    clusters: list[EigenCluster]
    linking_tol: float
    blocks: list[np.ndarray] = field(default_factory=list)

    @property
    def multiplicities(self) -> list[int]:
        return [c.multiplicity for c in self.clusters]

    def at(self, p) -> tuple[np.ndarray, np.ndarray, list[np.ndarray]]:
        """Factorize the family member at ``p``: returns (V, W, blocks) with
        ``W V = Id`` and ``W m(p) V`` block diagonal.

        Raises
        ------
        ClusterCollision
            If the eigenvalues of ``m(p)`` cannot be assigned unambiguously to
            the base clusters with matching multiplicities.
        """
        m = _as_matrix(self.family(p))
        eigs = np.linalg.eigvals(m)
        centers = [c.center for c in self.clusters]
        assign = np.array([int(np.argmin([abs(mu - c) for c in centers])) for mu in eigs])
        v_groups = []
        for k, cl in enumerate(self.clusters):
            sel = assign == k
            if int(np.sum(sel)) != cl.multiplicity:
                raise ClusterCollision(
                    f"cluster {k}: expected {cl.multiplicity} eigenvalues, "
                    f"found {int(np.sum(sel))} at p={p!r}"
                )

            def select(mu, _k=k, _centers=centers):
                return int(np.argmin([abs(mu - c) for c in _centers])) == _k

            proj = spectral_projector(m, select, tol=self.linking_tol)
            # anchor the gauge to the base basis for continuity
            cols = proj @ self.base_V[:, self.slices[k]]
            q, r = np.linalg.qr(cols)
            if np.min(np.abs(np.diag(r))) < 1e-10 * max(1.0, np.max(np.abs(r))):
                raise ClusterCollision(
                    f"cluster {k} subspace turned too far from the base gauge at p={p!r}"
                )
            v_groups.append(q)
        v = np.hstack(v_groups)
        w = np.linalg.inv(v)
        reduced = w @ m @ v
        blocks = [reduced[s, s] for s in self.slices]
        # off-diagonal leakage means the invariant subspaces were misidentified
        off = reduced.copy()
        for s in self.slices:
            off[s, s] = 0.0
        leak = np.linalg.norm(off)
        if leak > 1e-8 * max(1.0, float(np.linalg.norm(m))):
            raise InternalInconsistency(
                f"block reduction off-diagonal leakage {leak:.3e} at p={p!r}"
            )
        return v, w, blocks


def block_reduce(
    family: Callable[[object], np.ndarray],
    base_point,
    cluster_tol: float | None = None,
) -> BlockReduction:
    """Block-diagonalize a matrix family at a base point by eigenvalue cluster.

    Parameters
    ----------
    family : callable
        Maps a parameter value to a square matrix, continuously.
    base_point : object
        Parameter at which clusters are identified.
    cluster_tol : float, optional
        Linking tolerance passed to :func:`cluster_eigenvalues`.

    Returns
    -------
    BlockReduction
    """
    m0 = _as_matrix(family(base_point))
    clusters = cluster_eigenvalues(m0, tol=cluster_tol)
    tol = clusters[0].linking_tol if clusters else 0.0
    v_groups = []
    slices = []
    start = 0
    for cl in clusters:
        q, _ = np.linalg.qr(cl.projector @ _range_seed(cl.projector, cl.multiplicity))
        v_groups.append(q[:, : cl.multiplicity])
        slices.append(slice(start, start + cl.multiplicity))
        start += cl.multiplicity
    v = np.hstack(v_groups) if v_groups else np.zeros((m0.shape[0], 0))
    if v.shape[1] != m0.shape[0]:
        raise InternalInconsistency("cluster multiplicities do not fill the space")
    w = np.linalg.inv(v)
    reduced = w @ m0 @ v
    blocks = [reduced[s, s] for s in slices]
    red = BlockReduction(
        family=family,
        base_point=base_point,
        base_V=v,
        base_W=w,
        slices=slices,
        clusters=clusters,
        linking_tol=tol,
        blocks=blocks,
    )
    return red


def _range_seed(projector: np.ndarray, k: int) -> np.ndarray:
    """Deterministic full-rank seed for extracting a rank-k range basis."""
    n = projector.shape[0]
    # SVD gives the best-conditioned range basis; use its leading vectors
    u, s, _ = np.linalg.svd(projector)
    return u[:, :k]
