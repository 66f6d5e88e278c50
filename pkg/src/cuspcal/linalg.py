"""Dense complex linear algebra primitives: certified LU solves, Riesz
contour projectors, and subspace operations.

All unqualified norms are Frobenius norms; tolerances are relative to the
Frobenius norm of the operand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    ContourTooClose,
    GramNotPD,
    NotComplementary,
    RankDeficient,
    SingularMatrix,
)

DEFAULT_RANK_TOL = 1e-8


def as_matrix(a, name="matrix"):
    """Validate a 2-d complex array with finite entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-d, got shape {m.shape}")
    if m.size and not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def fro(a):
    return float(np.linalg.norm(a))


def idempotence_defect(c):
    """|C^2 - C| relative to max(1, |C|)."""
    c = np.asarray(c, dtype=complex)
    return fro(c @ c - c) / max(1.0, fro(c))


def gram_adjoint(a, gram):
    """Adjoint of `a` in the inner product <u, v> = v^H G u."""
    g = as_matrix(gram, "gram")
    return np.linalg.solve(g, a.conj().T @ g)


def check_gram(gram, tol=1e-10):
    """Validate a Hermitian positive definite inner-product matrix."""
    g = as_matrix(gram, "gram")
    if fro(g - g.conj().T) > tol * max(1.0, fro(g)):
        raise GramNotPD("gram matrix is not Hermitian")
    try:
        sla.cholesky(0.5 * (g + g.conj().T), lower=True)
    except sla.LinAlgError as exc:
        raise GramNotPD("gram matrix is not positive definite") from exc
    return g


def nullspace(a, rtol=1e-10):
    """Orthonormal basis of the numerical null space (columns)."""
    a = as_matrix(a)
    if a.size == 0:
        return np.eye(a.shape[1], dtype=complex)
    u, s, vh = np.linalg.svd(a)
    rank = int(np.sum(s > rtol * (s[0] if s.size else 0.0)))
    return vh[rank:].conj().T


def lu_solve(a, b, pivot_tol=1e-13):
    """Solve A X = B by partially pivoted LU with a pivot certificate.

    Raises SingularMatrix naming the first pivot whose magnitude falls
    below pivot_tol relative to the largest entry of A.
    """
    a = as_matrix(a, "A")
    if a.shape[0] != a.shape[1]:
        raise ValueError("A must be square")
    bm = np.asarray(b, dtype=complex)
    if not np.all(np.isfinite(bm)):
        raise ValueError("B has non-finite entries")
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a, check_finite=False)
    diag = np.abs(np.diag(lu))
    scale = max(float(np.max(np.abs(a), initial=0.0)), np.finfo(float).tiny)
    bad = np.flatnonzero(diag <= pivot_tol * scale)
    if bad.size:
        raise SingularMatrix(bad[0], diag[bad[0]])
    return sla.lu_solve((lu, piv), bm, check_finite=False)


class SubspaceBasis:
    """Column basis of a subspace of C^ambient_dim with a rank certificate.

    The certificate is smallest_sv > rank_tol * largest_sv of the basis
    matrix; a zero-dimensional basis (k = 0) is allowed.
    """

    def __init__(self, ambient_dim, basis, rank_tol=DEFAULT_RANK_TOL):
        self.ambient_dim = int(ambient_dim)
        self.rank_tol = float(rank_tol)
        b = np.asarray(basis, dtype=complex)
        if b.size == 0:
            b = b.reshape(self.ambient_dim, 0)
        if b.ndim == 1:
            b = b[:, None]
        if b.shape[0] != self.ambient_dim:
            raise ValueError(
                f"basis has {b.shape[0]} rows, ambient dimension is {self.ambient_dim}"
            )
        if b.size and not np.all(np.isfinite(b)):
            raise ValueError("basis has non-finite entries")
        if b.shape[1]:
            s = np.linalg.svd(b, compute_uv=False)
            if s[-1] <= self.rank_tol * s[0]:
                raise RankDeficient(
                    f"basis rank certificate failed: sv ratio {s[-1] / s[0]:.3e}"
                )
        self.basis = b

    @classmethod
    def from_span(cls, vectors, rank_tol=DEFAULT_RANK_TOL, sv_cut=None):
        """Orthonormal basis of the span of the given columns.

        Rank is determined by sv > rank_tol * sv_max, or by the absolute
        threshold sv_cut when given.
        """
        v = np.asarray(vectors, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        n = v.shape[0]
        if v.shape[1] == 0 or not np.any(v):
            return cls(n, np.zeros((n, 0)), rank_tol)
        u, s, _ = np.linalg.svd(v, full_matrices=False)
        if sv_cut is not None:
            rank = int(np.sum(s > sv_cut))
        else:
            rank = int(np.sum(s > rank_tol * s[0]))
        return cls(n, u[:, :rank], rank_tol)

    @property
    def dim(self):
        return self.basis.shape[1]

    def orthonormal(self):
        """Orthonormal basis matrix for the same span."""
        if self.dim == 0:
            return self.basis
        q, _ = np.linalg.qr(self.basis)
        return q

    def __repr__(self):
        return f"SubspaceBasis(ambient={self.ambient_dim}, dim={self.dim})"


@dataclass(frozen=True)
class Projector:
    """Square complex matrix with a certified idempotence defect."""

    matrix: np.ndarray
    idem_defect: float
    range_basis: SubspaceBasis | None = None
    kernel_basis: SubspaceBasis | None = None

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def rank(self):
        if self.range_basis is not None:
            return self.range_basis.dim
        s = np.linalg.svd(self.matrix, compute_uv=False)
        return int(np.sum(s > 0.5))


def subspace_distance(u, v):
    """Spectral norm of the difference of the orthogonal projectors.

    Equals the sine of the largest principal angle for equal dimensions.
    """
    if u.ambient_dim != v.ambient_dim:
        raise ValueError("ambient dimensions differ")
    if u.dim == 0 and v.dim == 0:
        return 0.0
    qu = u.orthonormal()
    qv = v.orthonormal()
    pu = qu @ qu.conj().T
    pv = qv @ qv.conj().T
    s = np.linalg.svd(pu - pv, compute_uv=False)
    return float(s[0]) if s.size else 0.0


@dataclass(frozen=True)
class DirectSumReport:
    is_direct_sum: bool
    gap: float


def direct_sum_check(u, v, tol=DEFAULT_RANK_TOL):
    """Check U (+) V = ambient; gap is the smallest singular value of the
    concatenated orthonormalized bases."""
    if u.ambient_dim != v.ambient_dim:
        raise ValueError("ambient dimensions differ")
    n = u.ambient_dim
    k = u.dim + v.dim
    if k == 0:
        return DirectSumReport(n == 0, 1.0 if n == 0 else 0.0)
    if k > n:
        return DirectSumReport(False, 0.0)
    m = np.hstack([u.orthonormal(), v.orthonormal()])
    s = np.linalg.svd(m, compute_uv=False)
    gap = float(s[-1])
    return DirectSumReport(bool(k == n and gap > tol), gap)


def projector_from_pair(range_basis, kernel_basis, tol=None):
    """Projector with the given range and kernel: [R|K] diag(I,0) [R|K]^-1."""
    if range_basis.ambient_dim != kernel_basis.ambient_dim:
        raise ValueError("ambient dimensions differ")
    n = range_basis.ambient_dim
    r, k = range_basis.dim, kernel_basis.dim
    if r + k != n:
        raise NotComplementary(
            f"range dim {r} + kernel dim {k} != ambient dim {n}", gap=0.0
        )
    if tol is None:
        tol = max(range_basis.rank_tol, kernel_basis.rank_tol)
    if r == 0:
        return Projector(np.zeros((n, n), dtype=complex), 0.0, range_basis, kernel_basis)
    if k == 0:
        return Projector(np.eye(n, dtype=complex), 0.0, range_basis, kernel_basis)
    qr_ = range_basis.orthonormal()
    qk = kernel_basis.orthonormal()
    m = np.hstack([qr_, qk])
    s = np.linalg.svd(m, compute_uv=False)
    if s[-1] <= tol * s[0]:
        raise NotComplementary(
            "concatenated range/kernel basis is numerically singular", gap=float(s[-1])
        )
    minv = np.linalg.solve(m, np.eye(n, dtype=complex))
    c = qr_ @ minv[:r]
    return Projector(c, idempotence_defect(c), range_basis, kernel_basis)


def orth_projector(u, gram, herm_tol=1e-10):
    """Gram-orthogonal projector onto span(U): C = U (U*GU)^-1 U*G."""
    g = check_gram(gram, herm_tol)
    if u.ambient_dim != g.shape[0]:
        raise ValueError("gram dimension mismatch")
    n = u.ambient_dim
    if u.dim == 0:
        return Projector(np.zeros((n, n), dtype=complex), 0.0, u)
    b = u.basis
    m = b.conj().T @ g @ b
    c = b @ np.linalg.solve(m, b.conj().T @ g)
    return Projector(c, idempotence_defect(c), range_basis=u)


class ContourSpec:
    """Closed integration contour: a circle or an axis-aligned rectangle.

    `nodes` is the initial quadrature node count; riesz_projector doubles
    it until the idempotence defect converges.
    """

    def __init__(self, kind, *, center=0j, radius=0.0, re_min=0.0, re_max=0.0,
                 im_min=0.0, im_max=0.0, nodes=32):
        if kind not in ("circle", "rectangle"):
            raise ValueError(f"unknown contour kind {kind!r}")
        self.kind = kind
        self.center = complex(center)
        self.radius = float(radius)
        self.re_min, self.re_max = float(re_min), float(re_max)
        self.im_min, self.im_max = float(im_min), float(im_max)
        self.nodes = int(nodes)
        if kind == "circle" and self.radius <= 0:
            raise ValueError("circle radius must be positive")
        if kind == "rectangle" and (self.re_min >= self.re_max or self.im_min >= self.im_max):
            raise ValueError("degenerate rectangle")

    @classmethod
    def circle(cls, center, radius, nodes=32):
        return cls("circle", center=center, radius=radius, nodes=nodes)

    @classmethod
    def rectangle(cls, re_min, re_max, im_min, im_max, nodes=32):
        return cls("rectangle", re_min=re_min, re_max=re_max,
                   im_min=im_min, im_max=im_max, nodes=nodes)

    def quadrature(self, n):
        """Nodes and weights with sum_j w_j f(l_j) ~ closed contour integral
        of f, counterclockwise."""
        if self.kind == "circle":
            theta = 2.0 * np.pi * np.arange(n) / n
            pts = self.center + self.radius * np.exp(1j * theta)
            w = (2j * np.pi * self.radius / n) * np.exp(1j * theta)
            return pts, w
        # Rectangle: composite Gauss-Legendre on each edge (trapezoid loses
        # its spectral accuracy at the corners).
        a, b = self.re_min, self.re_max
        c, d = self.im_min, self.im_max
        corners = [a + 1j * c, b + 1j * c, b + 1j * d, a + 1j * d, a + 1j * c]
        per_edge = max(4, n // 4)
        x, wq = np.polynomial.legendre.leggauss(per_edge)
        pts, w = [], []
        for z0, z1 in zip(corners[:-1], corners[1:]):
            mid = 0.5 * (z0 + z1)
            half = 0.5 * (z1 - z0)
            pts.append(mid + half * x)
            w.append(half * wq)
        return np.concatenate(pts), np.concatenate(w)


def riesz_projector(a, contour, idem_tol=1e-10, node_cap=4096):
    """Riesz spectral projector (1/2 pi i) \\oint (lambda I - A)^-1 dlambda.

    Quadrature nodes are doubled until the idempotence defect drops below
    idem_tol; raises ContourTooClose when the cap is reached first.
    """
    a = as_matrix(a, "A")
    if a.shape[0] != a.shape[1]:
        raise ValueError("A must be square")
    n = a.shape[0]
    eye = np.eye(n, dtype=complex)
    nodes = max(8, contour.nodes)
    best = None
    while True:
        pts, w = contour.quadrature(nodes)
        acc = np.zeros((n, n), dtype=complex)
        try:
            for lam, wj in zip(pts, w):
                acc += wj * np.linalg.solve(lam * eye - a, eye)
        except np.linalg.LinAlgError:
            # a quadrature node hit an eigenvalue exactly
            raise ContourTooClose(np.inf, nodes) from None
        c = acc / (2j * np.pi)
        defect = idempotence_defect(c)
        if best is None or defect < best[0]:
            best = (defect, c, nodes)
        if defect <= idem_tol:
            rng = SubspaceBasis.from_span(c, sv_cut=0.5)
            ker = SubspaceBasis.from_span(eye - c, sv_cut=0.5)
            return Projector(c, defect, rng, ker)
        if nodes >= node_cap:
            raise ContourTooClose(best[0], best[2])
        nodes *= 2
