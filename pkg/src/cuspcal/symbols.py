"""Interior principal-symbol level: companion reduction of the symbol ODE,
Calderon projectors for elliptic matrix symbols, Dirichlet-to-Neumann
symbols, and gram-orthogonalization of projectors.

Boundary-data vectors are ordered (v, D_t v, ..., D_t^{m-1} v)(0) with
D_t = (1/i) d/dt; the transversal covariable of the symbol polynomial is
named tau and becomes D_t in the symbol ODE.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import GraphConditionFailed, NotInvertible, ZeroCovector
from .linalg import (
    ContourSpec,
    Projector,
    as_matrix,
    check_gram,
    gram_adjoint,
    idempotence_defect,
    riesz_projector,
)


@dataclass(frozen=True)
class Covector:
    """(tau, eta, zeta'): transversal, base and tangential-fibre covariables."""

    tau: float
    eta: tuple = ()
    zeta_prime: tuple = ()

    def tangential(self):
        return np.array(list(self.eta) + list(self.zeta_prime), dtype=float)

    def full(self):
        return np.concatenate([[self.tau], self.tangential()])


def _tangential(xi_prime):
    if isinstance(xi_prime, Covector):
        return xi_prime.tangential()
    t = np.atleast_1d(np.asarray(xi_prime, dtype=float))
    if t.ndim != 1:
        raise ValueError("xi_prime must be a flat covector")
    return t


class PolyMatrixSymbol:
    """sigma(tau, eta, zeta') = sum a_{k,alpha,beta} tau^k eta^alpha zeta'^beta
    with N x N matrix coefficients, k + |alpha| + |beta| <= order.

    The leading tau-coefficient a_{order,0,0} must be invertible (companion
    reduction of the symbol ODE).
    """

    def __init__(self, order, system_size, base_dim, fibre_codim, coefficients,
                 rank_tol=1e-8):
        self.order = int(order)
        self.system_size = int(system_size)
        self.base_dim = int(base_dim)
        self.fibre_codim = int(fibre_codim)
        if self.order < 1:
            raise ValueError("symbol order must be >= 1")
        if self.base_dim < 0 or self.fibre_codim < 0:
            raise ValueError("negative covariable dimensions")
        n = self.system_size
        self.coefficients = {}
        for key, value in coefficients.items():
            k, alpha, beta = self._norm_key(key)
            c = np.asarray(value, dtype=complex)
            if c.ndim == 0:
                c = c * np.eye(n)
            if c.shape != (n, n):
                raise ValueError(f"coefficient {key} has shape {c.shape}")
            if not np.all(np.isfinite(c)):
                raise ValueError(f"coefficient {key} has non-finite entries")
            if k + sum(alpha) + sum(beta) > self.order:
                raise ValueError(f"multi-index {key} exceeds order {self.order}")
            if np.any(c != 0):
                self.coefficients[(k, alpha, beta)] = c
        lead = self.coefficients.get(self._lead_key())
        if lead is None:
            raise ValueError("leading tau-coefficient a_{m,0,0} is missing")
        s = np.linalg.svd(lead, compute_uv=False)
        if s[-1] <= rank_tol * s[0]:
            raise ValueError("leading tau-coefficient a_{m,0,0} is singular")

    def _lead_key(self):
        return (self.order, (0,) * self.base_dim, (0,) * self.fibre_codim)

    def _norm_key(self, key):
        k, alpha, beta = key
        alpha = tuple(int(i) for i in np.atleast_1d(alpha)) if self.base_dim else ()
        beta = tuple(int(i) for i in np.atleast_1d(beta)) if self.fibre_codim else ()
        if len(alpha) != self.base_dim or len(beta) != self.fibre_codim:
            raise ValueError(f"multi-index {key} has wrong lengths")
        if int(k) < 0 or any(i < 0 for i in alpha + beta):
            raise ValueError(f"negative multi-index {key}")
        return int(k), alpha, beta

    @property
    def covar_dim(self):
        return 1 + self.base_dim + self.fibre_codim

    def principal_part(self):
        kept = {
            (k, a, b): c
            for (k, a, b), c in self.coefficients.items()
            if k + sum(a) + sum(b) == self.order
        }
        return PolyMatrixSymbol(self.order, self.system_size, self.base_dim,
                                self.fibre_codim, kept)

    def eval(self, tau, xi_prime, principal_only=False):
        t = _tangential(xi_prime)
        if t.size != self.base_dim + self.fibre_codim:
            raise ValueError("tangential covector has wrong length")
        n = self.system_size
        out = np.zeros((n, n), dtype=complex)
        for (k, alpha, beta), c in self.coefficients.items():
            if principal_only and k + sum(alpha) + sum(beta) != self.order:
                continue
            w = tau**k
            for i, p in enumerate(alpha):
                w *= t[i] ** p
            for j, p in enumerate(beta):
                w *= t[self.base_dim + j] ** p
            out += w * c
        return out

    def tau_coefficients(self, xi_prime):
        """a_k(xi') for k = 0..order, including lower-order terms."""
        t = _tangential(xi_prime)
        n = self.system_size
        out = [np.zeros((n, n), dtype=complex) for _ in range(self.order + 1)]
        for (k, alpha, beta), c in self.coefficients.items():
            w = 1.0
            for i, p in enumerate(alpha):
                w *= t[i] ** p
            for j, p in enumerate(beta):
                w *= t[self.base_dim + j] ** p
            out[k] = out[k] + w * c
        return out


@dataclass(frozen=True)
class EllipticityReport:
    elliptic: bool
    min_sv: float
    witness: Covector | None


def _split_covector(sym, x):
    b, f1 = sym.base_dim, sym.fibre_codim
    return Covector(float(x[0]), tuple(x[1 : 1 + b]), tuple(x[1 + b : 1 + b + f1]))


def ellipticity_check(sym, samples=128, seed=0, tol=1e-8, polish=8):
    """Sample the principal part on the unit covector sphere and polish the
    worst points with a local minimizer of the smallest singular value."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    d = sym.covar_dim
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((samples, d))
    # include the coordinate axes for determinism on separable symbols
    pts = np.vstack([pts, np.eye(d), -np.eye(d)])
    pts /= np.linalg.norm(pts, axis=1)[:, None]

    def min_sv_at(x):
        x = np.asarray(x, dtype=float)
        nrm = np.linalg.norm(x)
        if nrm == 0:
            return np.inf
        x = x / nrm
        cov = _split_covector(sym, x)
        m = sym.eval(cov.tau, cov, principal_only=True)
        return float(np.linalg.svd(m, compute_uv=False)[-1])

    values = np.array([min_sv_at(p) for p in pts])
    order = np.argsort(values)
    best_val = values[order[0]]
    best_pt = pts[order[0]]
    for idx in order[:polish]:
        res = minimize(min_sv_at, pts[idx], method="Nelder-Mead",
                       options={"maxiter": 400, "xatol": 1e-12, "fatol": 1e-14})
        if res.fun < best_val:
            best_val = float(res.fun)
            best_pt = res.x / np.linalg.norm(res.x)
    elliptic = bool(best_val > tol)
    witness = None if elliptic else _split_covector(sym, best_pt)
    return EllipticityReport(elliptic, float(best_val), witness)


def companion_matrix(sym, xi_prime):
    """First-order companion A of sigma(D_t, xi') v = 0 in the variables
    V = (v, D_t v, ..., D_t^{m-1} v), so that D_t V = A V."""
    t = _tangential(xi_prime)
    if np.linalg.norm(t) == 0:
        raise ZeroCovector("companion reduction requires xi' != 0")
    coeffs = sym.tau_coefficients(t)
    m, n = sym.order, sym.system_size
    a = np.zeros((m * n, m * n), dtype=complex)
    for i in range(m - 1):
        a[i * n : (i + 1) * n, (i + 1) * n : (i + 2) * n] = np.eye(n)
    lead = coeffs[m]
    for j in range(m):
        a[(m - 1) * n :, j * n : (j + 1) * n] = -np.linalg.solve(lead, coeffs[j])
    return a


def _axis_gap_estimate(sym, t, radius, samples=65):
    """Conservative lower bound for the distance from the real axis to the
    companion spectrum: min sigma_min(sigma(tau, xi')) over a real-tau sample
    divided by a tau-derivative bound."""
    taus = np.linspace(-radius, radius, samples)
    coeffs = sym.tau_coefficients(t)
    gap = np.inf
    for tau in taus:
        acc = np.zeros_like(coeffs[0])
        for k, c in enumerate(coeffs):
            acc = acc + (tau**k) * c
        gap = min(gap, float(np.linalg.svd(acc, compute_uv=False)[-1]))
    lip = sum(
        k * np.linalg.norm(c, 2) * radius ** (k - 1)
        for k, c in enumerate(coeffs)
        if k >= 1
    )
    lip = max(lip, np.finfo(float).tiny)
    return max(gap / (2.0 * lip), 1e-8)


def _companion_radius(sym, t):
    """Upper bound for the companion spectral radius: the smaller of a
    Fujiwara-type coefficient bound 2 max_k |a_m^-1 a_k|^(1/(m-k)) and the
    power bound |A^16|^(1/16), plus a unit safety margin."""
    coeffs = sym.tau_coefficients(t)
    m = sym.order
    lead = coeffs[m]
    fuji = 0.0
    for k in range(m):
        nrm = np.linalg.norm(np.linalg.solve(lead, coeffs[k]), 2)
        fuji = max(fuji, nrm ** (1.0 / (m - k)))
    bound = 2.0 * fuji
    a = companion_matrix(sym, t)
    power = np.linalg.norm(np.linalg.matrix_power(a, 16), 2) ** (1.0 / 16.0)
    if np.isfinite(power):
        bound = min(bound, power)
    return 1.0 + max(1.0, bound)


def calderon_symbol(sym, xi_prime, idem_tol=1e-12, node_cap=4096):
    """Projector onto boundary data of decaying solutions (t -> +infinity)
    of the symbol ODE: the Riesz projector of the companion matrix for the
    open upper half-plane."""
    return _half_plane_projector(sym, xi_prime, "upper", idem_tol, node_cap)


def complementary_symbol(sym, xi_prime, idem_tol=1e-12, node_cap=4096):
    """Lower-half-plane Riesz projector; calderon + complementary = I."""
    return _half_plane_projector(sym, xi_prime, "lower", idem_tol, node_cap)


def _half_plane_projector(sym, xi_prime, half, idem_tol, node_cap):
    t = _tangential(xi_prime)
    a = companion_matrix(sym, t)
    radius = _companion_radius(sym, t)
    delta = _axis_gap_estimate(sym, t, radius)
    delta = min(delta, 0.45 * radius)
    if half == "upper":
        contour = ContourSpec.rectangle(-radius, radius, delta, radius)
    else:
        contour = ContourSpec.rectangle(-radius, radius, -radius, -delta)
    return riesz_projector(a, contour, idem_tol=idem_tol, node_cap=node_cap)


def dn_symbol(sym, xi_prime, normal_orientation=1, graph_tol=1e-8, idem_tol=1e-12):
    """Dirichlet-to-Neumann principal symbol of a second-order scalar symbol.

    Extracts lambda with range(calderon) = span{(1, lambda)} and converts
    D_t-data to the normal derivative; normal_orientation=+1 is the outward
    normal (-d/dt on the decaying side), -1 the inward one.
    """
    if sym.order != 2 or sym.system_size != 1:
        raise ValueError("dn_symbol requires a scalar second-order symbol")
    if normal_orientation not in (1, -1):
        raise ValueError("normal_orientation must be +1 or -1")
    c = calderon_symbol(sym, xi_prime, idem_tol=idem_tol)
    rng = c.range_basis
    if rng is None or rng.dim != 1:
        raise GraphConditionFailed(
            f"range dimension {None if rng is None else rng.dim} != 1"
        )
    v = rng.basis[:, 0]
    if abs(v[0]) <= graph_tol * np.linalg.norm(v):
        raise GraphConditionFailed("Dirichlet component of the range vanishes")
    lam = v[1] / v[0]
    return complex(-1j * lam * normal_orientation)


def orthogonalize(c, gram, pre_tol=1e-8, inv_tol=1e-12):
    """Gram-orthogonal projector with the same range: C (I + C - C*)^-1."""
    if isinstance(c, Projector):
        if c.idem_defect > pre_tol:
            raise ValueError(f"input idempotence defect {c.idem_defect:.3e} too large")
        cm = c.matrix
        rng = c.range_basis
    else:
        cm = as_matrix(c, "C")
        if idempotence_defect(cm) > pre_tol:
            raise ValueError("input is not a projector within tolerance")
        rng = None
    g = check_gram(gram)
    cstar = gram_adjoint(cm, g)
    m = np.eye(cm.shape[0], dtype=complex) + cm - cstar
    s = np.linalg.svd(m, compute_uv=False)
    if s[-1] <= inv_tol * s[0]:
        raise NotInvertible("I + C - C* is numerically singular")
    co = cm @ np.linalg.solve(m, np.eye(cm.shape[0], dtype=complex))
    return Projector(co, idempotence_defect(co), range_basis=rng)


def _monomials(total, nvars):
    """All exponent tuples over nvars variables with given total degree."""
    if nvars == 0:
        return [()] if total == 0 else []
    if nvars == 1:
        return [(total,)]
    out = []
    for head in range(total + 1):
        for tail in _monomials(total - head, nvars - 1):
            out.append((head,) + tail)
    return out


def _multinomial(exps):
    from math import factorial

    total = sum(exps)
    out = factorial(total)
    for e in exps:
        out //= factorial(e)
    return out


def random_elliptic_symbol(seed, order=None, system_size=None, base_dim=None,
                           fibre_codim=None, lower_order=True):
    """Seeded random elliptic symbol.

    Even orders build the principal part as S(xi)* S(xi) + 0.1 |xi|^m I with
    S a random homogeneous matrix polynomial of degree m/2; odd orders use
    root-controlled scalar factors conjugated by a random similarity (one
    tangential covariable). Lower-order terms are scaled well below the
    real-axis ellipticity margin so the companion spectrum stays off the
    real line.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    m = int(order) if order is not None else int(rng.integers(1, 5))
    n = int(system_size) if system_size is not None else int(rng.integers(1, 4))
    if m % 2 == 1:
        b = 0
        f1 = 1
    else:
        b = int(base_dim) if base_dim is not None else int(rng.integers(0, 2))
        f1 = int(fibre_codim) if fibre_codim is not None else int(rng.integers(1, 3))
    d = 1 + b + f1

    def key_of(exp):
        return (exp[0], tuple(exp[1 : 1 + b]), tuple(exp[1 + b :]))

    coeffs = {}
    if m % 2 == 0:
        r = m // 2
        half = {}
        for exp in _monomials(r, d):
            half[exp] = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)
        for e1, c1 in half.items():
            for e2, c2 in half.items():
                exp = tuple(a + bb for a, bb in zip(e1, e2))
                key = key_of(exp)
                coeffs[key] = coeffs.get(key, 0) + c1.conj().T @ c2
        for exp in _monomials(r, d):
            sq = tuple(2 * e for e in exp)
            key = key_of(sq)
            coeffs[key] = coeffs.get(key, 0) + 0.1 * _multinomial(exp) * np.eye(n)
    else:
        v = np.eye(n) + 0.4 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        vinv = np.linalg.inv(v)
        polys = []
        for _ in range(n):
            roots = []
            for _ in range(m):
                re = rng.uniform(-1.5, 1.5)
                im = rng.choice([-1.0, 1.0]) * rng.uniform(0.4, 2.0)
                roots.append(re + 1j * im)
            # expand prod_k (tau - z_k * zeta) into c[(k_tau, k_zeta)]
            poly = {(0, 0): 1.0 + 0j}
            for z in roots:
                new = {}
                for (kt, kz), c in poly.items():
                    new[(kt + 1, kz)] = new.get((kt + 1, kz), 0) + c
                    new[(kt, kz + 1)] = new.get((kt, kz + 1), 0) - z * c
                poly = new
            polys.append(poly)
        exps = set()
        for p in polys:
            exps.update(p.keys())
        for kt, kz in sorted(exps):
            diag = np.diag([p.get((kt, kz), 0.0) for p in polys])
            key = (kt, (), (kz,))
            coeffs[key] = coeffs.get(key, 0) + v @ diag @ vinv

    sym = PolyMatrixSymbol(m, n, b, f1, coeffs)
    if lower_order and m >= 1:
        margin = _real_axis_margin(sym, rng)
        scale = 0.02 * margin
        low = dict(sym.coefficients)
        for total in range(m):
            for exp in _monomials(total, d):
                key = key_of(exp)
                bump = scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)
                low[key] = low.get(key, 0) + bump
        sym = PolyMatrixSymbol(m, n, b, f1, low)
    return sym


def _real_axis_margin(sym, rng, sphere_samples=24, tau_samples=33):
    """min over a (tau, xi') sample of sigma_min of the full symbol on the
    real axis, xi' on the unit sphere."""
    t_dim = sym.base_dim + sym.fibre_codim
    dirs = rng.standard_normal((sphere_samples, t_dim))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    margin = np.inf
    for t in dirs:
        radius = _companion_radius(sym, t)
        for tau in np.linspace(-radius, radius, tau_samples):
            sv = np.linalg.svd(sym.eval(tau, t), compute_uv=False)[-1]
            margin = min(margin, float(sv))
    return margin
