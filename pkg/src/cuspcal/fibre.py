"""Normal families on the fibre: model operators, fibre ODEs, boundary-data
spaces of the plus and minus sides of the doubled fibre, the unique
continuation check, and the normal-family Calderon projector.

Convention: one global collar field nu with D_nu = D_z at both fibre
endpoints; boundary-data vectors in C^{2mN} are ordered
(jet at z=0, jet at z=L), each jet being (v, D_z v, ..., D_z^{m-1} v).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from ._poly import PolyMat1, PolyMat2
from .errors import (
    IntegrationFailure,
    NotComplementary,
    PointFibre,
    RankDeficient,
    SolveFailure,
)
from .linalg import (
    SubspaceBasis,
    direct_sum_check,
    projector_from_pair,
)

GEOMETRIES = ("HalfLineToy", "StripHyperbolic", "CuspDomain", "ExteriorToy")

# exact powers of i^{-r} for r mod 4 (D_z^r = i^{-r} d^r/dz^r)
I_NEG = (1.0 + 0j, -1j, -1.0 + 0j, 1j)


@dataclass(frozen=True)
class Fibre:
    kind: str  # "point" or "interval"
    length: float = 0.0

    def __post_init__(self):
        if self.kind not in ("point", "interval"):
            raise ValueError(f"unknown fibre kind {self.kind!r}")
        if self.kind == "interval" and self.length <= 0:
            raise ValueError("interval fibre needs positive length")


class ModelOperator:
    """Model phi-differential operator with y-independent coefficients:

        P = x^{-c m} sum a_{k,alpha,beta}(x, z) (x^2 D_x)^k (x D_y)^alpha D_z^beta

    Coefficients are bivariate polynomial matrices in (x, z); the weight c
    is recorded but ignored by all homogeneous-equation paths.
    """

    def __init__(self, order, system_size, base_dim, fibre, coefficients,
                 geometry="StripHyperbolic", weight_c=0, rank_tol=1e-8):
        self.order = int(order)
        self.system_size = int(system_size)
        self.base_dim = int(base_dim)
        self.fibre = fibre
        self.geometry = geometry
        self.weight_c = int(weight_c)
        if geometry not in GEOMETRIES:
            raise ValueError(f"unknown geometry {geometry!r}")
        if self.order < 0:
            raise ValueError("negative order")
        if self.base_dim not in (0, 1):
            raise ValueError("base_dim must be 0 or 1")
        n = self.system_size
        self.coefficients = {}
        for key, val in coefficients.items():
            k, alpha, beta = (int(i) for i in key)
            if min(k, alpha, beta) < 0 or k + alpha + beta > self.order:
                raise ValueError(f"multi-index {key} out of range")
            if alpha > 0 and self.base_dim == 0:
                raise ValueError("alpha > 0 with point base")
            if beta > 0 and self.fibre.kind == "point":
                raise ValueError("beta > 0 with point fibre")
            pm = val if isinstance(val, PolyMat2) else PolyMat2(val, n)
            if pm.system_size != n:
                raise ValueError("coefficient system size mismatch")
            self.coefficients[(k, alpha, beta)] = pm
        lead = self.coefficients.get((self.order, 0, 0))
        if lead is None:
            raise ValueError("leading coefficient a_{m,0,0} is missing")
        zs = np.linspace(0.0, self.fibre.length, 33) if self.fibre.kind == "interval" else np.array([0.0])
        vals = lead.at_x0().eval(zs)
        sv = np.linalg.svd(vals, compute_uv=False)
        if np.min(sv[..., -1]) <= rank_tol * max(1.0, np.max(sv[..., 0])):
            raise ValueError("a_{m,0,0}(0, z) is singular on the fibre")

    @property
    def fibre_length(self):
        return self.fibre.length


class FibreODE:
    """N(P)(mu) as an ODE of order m in z on [z_lo, z_hi]:

        sum_beta A_beta(z) D_z^beta v = 0,
        A_beta(z) = sum_{k,alpha} a_{k,alpha,beta}(0, z) tau^k eta^alpha
    """

    def __init__(self, order, system_size, interval, coeffs, mu=None,
                 extra_potential=None, rank_tol=1e-8, label=""):
        self.order = int(order)
        self.system_size = int(system_size)
        self.interval = (float(interval[0]), float(interval[1]))
        if self.interval[1] <= self.interval[0]:
            raise ValueError("empty fibre interval")
        if len(coeffs) != self.order + 1:
            raise ValueError("need coefficients A_0..A_m")
        self.coeffs = list(coeffs)
        self.mu = mu
        self.extra_potential = extra_potential
        self.label = label
        zs = np.linspace(*self.interval, 33)
        lead = self.coeffs[-1].eval(zs)
        sv = np.linalg.svd(lead, compute_uv=False)
        if np.min(sv[..., -1]) <= rank_tol * max(1.0, np.max(sv[..., 0])):
            raise ValueError("leading ODE coefficient is singular on the fibre")

    @property
    def dim(self):
        return self.order * self.system_size

    @property
    def length(self):
        return self.interval[1] - self.interval[0]

    def coeff_values(self, z):
        vals = [c.eval(z) for c in self.coeffs]
        if self.extra_potential is not None:
            a = np.asarray(self.extra_potential(np.asarray(z, dtype=float)))
            vals[0] = vals[0] + a[..., None, None] * np.eye(self.system_size)
        return vals

    def companion(self, z):
        """D_z-convention companion: D_z V = A(z) V, V = (v, ..., D_z^{m-1} v)."""
        m, n = self.order, self.system_size
        vals = self.coeff_values(z)
        a = np.zeros((m * n, m * n), dtype=complex)
        for i in range(m - 1):
            a[i * n : (i + 1) * n, (i + 1) * n : (i + 2) * n] = np.eye(n)
        for j in range(m):
            a[(m - 1) * n :, j * n : (j + 1) * n] = -np.linalg.solve(vals[m], vals[j])
        return a

    def apply(self, z, jets):
        """Apply the ODE to D_z-jets (v, D_z v, ..., D_z^m v) at z."""
        vals = self.coeff_values(z)
        out = np.zeros_like(jets[0])
        for b in range(self.order + 1):
            out = out + vals[b] @ jets[b]
        return out

    def formal_adjoint(self):
        """L2 formal adjoint sum_l B_l(z) D_z^l with

        B_l = sum_{k>=l} C(k,l) i^{-(k-l)} (d/dz)^{k-l} A_k^H.

        The bump potential, when present, must be real-valued and is kept.
        """
        m, n = self.order, self.system_size
        out = [PolyMat1.zero(n) for _ in range(m + 1)]
        for k in range(m + 1):
            p = self.coeffs[k].adjoint()
            for r in range(k + 1):
                l = k - r
                factor = math.comb(k, l) * I_NEG[r % 4]
                out[l] = out[l] + p.scale(factor)
                p = p.deriv()
        return FibreODE(m, n, self.interval, out, mu=self.mu,
                        extra_potential=self.extra_potential,
                        label=self.label + "*")


MU_CAP = 16.0  # exponential growth over the fibre stays within float64


def normal_operator(op, mu, mu_cap=MU_CAP):
    """Freeze coefficients at x = 0 and substitute tau^k eta^alpha."""
    if op.fibre.kind != "interval":
        raise PointFibre("normal_operator needs an interval fibre; "
                         "use full_ellipticity_scan for point fibres")
    tau, eta = _split_mu(op, mu)
    if mu_cap is not None and max(abs(tau), abs(eta)) > mu_cap:
        raise ValueError(f"|mu| exceeds the growth cap {mu_cap}")
    n = op.system_size
    coeffs = [PolyMat1.zero(n) for _ in range(op.order + 1)]
    for (k, alpha, beta), pm in op.coefficients.items():
        w = (tau**k) * (eta**alpha if alpha else 1.0)
        coeffs[beta] = coeffs[beta] + pm.at_x0().scale(w)
    return FibreODE(op.order, n, (0.0, op.fibre.length), coeffs, mu=(tau, eta),
                    label=f"N(P)({mu})")


def _split_mu(op, mu):
    if np.isscalar(mu):
        mu = (float(mu),)
    tau = float(mu[0])
    eta = float(mu[1]) if len(mu) > 1 else 0.0
    if op.base_dim == 0 and len(mu) > 1 and eta != 0.0:
        raise ValueError("eta supplied for a point base")
    return tau, eta


@dataclass
class FundamentalSolution:
    """Solution space of the fibre ODE represented by endpoint jet maps.

    Columns are the solutions with D_z-canonical jets at the left endpoint;
    jet_hi maps those initial jets to D_z-jets at the right endpoint.
    """

    ode: FibreODE
    jet_lo: np.ndarray
    jet_hi: np.ndarray
    residual: float


def fundamental_matrix(ode, checkpoints=16, rtol=1e-11, atol=1e-13,
                       method="DOP853", residual_tol=1e-7):
    """Integrate the companion system over the fibre with checkpointed
    re-orthonormalization; the a-posteriori residual is the relative
    deviation from a tighter-tolerance re-integration."""
    n = ode.dim
    z_lo, z_hi = ode.interval

    def run(rt, at, with_checkpoints):
        y = np.eye(n, dtype=complex)
        acc = np.eye(n, dtype=complex)  # accumulated change of basis R_K...R_1
        zs = np.linspace(z_lo, z_hi, (checkpoints if with_checkpoints else 1) + 1)
        for za, zb in zip(zs[:-1], zs[1:]):
            sol = solve_ivp(
                lambda z, v: (1j * ode.companion(z) @ v.reshape(n, n)).ravel(),
                (za, zb), y.ravel(), method=method, rtol=rt, atol=at)
            if not sol.success:
                raise IntegrationFailure(
                    f"integrator failed on [{za:.3g},{zb:.3g}]: {sol.message}",
                    z=float(sol.t[-1]) if sol.t.size else za)
            y = sol.y[:, -1].reshape(n, n)
            if with_checkpoints:
                y, r = np.linalg.qr(y)
                acc = r @ acc
        return y @ acc

    phi = run(rtol, atol, True)
    phi_check = run(min(rtol, 1e-12), min(atol, 1e-14), False)
    scale = max(1.0, float(np.linalg.norm(phi)))
    residual = float(np.linalg.norm(phi - phi_check)) / scale
    if residual > residual_tol:
        raise IntegrationFailure(
            f"re-integration residual {residual:.3e} exceeds {residual_tol:.3e}",
            z=z_hi)
    return FundamentalSolution(ode, np.eye(n, dtype=complex), phi, residual)


def propagate_jet(ode, jet_lo, rtol=1e-11, atol=1e-13, method="DOP853"):
    """D_z-jet at the right endpoint of the solution with the given left jet."""
    n = ode.dim
    z_lo, z_hi = ode.interval
    sol = solve_ivp(lambda z, v: 1j * (ode.companion(z) @ v), (z_lo, z_hi),
                    np.asarray(jet_lo, dtype=complex), method=method,
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationFailure(f"integrator failed: {sol.message}")
    return sol.y[:, -1]


def boundary_data_space(ode, nu_convention="collar", rank_tol=1e-8):
    """Basis of B+(mu) = {gamma u : N(P)(mu) u = 0} in C^{2mN}, data ordered
    (jet at z_lo, jet at z_hi) with the single global D_z convention."""
    if nu_convention not in ("collar", "global"):
        raise ValueError("nu convention is the single global collar field")
    f = fundamental_matrix(ode)
    stacked = np.vstack([f.jet_lo, f.jet_hi])
    basis = SubspaceBasis.from_span(stacked, rank_tol=rank_tol)
    if basis.dim != ode.dim:
        raise RankDeficient(
            f"endpoint jet map lost rank: {basis.dim} < {ode.dim}")
    return basis


@dataclass(frozen=True)
class Bump:
    """Smooth bump h * exp(-1/(1-w^2)) supported on (lo, hi)."""

    height: float = 1.0
    support: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.height < 0:
            raise ValueError("bump height must be nonnegative")
        if self.support[1] <= self.support[0]:
            raise ValueError("empty bump support")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        lo, hi = self.support
        w = (2.0 * z - (lo + hi)) / (hi - lo)
        out = np.zeros_like(w)
        inside = np.abs(w) < 1.0
        out[inside] = self.height * np.exp(-1.0 / (1.0 - w[inside] ** 2))
        return out


@dataclass(frozen=True)
class FibreExtension:
    """Doubled fibre: circle [0, 2L]/~ with a nonnegative bump potential
    supported in the minus side (L, 2L).

    Mirror doubling across a single endpoint is realized by the 1-D
    discrete geometry, not here.
    """

    length: float
    mode: str = "circle"
    bump: Bump | None = None

    def __post_init__(self):
        if self.mode not in ("circle", "mirror"):
            raise ValueError(f"unknown doubling mode {self.mode!r}")
        if self.bump is not None:
            lo, hi = self.bump.support
            if not (self.length < lo and hi < 2 * self.length):
                raise ValueError("bump support must lie inside the minus side")

    @classmethod
    def with_default_bump(cls, length, height=1.0):
        return cls(length, "circle",
                   Bump(height, (1.15 * length, 1.85 * length)))

    def minus_ode(self, op, mu):
        """Normal family of the doubled operator on the minus side [L, 2L]:
        mirrored coefficients B_b(z) = (-1)^b A_b(2L - z), plus the bump."""
        if self.mode != "circle":
            raise ValueError("mirror doubling lives in the discrete module")
        base = normal_operator(op, mu)
        two_l = 2.0 * self.length
        coeffs = [
            c.compose_affine(two_l, -1.0).scale((-1.0) ** b)
            for b, c in enumerate(base.coeffs)
        ]
        return FibreODE(base.order, base.system_size, (self.length, two_l),
                        coeffs, mu=base.mu, extra_potential=self.bump,
                        label=f"N(Phat)({mu})|minus")


def minus_boundary_data_space(ext, op, mu, rank_tol=1e-8):
    """Basis of B-(mu): boundary data at {0, L} of solutions on the minus
    side of the doubled fibre, read as limits from the minus side.

    Data ordering matches boundary_data_space: (jet at z=0+~2L, jet at z=L).
    """
    ode_m = ext.minus_ode(op, mu)
    f = fundamental_matrix(ode_m)
    stacked = np.vstack([f.jet_hi, f.jet_lo])
    basis = SubspaceBasis.from_span(stacked, rank_tol=rank_tol)
    if basis.dim != ode_m.dim:
        raise RankDeficient("minus-side jet map lost rank")
    return basis


@dataclass(frozen=True)
class UcpReport:
    dim_shadow: int
    min_sv: float


def ucp_check(ode, rank_tol=1e-8):
    """Shadow-solution dimension of the fibre ODE (zero for the model class
    by ODE uniqueness) plus a conditioning report: the smallest singular
    value of the one-endpoint D_z-jet map of the classically normalized
    fundamental basis."""
    m, n = ode.order, ode.system_size
    f = fundamental_matrix(ode)
    conv = np.kron(np.diag([I_NEG[k % 4] for k in range(m)]),
                   np.eye(n, dtype=complex))
    jet_lo = f.jet_lo @ conv
    jet_hi = f.jet_hi @ conv
    stacked = np.vstack([jet_lo, jet_hi])
    s = np.linalg.svd(stacked, compute_uv=False)
    rank = int(np.sum(s > rank_tol * s[0]))
    min_sv = float(np.linalg.svd(jet_lo, compute_uv=False)[-1])
    return UcpReport(ode.dim - rank, min_sv)


def range_solution_residual(ode, projector, rtol=1e-11):
    """Max relative defect between the upper jet of each range basis column
    and the integrated solution launched from its lower jet."""
    rb = projector.range_basis
    if rb is None or rb.dim == 0:
        return 0.0
    n = ode.dim
    worst = 0.0
    q = rb.orthonormal()
    for j in range(rb.dim):
        col = q[:, j]
        jet_hi = propagate_jet(ode, col[:n], rtol=rtol)
        err = np.linalg.norm(jet_hi - col[n:]) / max(1.0, np.linalg.norm(col))
        worst = max(worst, float(err))
    return worst


def normal_calderon(op, mu, ext, gap_tol=1e-8, rank_tol=1e-8, residual_tol=1e-4):
    """Normal-family Calderon projector at mu: projector_from_pair of the
    plus and minus boundary-data spaces of the doubled extension."""
    ode = normal_operator(op, mu)
    bp = boundary_data_space(ode, rank_tol=rank_tol)
    bm = minus_boundary_data_space(ext, op, mu, rank_tol=rank_tol)
    report = direct_sum_check(bp, bm, tol=gap_tol)
    if not report.is_direct_sum:
        raise NotComplementary("B+ and B- are not complementary",
                               gap=report.gap, mu=mu)
    proj = projector_from_pair(bp, bm)
    resid = range_solution_residual(ode, proj)
    if resid > residual_tol:
        raise SolveFailure(
            f"range residual {resid:.3e} exceeds {residual_tol:.3e} at mu={mu}")
    return proj


@dataclass(frozen=True)
class ScanRow:
    mu: tuple
    min_sv: float
    invertible: bool


@dataclass(frozen=True)
class ScanReport:
    rows: list
    failing: list


def full_ellipticity_scan(op, mu_grid, ext=None, nz=128, tol=1e-6):
    """Invertibility of the normal family over a mu grid.

    Point fibres: N(P)(mu) is a matrix, so a singular-value check. Interval
    fibres: smallest singular value of the discretized doubled-fibre
    operator (circle grid, second-order stencils, bump from `ext`).
    """
    rows = []
    for mu in mu_grid:
        mu_t = tuple(np.atleast_1d(mu).astype(float))
        if op.fibre.kind == "point":
            tau, eta = _split_mu(op, mu_t)
            n = op.system_size
            acc = np.zeros((n, n), dtype=complex)
            for (k, alpha, beta), pm in op.coefficients.items():
                acc += (tau**k) * (eta**alpha if alpha else 1.0) * pm.eval(0.0, 0.0)
            sv = float(np.linalg.svd(acc, compute_uv=False)[-1])
        else:
            sv = _doubled_fibre_min_sv(op, mu_t, ext, nz)
        rows.append(ScanRow(mu_t, sv, bool(sv > tol)))
    return ScanReport(rows, [r.mu for r in rows if not r.invertible])


def _doubled_fibre_min_sv(op, mu, ext, nz):
    length = op.fibre.length
    if ext is None:
        ext = FibreExtension(length, "circle", None)
    ode = normal_operator(op, mu)
    n = op.system_size
    m = op.order
    npts = 2 * nz
    h = 2.0 * length / npts
    z = np.arange(npts) * h
    minus = z > length
    zc = np.where(minus, 2.0 * length - z, z)
    mat = np.zeros((npts * n, npts * n), dtype=complex)
    for b in range(m + 1):
        vals = ode.coeffs[b].eval(zc)
        sign = np.where(minus, (-1.0) ** b, 1.0)
        vals = vals * sign[:, None, None]
        if b == 0 and ext.bump is not None:
            vals = vals + ext.bump(z)[:, None, None] * np.eye(n)
        offs, coefs = _central_stencil(b, h)
        for off, cf in zip(offs, coefs):
            cols = (np.arange(npts) + off) % npts
            w = cf * I_NEG[b % 4]
            for i in range(npts):
                r0, c0 = i * n, cols[i] * n
                mat[r0 : r0 + n, c0 : c0 + n] += w * vals[i]
    return float(np.linalg.svd(mat, compute_uv=False)[-1])


def _central_stencil(der, h):
    """Second-order central finite-difference stencil for d^der/dz^der."""
    if der == 0:
        return [0], np.array([1.0])
    if der == 1:
        return [-1, 1], np.array([-0.5, 0.5]) / h
    if der == 2:
        return [-1, 0, 1], np.array([1.0, -2.0, 1.0]) / h**2
    if der == 3:
        return [-2, -1, 1, 2], np.array([-0.5, 1.0, -1.0, 0.5]) / h**3
    if der == 4:
        return [-2, -1, 0, 1, 2], np.array([1.0, -4.0, 6.0, -4.0, 1.0]) / h**4
    raise ValueError(f"no stencil for derivative order {der}")
