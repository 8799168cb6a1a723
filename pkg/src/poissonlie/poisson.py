"""Poisson bivectors on coordinate charts, Jacobiators and Poisson-map checks.

Each chart is a product of blocks, one per group or algebra variable:

* ``exp`` blocks: ``g = g0 exp(xi)`` around a fixed base point ``g0``;
* ``log`` blocks: ``M = exp(m)`` (or ``Omega = exp(w)``);
* ``cartan`` blocks: ``Omega = exp(2i w)`` with ``w`` in su(n).

Matrix-form brackets are turned into bivectors by the rule that a factor
standing left of the r-matrix in a term differentiates by right translation
and a factor standing right of it by left translation::

    X_1 Y_2 r  -> R x R      r X_1 Y_2 -> L x L
    X_1 r Y_2  -> R x L      Y_2 r X_1 -> L x R

together with the exact coordinate differentials
``R_T m = lambda(ad_m / 2) T`` and ``L_T m = lambda(-ad_m / 2) T``.
Bivector matrices are indexed by coordinates, i.e. ``Pi[i, j] = {x^i, x^j}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .liealg import GroupElement, LieAlgebra, LieAlgebraError
from .matfun import chi, fun_of_matrix, lam
from .rmatrix import (
    DynamicalRMatrix,
    TwoTensor,
    constant_r,
    cyclic_sum,
    factorize_G_star,
    standard_R_plus_minus,
)

__all__ = [
    "Block",
    "PoissonChart",
    "SmoothMap",
    "CHART_KINDS",
    "build_chart",
    "relative_map_residual",
    "jacobiator_residual",
    "jacobiator_norm",
    "poisson_map_residual",
    "linear_map",
    "momentum_generation_residual",
    "groupoid_iso_check",
    "closed_form_bivector",
    "cross_block_operator",
    "exp_jacobians",
    "log_jacobians",
]

CHART_KINDS = (
    "sklyanin",
    "sts_log",
    "heisenberg",
    "wznw_groupoid",
    "canonical_groupoid",
    "compact_heisenberg",
    "compact_groupoid",
)


@dataclass(frozen=True)
class Block:
    name: str
    kind: str                 # exp | log | cartan
    semantics: str
    size: int


@dataclass(frozen=True, eq=False)
class PoissonChart:
    """A coordinate chart carrying a bivector field."""

    kind: str
    algebra: LieAlgebra
    blocks: tuple[Block, ...]
    bivector_fn: Callable[[np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)
    base_point: np.ndarray | None = None

    @property
    def dimension(self) -> int:
        return sum(b.size for b in self.blocks)

    def slices(self) -> dict[str, slice]:
        out, k = {}, 0
        for b in self.blocks:
            out[b.name] = slice(k, k + b.size)
            k += b.size
        return out

    def bivector(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(f"expected {self.dimension} coordinates, got shape {x.shape}")
        P = self.bivector_fn(x)
        return P

    def block(self, x, a: str, b: str | None = None) -> np.ndarray:
        s = self.slices()
        return self.bivector(x)[s[a], s[b or a]]

    def restrict(self, name: str, at=None) -> PoissonChart:
        """Sub-chart on one block, other coordinates frozen at ``at``.

        Only meaningful when the block is a Poisson subalgebra, which holds for
        every momentum-type block here.
        """
        s = self.slices()[name]
        full = np.zeros(self.dimension) if at is None else np.asarray(at, dtype=float)
        blk = next(b for b in self.blocks if b.name == name)

        def fn(y):
            x = full.copy()
            x[s] = y
            return self.bivector_fn(x)[s, s]

        return PoissonChart(f"{self.kind}[{name}]", self.algebra, (blk,), fn, dict(self.params),
                            self.base_point)

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "dimension": self.dimension,
            "blocks": [{"name": b.name, "kind": b.kind, "semantics": b.semantics, "size": b.size}
                       for b in self.blocks],
            "params": {k: (repr(v) if not isinstance(v, (int, float, str)) else v)
                       for k, v in self.params.items()},
        }


@dataclass(frozen=True, eq=False)
class SmoothMap:
    source: PoissonChart
    target: PoissonChart
    forward: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None

    def jac(self, x, h: float = 1e-6) -> np.ndarray:
        if self.jacobian is not None:
            return self.jacobian(x)
        x = np.asarray(x, dtype=float)
        cols = []
        for i in range(len(x)):
            e = np.zeros_like(x)
            e[i] = h
            cols.append((self.forward(x + e) - self.forward(x - e)) / (2 * h))
        return np.array(cols).T


# ---------------------------------------------------------------------------
# coordinate differentials

def log_jacobians(alg: LieAlgebra, m) -> tuple[np.ndarray, np.ndarray]:
    """(JR, JL) with R_T m = JR T and L_T m = JL T for M = exp(m)."""
    A = alg.ad(np.asarray(m))
    return fun_of_matrix(lam(0.5), A), fun_of_matrix(lam(-0.5), A)


def exp_jacobians(alg: LieAlgebra, xi, Ad_g0_inv: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(JR, JL) for g = g0 exp(xi)."""
    JR, JL = log_jacobians(alg, xi)
    return JR, JL @ Ad_g0_inv


def _Ad_matrix(alg: LieAlgebra, g: np.ndarray) -> np.ndarray:
    """Matrix of X -> g X g^{-1} on coefficient vectors."""
    gi = np.linalg.inv(g)
    cols = [alg.coeffs_of(g @ T @ gi) for T in alg.matrices]
    out = np.array(cols).T
    return np.real(out) if alg.is_real else out


def _pair(J1, r, J2):
    return J1 @ r @ J2.T


def _sector(JR, JL, c, d, e):
    """Bivector of {X_1, X_2} = X1 X2 c + c X1 X2 - X1 d X2 - X2 e X1."""
    return _pair(JR, c, JR) + _pair(JL, c, JL) - _pair(JR, d, JL) - _pair(JL, e, JR)


# ---------------------------------------------------------------------------
# closed forms

def cross_block_operator(alg: LieAlgebra, w, Rop: np.ndarray, scale: float, chi_scale: complex):
    """V(T) = scale * (-R o ad_w + chi(chi_scale ad_w))(T) as a matrix."""
    A = alg.ad(np.asarray(w))
    return scale * (-Rop @ A + fun_of_matrix(chi(chi_scale), A))


def closed_form_bivector(alg: LieAlgebra, w, Rop: np.ndarray, scale: float, chi_scale: complex):
    """Momentum-sector bivector  {w, <w, T>} = scale(-ad_w o R + chi(c ad_w))([w, T]).

    With (scale, c, R) = (1, nu, R^nu) this is the monodromy sector of the WZNW
    bracket, with (2 nu, 1/2, R) the log form of the STS bracket, and with
    (theta, i, R^i) the compact double.
    """
    A = alg.ad(np.asarray(w))
    F = scale * (-A @ Rop + fun_of_matrix(chi(chi_scale), A)) @ A
    return F @ alg.form_inv


# ---------------------------------------------------------------------------
# chart builders

def _unit_R(alg: LieAlgebra) -> TwoTensor:
    return constant_r(alg, "compact_Ri" if alg.kind == "su_compact" else "standard_split")


def _group_base(alg: LieAlgebra, base_point):
    if base_point is None:
        return np.eye(alg.n, dtype=alg.dtype)
    g0 = base_point.matrix if isinstance(base_point, GroupElement) else np.asarray(base_point)
    return g0


def _sklyanin(alg, Rnu: TwoTensor, g0):
    Adi = _Ad_matrix(alg, np.linalg.inv(g0))
    r = Rnu.coeffs

    def fn(x):
        JR, JL = exp_jacobians(alg, x, Adi)
        return _pair(JR, r, JR) - _pair(JL, r, JL)

    return fn, (Block("g", "exp", "xi_q exponential coordinates of q around q0", alg.dim),)


def _groupoid_fn(alg, g0, gg, mixed, sector, left: bool, right: bool):
    """Shared assembly for the Heisenberg double and both groupoids.

    ``gg(y)`` is the tensor in {g1,g2} = g1 g2 gg(y) - gg(y~) g1 g2,
    ``mixed(y)`` returns (a, b) with {g1, X2} = g1 (X2 a - b X2), and
    ``sector(y)`` returns (c, d, e) for the X-X bracket.  The left variable
    X~ uses the mirrored brackets {g1, X~2} = (X~2 a - b X~2) g1 and minus
    the sector.
    """
    Adi = _Ad_matrix(alg, np.linalg.inv(g0))
    d = alg.dim

    def fn(x):
        k = 0
        if left:
            yl = x[k:k + d]
            k += d
        xi = x[k:k + d]
        k += d
        if right:
            yr = x[k:k + d]
        N = len(x)
        P = np.zeros((N, N))
        JRg, JLg = exp_jacobians(alg, xi, Adi)
        gs = slice(d if left else 0, (2 if left else 1) * d)
        rs = slice(gs.stop, gs.stop + d)
        ls = slice(0, d)
        Pgg = np.zeros((d, d))
        if right:
            JR, JL = log_jacobians(alg, yr)
            Pgg += _pair(JRg, gg(yr), JRg)
            a, b = mixed(yr)
            P[gs, rs] = _pair(JRg, a, JR) - _pair(JRg, b, JL)
            P[rs, gs] = -P[gs, rs].T
            P[rs, rs] = _sector(JR, JL, *sector(yr))
        else:
            Pgg += _pair(JRg, gg(None), JRg)
        if left:
            JR, JL = log_jacobians(alg, yl)
            Pgg -= _pair(JLg, gg(yl), JLg)
            a, b = mixed(yl)
            P[gs, ls] = _pair(JLg, a, JR) - _pair(JLg, b, JL)
            P[ls, gs] = -P[gs, ls].T
            P[ls, ls] = -_sector(JR, JL, *sector(yl))
        else:
            Pgg -= _pair(JLg, gg(None), JLg)
        P[gs, gs] = Pgg
        return P

    return fn


def _tensor(alg, op):
    return np.real_if_close(np.asarray(op) @ alg.form_inv)


def build_chart(kind: str, algebra: LieAlgebra, nu: float | None = None, theta: float | None = None,
                base_point=None, r_data: TwoTensor | None = None,
                K: DynamicalRMatrix | None = None, K_scale: float = 1.0) -> PoissonChart:
    """Build one of the seven charts.

    ``nu`` is the split parameter (R^nu = 2 nu R); ``theta`` the compact one.
    ``r_data`` overrides the constant r-matrix (R^nu for ``sklyanin``).  ``K``
    overrides the dynamical r-matrix of a groupoid and ``K_scale`` multiplies
    it (used by falsification controls).  For ``wznw_groupoid`` on su(n)
    ``theta`` selects nu = i theta and R^nu = theta R^i.
    """
    alg = algebra
    if kind not in CHART_KINDS:
        raise ValueError(f"unknown chart kind {kind!r}")
    compact_kind = kind.startswith("compact")
    if compact_kind and alg.kind != "su_compact":
        raise LieAlgebraError(f"{kind} needs an su_compact algebra")
    g0 = _group_base(alg, base_point)
    Ru = _unit_R(alg)
    Rop = Ru.operator
    Ihat = alg.form_inv
    d = alg.dim
    params: dict = {"nu": nu, "theta": theta}

    if kind == "sklyanin":
        if r_data is None:
            r_data = Ru * (theta if alg.kind == "su_compact" else 2 * nu)
        fn, blocks = _sklyanin(alg, r_data, g0)
        return PoissonChart(kind, alg, blocks, fn, params, g0)

    if kind in ("sts_log", "heisenberg", "canonical_groupoid"):
        if alg.kind != "sl_split":
            raise LieAlgebraError(f"{kind} needs an sl_split algebra")
        s = 2 * nu
        R = Ru.coeffs
        Rp, Rm = R + 0.5 * Ihat, R - 0.5 * Ihat
        sector = lambda y: (s * R, s * Rm, s * Rp)
        if kind == "sts_log":
            def fn(x):
                JR, JL = log_jacobians(alg, x)
                return _sector(JR, JL, *sector(x))
            blocks = (Block("omega", "log", "omega = log Omega", d),)
            return PoissonChart(kind, alg, blocks, fn, params, g0)
        mixed = lambda y: (s * Rp, s * Rm)
        if kind == "heisenberg":
            fn = _groupoid_fn(alg, g0, lambda y: s * R, mixed, sector, left=False, right=True)
            blocks = (Block("g", "exp", "xi_g exponential coordinates around g0", d),
                      Block("omega", "log", "omega = log Omega", d))
            return PoissonChart(kind, alg, blocks, fn, params, g0)
        if K is None:
            K = DynamicalRMatrix("K_can_of_Omega", nu, alg, constant=Ru)
        Kd = K

        def gg(y):
            return s * (R + K_scale * _tensor(alg, Kd.dynamical_operator(y)))

        fn = _groupoid_fn(alg, g0, gg, mixed, sector, left=True, right=True)
        blocks = (Block("omega_tilde", "log", "omega~ = log Omega~", d),
                  Block("g", "exp", "xi_g exponential coordinates around g0", d),
                  Block("omega", "log", "omega = log Omega", d))
        params["K"] = K.kind
        return PoissonChart(kind, alg, blocks, fn, params, g0)

    if kind == "wznw_groupoid":
        if alg.kind == "su_compact":
            nu_eff = 1j * theta
            Rnu = Ru.coeffs * theta
        else:
            nu_eff = nu
            Rnu = Ru.coeffs * 2 * nu
        if r_data is not None:
            Rnu = r_data.coeffs
        if K is None:
            K = DynamicalRMatrix("K_nu_of_M", nu_eff, alg)
        Kd = K

        cache: dict = {}

        def r_of(y):
            key = np.asarray(y).tobytes()
            if key not in cache:
                if len(cache) > 4:
                    cache.clear()
                cache[key] = Rnu + K_scale * _tensor(alg, Kd.dynamical_operator(y))
            return cache[key]

        fn = _groupoid_fn(
            alg, g0, r_of,
            lambda y: (r_of(y) + 0.5 * Ihat, r_of(y) - 0.5 * Ihat),
            lambda y: (r_of(y), r_of(y) - 0.5 * Ihat, r_of(y) + 0.5 * Ihat),
            left=True, right=True)
        blocks = (Block("m_tilde", "log", "m~ = log M~", d),
                  Block("g", "exp", "xi_g exponential coordinates around g0", d),
                  Block("m", "log", "m = log M", d))
        params["K"] = K.kind
        return PoissonChart(kind, alg, blocks, fn, params, g0)

    # compact double and groupoid: closed forms on the omega blocks
    th = theta
    Adi = _Ad_matrix(alg, np.linalg.inv(g0))
    V = lambda w: cross_block_operator(alg, w, Rop, th, 1j)
    F = lambda w: closed_form_bivector(alg, w, Rop, th, 1j)
    Ri = Ru.coeffs
    if kind == "compact_heisenberg":
        def fn(x):
            xi, w = x[:d], x[d:]
            JR, JL = exp_jacobians(alg, xi, Adi)
            P = np.zeros((2 * d, 2 * d))
            P[:d, :d] = th * (_pair(JR, Ri, JR) - _pair(JL, Ri, JL))
            P[:d, d:] = JR @ V(w) @ alg.form_inv
            P[d:, :d] = -P[:d, d:].T
            P[d:, d:] = F(w)
            return P

        blocks = (Block("g", "exp", "xi_g exponential coordinates around g0 in SU(n)", d),
                  Block("omega", "cartan", "omega in su(n), Omega = exp(2i omega)", d))
        return PoissonChart(kind, alg, blocks, fn, params, g0)

    if K is None:
        K = DynamicalRMatrix("K_compact_of_Omega", th, alg, constant=Ru)
    Kd = K

    def fn(x):
        wl, xi, wr = x[:d], x[d:2 * d], x[2 * d:]
        JR, JL = exp_jacobians(alg, xi, Adi)
        P = np.zeros((3 * d, 3 * d))
        Kr = K_scale * _tensor(alg, Kd.dynamical_operator(wr))
        Kl = K_scale * _tensor(alg, Kd.dynamical_operator(wl))
        P[d:2 * d, d:2 * d] = th * (_pair(JR, Ri + Kr, JR) - _pair(JL, Ri + Kl, JL))
        P[d:2 * d, 2 * d:] = JR @ V(wr) @ alg.form_inv
        P[d:2 * d, :d] = JL @ V(wl) @ alg.form_inv
        P[2 * d:, d:2 * d] = -P[d:2 * d, 2 * d:].T
        P[:d, d:2 * d] = -P[d:2 * d, :d].T
        P[2 * d:, 2 * d:] = F(wr)
        P[:d, :d] = -F(wl)
        return P

    blocks = (Block("omega_tilde", "cartan", "omega~ in su(n), Omega~ = exp(2i omega~)", d),
              Block("g", "exp", "xi_g exponential coordinates around g0 in SU(n)", d),
              Block("omega", "cartan", "omega in su(n), Omega = exp(2i omega)", d))
    params["K"] = K.kind
    return PoissonChart(kind, alg, blocks, fn, params, g0)


# ---------------------------------------------------------------------------
# checks

def jacobiator_residual(chart: PoissonChart, x, h: float = 1e-5) -> np.ndarray:
    """J^{abc} = Pi^{ad} d_d Pi^{bc} + cyclic, with central differences."""
    x = np.asarray(x, dtype=float)
    N = len(x)
    P = chart.bivector(x)
    dP = np.empty((N, N, N))
    for k in range(N):
        e = np.zeros(N)
        e[k] = h
        dP[k] = (chart.bivector(x + e) - chart.bivector(x - e)) / (2 * h)
    A = np.einsum("ad,dbc->abc", P, dP)
    return cyclic_sum(A)


def jacobiator_norm(chart: PoissonChart, x, h: float = 1e-5) -> float:
    return float(np.linalg.norm(jacobiator_residual(chart, x, h)))


def poisson_map_residual(phi: SmoothMap, x) -> np.ndarray:
    """Pi_target(phi(x)) - J Pi_source(x) J^T."""
    x = np.asarray(x, dtype=float)
    J = phi.jac(x)
    return phi.target.bivector(phi.forward(x)) - J @ phi.source.bivector(x) @ J.T


def relative_map_residual(phi: SmoothMap, x) -> float:
    """||residual|| over the larger of ||Pi_target(phi(x))|| and ||J Pi_source J^T||."""
    x = np.asarray(x, dtype=float)
    J = phi.jac(x)
    a = phi.target.bivector(phi.forward(x))
    b = J @ phi.source.bivector(x) @ J.T
    scale = max(np.linalg.norm(a), np.linalg.norm(b))
    return float(np.linalg.norm(a - b) / scale) if scale > 0 else 0.0


def linear_map(source: PoissonChart, target: PoissonChart, J: np.ndarray) -> SmoothMap:
    J = np.asarray(J, dtype=float)
    return SmoothMap(source, target, lambda x: J @ x, lambda x: J)


def _dexp_right(alg: LieAlgebra, xi) -> np.ndarray:
    """Columns T_c -> g^{-1} dg/dxi^c for g = g0 exp(xi), as coefficient vectors."""
    return np.linalg.inv(fun_of_matrix(lam(0.5), alg.ad(np.asarray(xi))))


def momentum_generation_residual(chart: PoissonChart, x, T, which: str = "g") -> np.ndarray:
    """Discrepancy in the infinitesimal generation of the right action by (Omega+, Omega-).

    ``which="g"``:   <<(T,T), {g_ij, (O+,O-)} (O+,O-)^{-1}>>_nu - (g T)_ij
    ``which="Omega"``: same with Omega_ij and [Omega, T]_ij.
    The pairing on g + g is (1/2nu)(<X1, X2> - <Y1, Y2>).  Brackets with
    Omega+- are obtained from the chart bracket with Omega through the exact
    differential of the Gauss factorization, dO+- = O+- R+-(O+^{-1} dOmega O-).
    """
    if chart.kind != "heisenberg":
        raise ValueError("momentum generation is checked on the heisenberg chart")
    alg = chart.algebra
    nu = chart.params["nu"]
    d = alg.dim
    T = np.asarray(T, dtype=float)
    x = np.asarray(x, dtype=float)
    xi, w = x[:d], x[d:]
    g0 = chart.base_point
    g = g0 @ scipy.linalg.expm(alg.to_matrix(xi))
    Omega = scipy.linalg.expm(alg.to_matrix(w))
    Op, Om = factorize_G_star(Omega)
    Rp, Rm = standard_R_plus_minus(alg)
    P = chart.bivector(x)
    # d g / d xi^c = g T'_c, d Omega / d w^e = Omega T''_e
    Dg = _dexp_right(alg, xi)
    DO = _dexp_right(alg, w)
    if which == "g":
        tang = [g @ alg.to_matrix(Dg[:, c]) for c in range(d)]
        Pblk = P[:d, d:]
        target = g @ alg.to_matrix(T)
    elif which == "Omega":
        tang = [Omega @ alg.to_matrix(DO[:, c]) for c in range(d)]
        Pblk = P[d:, d:]
        target = Omega @ alg.to_matrix(T) - alg.to_matrix(T) @ Omega
    else:
        raise ValueError("which must be 'g' or 'Omega'")
    tangO = [Omega @ alg.to_matrix(DO[:, e]) for e in range(d)]
    Opi = np.linalg.inv(Op)
    Omi = np.linalg.inv(Om)
    gram = alg.bilinear_form
    n = alg.n
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            # {F_ij, Omega} as an n x n matrix
            coef = np.array([t[i, j] for t in tang]).real
            dOmega = sum(c * tangO[e] for e, c in enumerate(coef @ Pblk))
            Z = alg.coeffs_of(Opi @ dOmega @ Om).real
            Xp = alg.coeffs_of(Op @ alg.to_matrix(Rp @ Z) @ Opi).real
            Xm = alg.coeffs_of(Om @ alg.to_matrix(Rm @ Z) @ Omi).real
            val = (T @ gram @ Xp - T @ gram @ Xm) / (2 * nu)
            out[i, j] = val - target[i, j].real
    return out


def groupoid_iso_check(nu: float, algebra: LieAlgebra, x, base_point=None,
                       K_sign: float = 1.0, exponent: float | None = None) -> dict:
    """Poisson-map residual of (m~, g, m) -> (2 nu m~, g, 2 nu m).

    ``K_sign=-1`` flips the sign of the canonical K (falsification control);
    ``exponent`` replaces 2 nu in the map.
    """
    src = build_chart("wznw_groupoid", algebra, nu=nu, base_point=base_point)
    tgt = build_chart("canonical_groupoid", algebra, nu=nu, base_point=base_point, K_scale=K_sign)
    d = algebra.dim
    c = 2 * nu if exponent is None else exponent
    J = np.diag(np.concatenate([np.full(d, c), np.ones(d), np.full(d, c)]))
    res = poisson_map_residual(linear_map(src, tgt, J), x)
    return {"residual": float(np.linalg.norm(res)), "matrix": res}
