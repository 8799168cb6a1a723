"""The compact case: sl(n, C) as the double of su(n) with the Borel group as dual.

Conventions: ``a = g^{-1} b~ = b g~`` with ``g, g~`` in SU(n) and ``b, b~``
upper triangular with positive diagonal; ``Omega = a a^dagger = b b^dagger
= exp(2i omega)`` with ``omega`` in su(n).  Pairings on the double are
``Im tr(XY)`` (theta = 1) unless stated otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .liealg import GroupElement, LieAlgebraError, RealifiedDouble, build_algebra
from .matfun import _chi_coeffs, chi, fun_of_matrix, lam, logm_principal
from .poisson import build_chart, linear_map, poisson_map_residual, relative_map_residual
from .rmatrix import (
    DynamicalRMatrix,
    ThreeTensor,
    TwoTensor,
    bracket_12_23,
    constant_r,
    cyclic_sum,
    default_rhs,
    hermitian_log,
)

__all__ = [
    "IwasawaFactors",
    "CartanCoords",
    "iwasawa_cartan",
    "b_from_Omega",
    "a_from_g_b",
    "chi_imag",
    "IDENTITIES",
    "double_identity_residual",
    "borel_gradient_residual",
    "double_bracket_residual",
    "probe",
    "sklyanin_value",
    "derivative_transfer_residual",
    "omega_t_consistency",
    "borel_plcdybe_residual",
    "monodromy_map_check",
    "ri_realizations_gap",
]

COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class IwasawaFactors:
    a: np.ndarray
    g: np.ndarray
    g_tilde: np.ndarray
    b: np.ndarray
    b_tilde: np.ndarray

    def residual(self) -> float:
        gi = np.linalg.inv(self.g)
        return float(max(np.abs(gi @ self.b_tilde - self.a).max(),
                         np.abs(self.b @ self.g_tilde - self.a).max()))


@dataclass(frozen=True, eq=False)
class CartanCoords:
    Omega: np.ndarray
    omega: np.ndarray          # coefficients in the su(n) basis


def _positive_diag(U):
    ph = np.diag(U) / np.abs(np.diag(U))
    return ph


def _rq_positive(a):
    """a = b q with b upper triangular (positive diagonal) and q unitary."""
    b, q = scipy.linalg.rq(a)
    ph = _positive_diag(b)
    return b / ph[None, :], ph[:, None] * q


def _qr_positive(a):
    """a = q b with q unitary and b upper triangular with positive diagonal."""
    q, b = np.linalg.qr(a)
    ph = _positive_diag(b)
    return q * ph[None, :], b / ph[:, None]


def iwasawa_cartan(a, su=None) -> tuple[IwasawaFactors, CartanCoords]:
    """Iwasawa factors of ``a`` in SL(n, C) and the Cartan coordinate omega."""
    a = a.matrix if isinstance(a, GroupElement) else np.asarray(a, dtype=complex)
    n = a.shape[0]
    if abs(np.linalg.det(a) - 1) > 1e-9:
        raise LieAlgebraError("a must have unit determinant")
    if np.linalg.cond(a) > COND_LIMIT:
        raise LieAlgebraError("a is too ill-conditioned for the Iwasawa decomposition")
    su = su if su is not None else build_algebra("su_compact", n - 1)
    b, g_tilde = _rq_positive(a)
    ginv, b_tilde = _qr_positive(a)
    Omega = a @ a.conj().T
    omega = su.coeffs_of(-0.5j * hermitian_log(Omega)).real
    return (IwasawaFactors(a, np.linalg.inv(ginv), g_tilde, b, b_tilde),
            CartanCoords(Omega, omega))


def b_from_Omega(Omega) -> np.ndarray:
    """The Borel b with b b^dagger = Omega (reversed-order Cholesky)."""
    Omega = np.asarray(Omega, dtype=complex)
    P = np.eye(Omega.shape[0])[::-1]
    L = np.linalg.cholesky(P @ Omega @ P)
    return P @ L @ P


def a_from_g_b(g, b) -> np.ndarray:
    """The element a with Iwasawa coordinates (g, b)."""
    # g a = g b g~ = b~ is upper triangular: g b = b~ g~^{-1}
    _, q = _rq_positive(np.asarray(g) @ np.asarray(b))
    return np.asarray(b) @ np.linalg.inv(q)


def chi_imag(z):
    """chi(i z) = z cot z, summed as a series near 0."""
    z = np.asarray(z, dtype=complex)
    c = _chi_coeffs() * (-1.0) ** np.arange(len(_chi_coeffs()))
    small = np.abs(z) < 1.0
    out = np.empty_like(z)
    zs = z[small] ** 2
    acc = np.zeros_like(zs)
    for cn in c[::-1]:
        acc = acc * zs + cn
    out[small] = acc
    zb = z[~small]
    out[~small] = zb / np.tan(zb)
    return out


@lru_cache(maxsize=None)
def _double(n: int) -> RealifiedDouble:
    return build_algebra("realified_double", n - 1)


def ri_realizations_gap(su) -> float:
    """R^i as the wedge tensor vs. the operator i(Y + Y^dagger) -> Y^dagger - Y."""
    D = _double(su.n)
    Rop = constant_r(su, "compact_Ri").operator
    M = D.b_to_g_matrix
    cols = [su.coeffs_of(Y.conj().T - Y).real for Y in D.borel_matrices]
    Rop2 = np.array(cols).T @ np.linalg.inv(M)
    return float(np.abs(Rop - Rop2).max())


IDENTITIES = {
    "ri_on_borel": "R^i(i(Y + Y^dagger)) = Y^dagger - Y for Y in the Borel algebra",
    "borel_split": "Z = i grad + R^i(grad) with grad = -(i/2)(Z + Z^dagger)",
    "pairing_conjugation": "4<<alpha, g beta g^-1>> in terms of the su(n) trace form",
    "lambda_chi_transfer": "i lambda(-ad_{i omega}) Y + i lambda(ad_{i omega}) Y^dagger "
                           "= -[omega, R^i X] + chi(ad_{i omega}) X",
    "ri_projection": "R^i(X) = pi_g(-i X)",
}


def double_identity_residual(ident: str, su, rng=None, **inputs) -> float:
    """Residual of one of the exact linear-algebra identities of the double.

    Inputs are drawn from ``rng`` when not supplied: ``Y`` (Borel matrix),
    ``X`` (su(n) matrix), ``alpha``, ``beta`` (Borel), ``g`` (SU(n)),
    ``omega`` (su(n) coefficients).
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    D = _double(su.n)
    d = su.dim
    Rop = constant_r(su, "compact_Ri").operator

    def rand_borel():
        return np.tensordot(rng.uniform(-1, 1, d), D.borel_matrices, axes=(0, 0))

    def rand_su():
        return su.to_matrix(rng.uniform(-1, 1, d))

    def Ri(X):
        return su.to_matrix(Rop @ su.coeffs_of(X).real)

    dag = lambda Z: np.asarray(Z).conj().T

    if ident == "ri_on_borel":
        Y = inputs.get("Y", rand_borel())
        return float(np.abs(Ri(1j * (Y + dag(Y))) - (dag(Y) - Y)).max())
    if ident == "borel_split":
        # any B-valued Z with grad = -(i/2)(Z + Z^dagger) satisfies Z = i grad + R^i(grad)
        Z = inputs.get("Y", rand_borel())
        grad = -0.5j * (Z + dag(Z))
        return float(np.abs(1j * grad + Ri(grad) - Z).max())
    if ident == "pairing_conjugation":
        al = inputs.get("alpha", rand_borel())
        be = inputs.get("beta", rand_borel())
        g = inputs.get("g", scipy.linalg.expm(rand_su()))
        gi = dag(g)
        lhs = 4 * D.pairing(al, g @ be @ gi, 1.0)
        rhs = (np.trace(1j * (be + dag(be)) @ gi @ (dag(al) - al) @ g)
               + np.trace(1j * (al + dag(al)) @ g @ (dag(be) - be) @ gi))
        return float(abs(lhs - rhs))
    if ident == "lambda_chi_transfer":
        Y = inputs.get("Y", rand_borel())
        w = np.asarray(inputs.get("omega", rng.uniform(-0.3, 0.3, d)))
        X = 1j * (Y + dag(Y))
        A = 1j * su.ad(w)                    # ad_{i omega} on complex coefficients
        cY = su.coeffs_of(Y, complexify=True)
        cYd = su.coeffs_of(dag(Y), complexify=True)
        cX = su.coeffs_of(X).real
        lhs = 1j * fun_of_matrix(lam(-1.0), A) @ cY + 1j * fun_of_matrix(lam(1.0), A) @ cYd
        rhs = -su.ad(w) @ (Rop @ cX) + fun_of_matrix(chi(1.0), A) @ cX
        return float(np.abs(lhs - rhs).max())
    if ident == "ri_projection":
        X = inputs.get("X", rand_su())
        return float(np.abs(Ri(X) - D.pi_g(-1j * X)).max())
    raise ValueError(f"unknown identity {ident!r}")


def _borel_exp(D, c):
    return scipy.linalg.expm(np.tensordot(c, D.borel_matrices, axes=(0, 0)))


def borel_gradient_residual(su, b, T1, T2, h: float = 1e-5) -> tuple[float, float]:
    """Spot checks of the closed forms for D_b f and b (D'_b f) b^{-1}.

    The probe is f(b) = <w, T1> + <w, T2>^2 with b b^dagger = exp(2i w); its
    gradient is d f = T1 + 2 <w, T2> T2.  D and D' are computed from central
    differences along e^{tY} b and b e^{tY}, Y in the Borel part.
    """
    D = _double(su.n)
    d = su.dim
    G = su.bilinear_form
    T1, T2 = np.asarray(T1, float), np.asarray(T2, float)

    def w_of(bb):
        return su.coeffs_of(-0.5j * hermitian_log(bb @ bb.conj().T)).real

    def f(bb):
        w = w_of(bb)
        return w @ G @ T1 + (w @ G @ T2) ** 2

    cL, cR = np.zeros(d), np.zeros(d)
    for k in range(d):
        E_p, E_m = _borel_exp(D, h * np.eye(d)[k]), _borel_exp(D, -h * np.eye(d)[k])
        cL[k] = (f(E_p @ b) - f(E_m @ b)) / (2 * h)
        cR[k] = (f(b @ E_p) - f(b @ E_m)) / (2 * h)
    # <<X_j, Y_k>> over X_j in su(n), Y_k in Borel
    W = D.gram[:d, d:]
    Db = np.linalg.solve(W.T, cL)            # coefficients in su(n)
    Dpb = np.linalg.solve(W.T, cR)
    w = w_of(b)
    grad = T1 + 2 * (w @ G @ T2) * T2
    Rop = constant_r(su, "compact_Ri").operator
    A = su.ad(w)
    chiA = fun_of_matrix(chi(1j), A)
    a20 = (-Rop @ A + chiA) @ grad
    lhs21 = b @ su.to_matrix(Dpb) @ np.linalg.inv(b)
    rhs21 = 1j * su.to_matrix(A @ grad) + su.to_matrix(chiA @ grad)
    return float(np.abs(Db - a20).max()), float(np.abs(lhs21 - rhs21).max())


def probe(kind: str, su, T=None, ij=(0, 0)):
    """Probe functions p(g, omega): the entry g[ij] (complex) or <omega, T>."""
    if kind == "g":
        return lambda g, w: g[tuple(ij)]
    if kind != "omega":
        raise ValueError(f"unknown probe kind {kind!r}")
    G = su.bilinear_form
    T = np.asarray(T, float)
    return lambda g, w: float(w @ G @ T)


def double_bracket_residual(a, theta: float, probe1, probe2, su=None, h: float = 1e-5,
                    base_point=None) -> dict:
    """Bracket of two probes via the double's r-matrix and via the compact_heisenberg chart.

    Route (i): {P, Q} = -theta [<<DP, rho DQ>> + <<D'P, rho D'Q>>] with D, D'
    the pairing-gradients along e^{tX} a and a e^{tX} (central differences over
    a real basis of the double) and rho = (pi_g - pi_B)/2.
    Route (ii): grad P . Pi . grad Q in the compact_heisenberg chart.
    Probes are functions ``p(g, omega_coeffs)``.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    su = su if su is not None else build_algebra("su_compact", n - 1)
    D = _double(n)
    d = su.dim

    def coords(aa):
        fac, cart = iwasawa_cartan(aa, su)
        return fac.g, cart.omega

    def ev(p, aa):
        g, w = coords(aa)
        return p(g, w)

    basis = D.real_basis
    cP, cQ, cPp, cQp = (np.zeros(2 * d, dtype=complex) for _ in range(4))
    for k in range(2 * d):
        Ep, Em = scipy.linalg.expm(h * basis[k]), scipy.linalg.expm(-h * basis[k])
        for p, cl, cr in ((probe1, cP, cPp), (probe2, cQ, cQp)):
            cl[k] = (ev(p, Ep @ a) - ev(p, Em @ a)) / (2 * h)
            cr[k] = (ev(p, a @ Ep) - ev(p, a @ Em)) / (2 * h)
    W = D.gram
    Pm = np.diag(np.r_[np.full(d, 0.5), np.full(d, -0.5)])
    Wi = np.linalg.inv(W)
    route1 = -theta * (cP @ Pm @ Wi @ cQ + cPp @ Pm @ Wi @ cQp)

    g, w = coords(a)
    g0 = g if base_point is None else np.asarray(base_point)
    chart = build_chart("compact_heisenberg", su, theta=theta, base_point=g0)
    xi = su.coeffs_of(logm_principal(np.linalg.inv(g0) @ g)).real if base_point is not None \
        else np.zeros(d)
    x0 = np.r_[xi, w]

    def in_chart(p, x):
        gg = g0 @ scipy.linalg.expm(su.to_matrix(x[:d]))
        return p(gg, x[d:])

    def grad(p):
        out = np.zeros(2 * d, dtype=complex)
        for k in range(2 * d):
            e = np.zeros(2 * d)
            e[k] = h
            out[k] = (in_chart(p, x0 + e) - in_chart(p, x0 - e)) / (2 * h)
        return out

    route2 = grad(probe1) @ chart.bivector(x0) @ grad(probe2)
    return {"route_double": complex(route1), "route_chart": complex(route2),
            "difference": float(abs(route1 - route2))}


def sklyanin_value(g, theta: float, su, ij1, ij2) -> complex:
    """theta [g_1 g_2, R^i] at the entries (ij1, ij2): the bracket {g_ij1, g_ij2}."""
    Ri = constant_r(su, "compact_Ri").coeffs
    L = np.einsum("ij,ajk->aik", g, su.matrices)
    Rt = np.einsum("aij,jk->aik", su.matrices, g)
    (i, j), (k, l) = ij1, ij2
    val = np.einsum("ab,a,b->", Ri, L[:, i, j], L[:, k, l]) - np.einsum("ab,a,b->", Ri, Rt[:, i, j], Rt[:, k, l])
    return complex(theta * val)


def omega_t_consistency(su, b, X, t: float = 0.1) -> float:
    """|| Omega_t^X - b_t b_t^dagger ||, b_t = e^{-2Yt} b, X = i(Y + Y^dagger)."""
    D = _double(su.n)
    Xm = su.to_matrix(X)
    Y = D.borel_from_compact(Xm)
    RX = su.to_matrix(constant_r(su, "compact_Ri").operator @ np.asarray(X, float))
    Omega = b @ b.conj().T
    Om_t = scipy.linalg.expm(t * (1j * Xm + RX)) @ Omega @ scipy.linalg.expm(t * (1j * Xm - RX))
    bt = scipy.linalg.expm(-2 * Y * t) @ b
    return float(np.abs(Om_t - bt @ bt.conj().T).max())


def derivative_transfer_residual(F, su, b, X, h: float = 1e-5) -> float:
    """d/dt F(Omega_t^X) - d/dt F~(e^{-2Yt} b) with F~(b) = F(b b^dagger)."""
    D = _double(su.n)
    X = np.asarray(X, float)
    Xm = su.to_matrix(X)
    Y = D.borel_from_compact(Xm)
    RX = su.to_matrix(constant_r(su, "compact_Ri").operator @ X)
    Omega = b @ b.conj().T

    def Om(t):
        return scipy.linalg.expm(t * (1j * Xm + RX)) @ Omega @ scipy.linalg.expm(t * (1j * Xm - RX))

    def Bt(t):
        bt = scipy.linalg.expm(-2 * Y * t) @ b
        return bt @ bt.conj().T

    lhs = (F(Om(h)) - F(Om(-h))) / (2 * h)
    rhs = (F(Bt(h)) - F(Bt(-h))) / (2 * h)
    return float(abs(lhs - rhs))


def borel_plcdybe_residual(theta: float, b, su=None, h: float = 1e-5, K_scale: float = 1.0,
                             rhs: str | ThreeTensor = "derived") -> ThreeTensor:
    """[R^i + K~, R^i + K~] + T^a L_{T*_a} K~ + cycl. - I on the Borel group.

    K~(b) = K(b b^dagger); L_{T*_a} differentiates along e^{t T*_a} b with
    T*_a = -2 Y_a, T_a = i(Y_a + Y_a^dagger), the basis of the Borel part dual
    to su(n) under Im tr.
    """
    b = np.asarray(b, dtype=complex)
    su = su if su is not None else build_algebra("su_compact", b.shape[0] - 1)
    D = _double(su.n)
    d = su.dim
    Ri = constant_r(su, "compact_Ri")
    K = DynamicalRMatrix("K_compact_of_Omega", theta, su, constant=Ri)

    def Kt(bb):
        w = su.coeffs_of(-0.5j * hermitian_log(bb @ bb.conj().T)).real
        return K_scale * TwoTensor.from_operator(su, K.dynamical_operator(w)).coeffs

    Minv = np.linalg.inv(D.b_to_g_matrix)
    dK = np.zeros((d, d, d))
    for a in range(d):
        Ya = np.tensordot(Minv[:, a], D.borel_matrices, axes=(0, 0))
        Ts = -2 * Ya
        dK[a] = (Kt(scipy.linalg.expm(h * Ts) @ b) - Kt(scipy.linalg.expm(-h * Ts) @ b)) / (2 * h)
    r = Ri.coeffs + Kt(b)
    lhs = cyclic_sum(bracket_12_23(su, r, r)) + cyclic_sum(np.einsum("pa,aqr->pqr", su.form_inv, dK))
    if isinstance(rhs, str):
        rhs = default_rhs("PL_CDYBE_compact", K, source=rhs)
    return ThreeTensor(su, lhs - rhs.coeffs)


def monodromy_map_check(theta: float, m, su, exponent: float | None = None) -> dict:
    """Poisson-map residual of omega = theta m, WZNW monodromy sector -> compact double."""
    src = build_chart("wznw_groupoid", su, theta=theta).restrict("m")
    tgt = build_chart("compact_heisenberg", su, theta=theta).restrict("omega")
    c = theta if exponent is None else exponent
    phi = linear_map(src, tgt, c * np.eye(su.dim))
    res = poisson_map_residual(phi, m)
    return {"residual": float(np.linalg.norm(res)), "relative": relative_map_residual(phi, m),
            "matrix": res}
