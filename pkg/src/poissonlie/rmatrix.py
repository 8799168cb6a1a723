"""Constant and dynamical r-matrices and Yang-Baxter type residuals.

Tensors are coefficient arrays in the algebra basis: ``r = r[a, b] T_a (x) T_b``.
Under the form identification ``X (x) Y -> X <Y, .>`` the operator of a
two-tensor acting on coefficient vectors is ``r @ g`` (``g`` the Gram
matrix), and a dim x dim operator ``F`` becomes the tensor ``F @ g^{-1}``.

Dynamical r-matrices are functions of a log-coordinate of a group variable:

=====================  ============================  ===============================
kind                   group variable                tensor as operator
=====================  ============================  ===============================
``K_nu_of_M``          M = exp(m)                    f_nu(ad_m)
``exchange_r``         M = exp(m)                    R^nu + f_nu(ad_m)
``K_can_of_Omega``     Omega = exp(w)                -f_{1/(4 nu)}(ad_w)
``K_compact_of_Omega`` Omega = exp(2i w), w in su(n) (1/theta) f_{i theta}(ad_w / theta)
=====================  ============================  ===============================
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .liealg import GroupElement, LieAlgebra, LieAlgebraError, positive_roots
from .matfun import (
    ScalarFunction,
    f_nu,
    frechet_of_matrix,
    fun_of_matrix,
    lam,
    mat_log_principal,
)

__all__ = [
    "TwoTensor",
    "ThreeTensor",
    "DynamicalRMatrix",
    "DerivativeRouteError",
    "constant_r",
    "f_hat",
    "cyclic_sum",
    "bracket_12_23",
    "dynamical_K",
    "cdybe_residual",
    "mcybe_residual",
    "factorize_G_star",
    "standard_R_plus_minus",
    "hermitian_log",
    "default_rhs",
]

ROUTE_AGREEMENT = 1e-7
ROUTE_FAULT = 1e-6


class DerivativeRouteError(RuntimeError):
    """Exact chain-rule and finite-difference derivatives disagree."""


@dataclass(frozen=True, eq=False)
class TwoTensor:
    parent: LieAlgebra
    coeffs: np.ndarray

    @property
    def operator(self) -> np.ndarray:
        return self.coeffs @ self.parent.bilinear_form

    @classmethod
    def from_operator(cls, alg: LieAlgebra, F) -> TwoTensor:
        return cls(alg, np.asarray(F) @ alg.form_inv)

    def antisymmetry_residual(self) -> float:
        return float(np.abs(self.coeffs + self.coeffs.T).max())

    def __add__(self, other):
        return TwoTensor(self.parent, self.coeffs + other.coeffs)

    def __mul__(self, s):
        return TwoTensor(self.parent, s * self.coeffs)

    __rmul__ = __mul__

    def transformed(self, Ad: np.ndarray) -> TwoTensor:
        """(Ad (x) Ad) r for an adjoint-action matrix on coefficients."""
        return TwoTensor(self.parent, Ad @ self.coeffs @ Ad.T)


@dataclass(frozen=True, eq=False)
class ThreeTensor:
    parent: LieAlgebra
    coeffs: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __sub__(self, other):
        return ThreeTensor(self.parent, self.coeffs - other.coeffs)

    def __add__(self, other):
        return ThreeTensor(self.parent, self.coeffs + other.coeffs)

    def __mul__(self, s):
        return ThreeTensor(self.parent, s * self.coeffs)

    __rmul__ = __mul__


def cyclic_sum(X: np.ndarray) -> np.ndarray:
    """X + (cyclic permutation of tensor slots) + (its square)."""
    return X + np.transpose(X, (1, 2, 0)) + np.transpose(X, (2, 0, 1))


def bracket_12_23(alg: LieAlgebra, r, s) -> np.ndarray:
    """Coefficients of [r_12, s_23] = r^{ia} s^{bk} T_i (x) [T_a, T_b] (x) T_k."""
    return np.einsum("ia,abj,bk->ijk", r, alg.structure_constants, s)


def f_hat(alg: LieAlgebra) -> ThreeTensor:
    """f_ab^c T^a (x) T^b (x) T_c with indices raised by the inverse form."""
    gi = alg.form_inv
    return ThreeTensor(alg, np.einsum("pa,qb,abc->pqc", gi, gi, alg.structure_constants))


def constant_r(alg: LieAlgebra, kind: str = "standard_split", scale: float = 1.0) -> TwoTensor:
    """Standard split R on sl(n) or the compact R^i on su(n).

    ``standard_split`` at unit scale acts as +1/2 on positive root vectors,
    -1/2 on negative ones and 0 on the Cartan subalgebra.  ``compact_Ri`` is
    ``sum_a |a|^2/4 (E_a - F_a) ^ i(E_a + F_a)`` in the compact basis.
    """
    npos = len(positive_roots(alg.n))
    d = alg.dim
    r = np.zeros((d, d))
    if kind == "standard_split":
        if alg.kind != "sl_split":
            raise LieAlgebraError("standard_split needs an sl_split algebra")
        for p in range(npos):
            e, f = p, d - npos + p
            # |alpha|^2 = 2 in the trace normalization
            r[e, f] += 0.5
            r[f, e] -= 0.5
    elif kind == "compact_Ri":
        if alg.kind != "su_compact":
            raise LieAlgebraError("compact_Ri needs an su_compact algebra")
        for p in range(npos):
            x1, x2 = p, npos + p
            # (E - F) ^ i(E + F) = x2 (x) x1 - x1 (x) x2, times |alpha|^2/4 = 1/2
            r[x2, x1] += 0.5
            r[x1, x2] -= 0.5
    else:
        raise LieAlgebraError(f"unsupported constant r-matrix kind {kind!r}")
    return TwoTensor(alg, scale * r)


def mcybe_residual(R: TwoTensor, nu: complex) -> float:
    """|| [R_12, R_23] + cycl. + nu^2 f_hat ||."""
    alg = R.parent
    lhs = cyclic_sum(bracket_12_23(alg, R.coeffs, R.coeffs))
    res = lhs + (nu ** 2) * f_hat(alg).coeffs
    return float(np.linalg.norm(res))


def hermitian_log(P) -> np.ndarray:
    """Logarithm of a Hermitian positive-definite matrix."""
    P = np.asarray(P)
    P = (P + P.conj().T) / 2
    w, U = np.linalg.eigh(P)
    if w.min() <= 0:
        raise LieAlgebraError("matrix is not positive definite")
    return (U * np.log(w)) @ U.conj().T


@dataclass(frozen=True, eq=False)
class DynamicalRMatrix:
    """A dynamical r-matrix as a function of one group variable.

    ``param`` is nu for the split kinds and theta for ``K_compact_of_Omega``.
    ``constant`` is the constant r-matrix that accompanies it in the Yang-Baxter
    type equations (R^nu for ``exchange_r``, R for ``K_can_of_Omega``, R^i for
    the compact kind).
    """

    kind: str
    param: complex
    algebra: LieAlgebra
    constant: TwoTensor | None = None
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("K_nu_of_M", "K_can_of_Omega", "K_compact_of_Omega", "exchange_r"):
            raise ValueError(f"unknown dynamical r-matrix kind {self.kind!r}")
        if self.kind == "exchange_r" and self.constant is None:
            raise ValueError("exchange_r needs its constant part R^nu")

    # the dynamical part as f(ad_{c * y}) with y the log coordinate
    @property
    def function(self) -> tuple[ScalarFunction, float, float]:
        """(f, inner, outer) with operator = outer * f(ad_{inner * y})."""
        if self.kind in ("K_nu_of_M", "exchange_r"):
            return f_nu(self.param), 1.0, self.scale
        if self.kind == "K_can_of_Omega":
            return f_nu(1.0 / (4.0 * self.param)), 1.0, -self.scale
        th = self.param
        return ScalarFunction("f_nu_compact", param=th), 1.0 / th, self.scale / th

    def log_coords(self, X) -> np.ndarray:
        """Log coordinate of a group element (matrix or GroupElement)."""
        G = X.matrix if isinstance(X, GroupElement) else np.asarray(X)
        if self.kind == "K_compact_of_Omega":
            c = self.algebra.coeffs_of(-0.5j * hermitian_log(G))
            return np.real(c)
        return mat_log_principal(G, self.algebra).coeffs

    def group_element(self, y) -> np.ndarray:
        Y = self.algebra.to_matrix(y)
        if self.kind == "K_compact_of_Omega":
            return scipy.linalg.expm(2j * Y)
        return scipy.linalg.expm(Y)

    def dynamical_operator(self, y) -> np.ndarray:
        f, inner, outer = self.function
        return outer * fun_of_matrix(f, self.algebra.ad(inner * np.asarray(y)))

    def operator(self, y) -> np.ndarray:
        F = self.dynamical_operator(y)
        if self.kind == "exchange_r":
            F = F + self.constant.operator
        return F

    def tensor(self, y) -> TwoTensor:
        return TwoTensor.from_operator(self.algebra, self.operator(y))

    def __call__(self, X) -> TwoTensor:
        return self.tensor(self.log_coords(X))

    def d_operator(self, y, dy) -> np.ndarray:
        """Derivative of the operator along dy in the log coordinate."""
        f, inner, outer = self.function
        alg = self.algebra
        return outer * frechet_of_matrix(f, alg.ad(inner * np.asarray(y)),
                                         alg.ad(inner * np.asarray(dy)))

    def d_log(self, y, left, right) -> np.ndarray:
        """Velocity of the log coordinate along X_t = e^{t*left} X e^{t*right}.

        ``left``/``right`` are coefficient vectors of the generators; for the
        compact kind they may be complex (elements of sl(n, C) written in the
        compact basis).
        """
        alg = self.algebra
        y = np.asarray(y)
        z = 2j * y if self.kind == "K_compact_of_Omega" else y
        A = alg.ad(z)
        v = (fun_of_matrix(lam(-0.5), A) @ np.asarray(left)
             + fun_of_matrix(lam(0.5), A) @ np.asarray(right))
        if self.kind == "K_compact_of_Omega":
            v = v / 2j
        if alg.is_real:
            if np.abs(np.imag(v)).max(initial=0) > 1e-9 * (1 + np.abs(v).max(initial=0)):
                raise LieAlgebraError("curve leaves the log-coordinate domain")
            v = np.real(v)
        return v

    def d_tensor_exact(self, y, left, right) -> np.ndarray:
        dy = self.d_log(y, left, right)
        return self.d_operator(y, dy) @ self.algebra.form_inv

    def d_tensor_fd(self, y, left, right, h: float = 1e-5) -> np.ndarray:
        alg = self.algebra
        X = self.group_element(y)
        Lm = alg.to_matrix(left)
        Rm = alg.to_matrix(right)

        def at(t):
            Xt = scipy.linalg.expm(t * Lm) @ X @ scipy.linalg.expm(t * Rm)
            return self.tensor(self.log_coords(Xt)).coeffs

        return (at(h) - at(-h)) / (2 * h)


def dynamical_K(kind: str, param, X, algebra: LieAlgebra, constant: TwoTensor | None = None) -> TwoTensor:
    """Evaluate a dynamical r-matrix at a group element."""
    return DynamicalRMatrix(kind, param, algebra, constant)(X)


def _directions(rmat: DynamicalRMatrix, form: str):
    """(left, right) generator pairs for the derivative term of each equation.

    Returns, for each basis index a, a list of (coefficient, left, right)
    whose sum is the differential operator applied to the dynamical part in
    slot 2-3 with T^a in slot 1.
    """
    alg = rmat.algebra
    d = alg.dim
    eye = np.eye(d)
    out = []
    for a in range(d):
        Ta = eye[a]
        if form == "PL_CDYBE_wz":
            # -1/2 D^+_{T_a}
            out.append([(-0.5, Ta, Ta)])
        elif form == "G_CDYBE":
            # 1/2 D^+_{T_a} + r_a^b D^-_b, with r_a^b T_b = -r(T_a)
            out.append([(0.5, Ta, Ta), (-1.0, "r", Ta)])
        elif form == "PL_CDYBE_can":
            RTa = rmat.constant.operator @ Ta
            # 1/2 D^+_{T_a} - D^-_{R T_a};  D^-_X = R_X - L_X
            out.append([(0.5, Ta, Ta), (-1.0, -RTa, RTa)])
        elif form == "PL_CDYBE_compact":
            RTa = rmat.constant.operator @ Ta
            # D^+_{i T_a} - D^-_{R^i T_a}  ==  curve e^{t(iX + RX)} . e^{t(iX - RX)}
            out.append([(1.0, 1j * Ta + RTa, 1j * Ta - RTa)])
        else:
            raise ValueError(f"unknown equation form {form!r}")
    return out


def _derivative_term(rmat: DynamicalRMatrix, form: str, y, route: str, h: float):
    alg = rmat.algebra
    d = alg.dim
    D = np.zeros((d, d, d))
    full = rmat.operator(y) if form == "G_CDYBE" else None
    for a, terms in enumerate(_directions(rmat, form)):
        acc = np.zeros((d, d))
        for coef, left, right in terms:
            if isinstance(left, str):
                # r_a^b D^-_b = -D^-_{r(T_a)} with the full exchange r
                X = full @ right
                left, right, coef = -X, X, coef
            if route == "exact":
                acc += coef * np.real_if_close(rmat.d_tensor_exact(y, left, right))
            else:
                acc += coef * np.real_if_close(rmat.d_tensor_fd(y, left, right, h))
        D[a] = acc
    # T^a in slot 1
    return np.einsum("pa,aqr->pqr", alg.form_inv, D)


def cdybe_residual(form: str, rmat: DynamicalRMatrix, X, rhs: ThreeTensor | np.ndarray,
                   route: str = "exact", h: float = 1e-5, check_routes: bool = False,
                   y=None) -> ThreeTensor:
    """LHS - RHS of a classical dynamical Yang-Baxter type equation.

    ``form`` is one of ``G_CDYBE`` (full exchange r, rhs -f_hat/4),
    ``PL_CDYBE_wz`` (K^nu), ``PL_CDYBE_can`` (canonical K with the unit-scale
    split R) or ``PL_CDYBE_compact`` (compact K with R^i).  ``X`` is the group
    element; pass the log coordinate as ``y`` instead to skip the logarithm.
    With ``check_routes`` the finite-difference derivative is also computed and
    a :class:`DerivativeRouteError` is raised if the routes disagree.
    """
    alg = rmat.algebra
    if y is None:
        y = rmat.log_coords(X)
    y = np.asarray(y)
    if form in ("G_CDYBE",):
        r = rmat.tensor(y).coeffs
    elif form == "PL_CDYBE_wz":
        r = TwoTensor.from_operator(alg, rmat.dynamical_operator(y)).coeffs
    else:
        r = rmat.constant.coeffs + TwoTensor.from_operator(alg, rmat.dynamical_operator(y)).coeffs
    quad = cyclic_sum(bracket_12_23(alg, r, r))
    deriv = _derivative_term(rmat, form, y, route, h)
    if check_routes:
        other = _derivative_term(rmat, form, y, "fd" if route == "exact" else "exact", h)
        gap = float(np.abs(deriv - other).max())
        if gap > ROUTE_FAULT:
            raise DerivativeRouteError(f"exact and finite-difference derivatives differ by {gap:.3e}")
    rhs = rhs.coeffs if isinstance(rhs, ThreeTensor) else np.asarray(rhs)
    return ThreeTensor(alg, np.real_if_close(quad + cyclic_sum(deriv) - rhs))


def default_rhs(form: str, rmat: DynamicalRMatrix, source: str = "derived") -> ThreeTensor:
    """Right-hand side multiple of f_hat for each equation.

    ``source="derived"`` gives the constant the shipped solution actually
    attains; ``source="stated"`` gives the commonly stated constant for the compact
    case, (1/(16 theta^2) - 3/4) f_hat, which differs (see README).
    """
    fh = f_hat(rmat.algebra)
    p = rmat.param
    if form == "G_CDYBE":
        c = -0.25
    elif form == "PL_CDYBE_wz":
        c = 0.25 - p ** 2
    elif form == "PL_CDYBE_can":
        # K = -f_{nu'}(ad_w) with nu' = 1/(4 nu) solves it with -nu'^2 f_hat
        c = -1.0 / (16.0 * p ** 2)
    elif form == "PL_CDYBE_compact":
        c = 1.0 / (16.0 * p ** 2) - 0.75 if source == "stated" else -1.0 / (4.0 * p ** 2)
    else:
        raise ValueError(f"unknown equation form {form!r}")
    return fh * c


def standard_R_plus_minus(alg: LieAlgebra, R: TwoTensor | None = None):
    """Operators R^+ = R + 1/2 and R^- = R - 1/2 on coefficient vectors."""
    R = R if R is not None else constant_r(alg)
    I = np.eye(alg.dim)
    return R.operator + 0.5 * I, R.operator - 0.5 * I


def factorize_G_star(Omega, tol: float = 1e-12):
    """Gauss factorization Omega = Omega_plus Omega_minus^{-1} for the standard R.

    Omega_plus is upper triangular with diagonal d^{1/2}, Omega_minus lower
    triangular with diagonal d^{-1/2}, where Omega = U d L with U upper and L
    lower unitriangular.  Principal square roots are used for d.
    """
    G = Omega.matrix if isinstance(Omega, GroupElement) else np.asarray(Omega)
    n = G.shape[0]
    # U d L of G is the L d U of the index-reversed matrix
    P = np.eye(n)[::-1]
    Lw = np.eye(n, dtype=np.result_type(G, float))
    Uw = np.array(P @ G @ P, dtype=np.result_type(G, float))
    scale = np.abs(G).max()
    for k in range(n):
        if abs(Uw[k, k]) <= tol * scale:
            raise LieAlgebraError("a trailing principal minor vanishes; outside G_*")
        for i in range(k + 1, n):
            Lw[i, k] = Uw[i, k] / Uw[k, k]
            Uw[i, k:] -= Lw[i, k] * Uw[k, k:]
            Uw[i, k] = 0.0
    dw = np.diag(Uw).copy()
    upper = P @ Lw @ P
    lower = P @ (Uw / dw[:, None]) @ P
    d = dw[::-1]
    sq = np.sqrt(d.astype(complex))
    if np.isrealobj(G) and np.all(d > 0):
        sq = sq.real
    return upper * sq[None, :], np.linalg.inv(sq[:, None] * lower)
