"""Scalar functions built from z coth z and functions of ad-operators.

Everything is assembled from ``chi(z) = z coth(z)``:

* ``lambda(z) = z e^z / sinh(z) = chi(z) + z``
* ``f_nu(z) = (chi(z/2) - chi(nu z)) / z``; ``f_0(z) = coth(z/2)/2 - 1/z``
* ``f_nu_compact`` is ``f_nu`` at imaginary ``nu = i theta``.

Small arguments go through the Bernoulli series of chi, so the removable
singularities at zero never lose digits to cancellation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
import scipy.linalg

from .liealg import AlgebraElement, GroupElement, LieAlgebra, LieAlgebraError

__all__ = [
    "ScalarFunction",
    "PoleError",
    "BranchCutError",
    "eval_scalar",
    "fun_of_matrix",
    "frechet_of_matrix",
    "analytic_of_ad",
    "mat_log_principal",
    "logm_principal",
    "dlog_directional",
    "chi",
    "lam",
    "f_nu",
]

SERIES_RADIUS = 1.0     # |w| below which chi(w) is summed as a series
N_SERIES = 24           # truncation error < (1/pi)^48 at the radius
POLE_MARGIN = 1e-3
COND_LIMIT = 1e8
TAYLOR_FRACTION = 0.5   # ||A|| / radius below which matrix functions use the series


class PoleError(ValueError):
    pass


class BranchCutError(ValueError):
    pass


@lru_cache(maxsize=None)
def _chi_coeffs() -> np.ndarray:
    """c_n with chi(w) = sum_n c_n w^(2n)."""
    # fixed working precision, so the rounded floats never depend on the caller's mpmath state
    with mpmath.workdps(40):
        return np.array([float(mpmath.bernoulli(2 * n) * mpmath.mpf(4) ** n / mpmath.factorial(2 * n))
                         for n in range(N_SERIES + 1)])


def _chi_series(w, deriv=False):
    c = _chi_coeffs()
    w2 = w * w
    if not deriv:
        out = np.zeros_like(w)
        for cn in c[::-1]:
            out = out * w2 + cn
        return out
    # chi'(w) = sum_{n>=1} 2n c_n w^(2n-1)
    out = np.zeros_like(w)
    for k in range(N_SERIES, 0, -1):
        out = out * w2 + 2 * k * c[k]
    return out * w


def _chi(w, deriv=False):
    w = np.asarray(w, dtype=complex)
    small = np.abs(w) < SERIES_RADIUS
    out = np.empty_like(w)
    out[small] = _chi_series(w[small], deriv)
    wb = w[~small]
    if deriv:
        s = np.sinh(wb)
        out[~small] = np.cosh(wb) / s - wb / (s * s)
    else:
        out[~small] = wb / np.tanh(wb)
    return out


def _fnu_series(z, nu, deriv=False):
    c = _chi_coeffs()
    k = np.arange(1, N_SERIES + 1)
    a = c[1:] * (0.25 ** k - nu ** (2 * k))     # coefficient of z^(2k-1)
    z2 = z * z
    out = np.zeros_like(z)
    if not deriv:
        for ak in a[::-1]:
            out = out * z2 + ak
        return out * z
    for kk, ak in zip(k[::-1], a[::-1]):
        out = out * z2 + (2 * kk - 1) * ak
    return out


@dataclass(frozen=True)
class ScalarFunction:
    """One of chi, lambda, f_nu, f_nu_compact, evaluated at ``scale * z``.

    ``param`` is nu for ``f_nu`` and theta for ``f_nu_compact``.
    """

    kind: str
    param: complex = 0.0
    scale: complex = 1.0

    def __post_init__(self):
        if self.kind not in ("chi", "lambda", "f_nu", "f_nu_compact"):
            raise ValueError(f"unknown scalar function {self.kind!r}")

    @property
    def nu(self) -> complex:
        return 1j * self.param if self.kind == "f_nu_compact" else self.param

    def scaled(self, s: complex) -> ScalarFunction:
        return ScalarFunction(self.kind, self.param, self.scale * s)

    def _base(self, w, deriv=False):
        w = np.asarray(w, dtype=complex)
        if self.kind == "chi":
            return _chi(w, deriv)
        if self.kind == "lambda":
            return _chi(w, deriv) + (1.0 if deriv else w)
        nu = self.nu
        small = np.maximum(np.abs(w) / 2, np.abs(nu * w)) < SERIES_RADIUS
        out = np.empty_like(w)
        out[small] = _fnu_series(w[small], nu, deriv)
        wb = w[~small]
        num = _chi(wb / 2) - _chi(nu * wb)
        if deriv:
            dnum = 0.5 * _chi(wb / 2, True) - nu * _chi(nu * wb, True)
            out[~small] = dnum / wb - num / (wb * wb)
        else:
            out[~small] = num / wb
        return out

    def __call__(self, z):
        return self._base(self.scale * np.asarray(z, dtype=complex))

    def derivative(self, z):
        return self.scale * self._base(self.scale * np.asarray(z, dtype=complex), deriv=True)

    def poles_near(self, z) -> complex | None:
        """Nearest pole to z, or None for an entire function."""
        scales = [1.0]
        if self.kind in ("f_nu", "f_nu_compact"):
            scales = [0.5] + ([self.nu] if self.nu != 0 else [])
        best = None
        for s in scales:
            s = s * self.scale
            # poles of chi(s z) at s z = i pi k, k != 0
            k0 = np.round(np.imag(s * z) / np.pi)
            for k in (k0 - 1, k0, k0 + 1):
                if k == 0:
                    continue
                p = 1j * np.pi * k / s
                if best is None or abs(p - z) < abs(best - z):
                    best = p
        return best

    @property
    def radius(self) -> float:
        """Radius of convergence of the Taylor series at 0."""
        scales = [1.0]
        if self.kind in ("f_nu", "f_nu_compact"):
            scales = [0.5] + ([self.nu] if self.nu != 0 else [])
        return float(min(np.pi / abs(s * self.scale) for s in scales))

    def check_poles(self, zs) -> None:
        for z in np.atleast_1d(zs):
            p = self.poles_near(z)
            if p is not None and abs(p - z) < POLE_MARGIN * (1 + abs(p)):
                raise PoleError(f"{self.kind} evaluated at {z:.6g}, too close to pole {p:.6g}")

    def taylor(self, order: int) -> np.ndarray:
        """Taylor coefficients a_0..a_order of z -> f(scale z)."""
        c = _chi_coeffs()
        a = np.zeros(order + 1, dtype=complex)
        s = self.scale
        if self.kind in ("chi", "lambda"):
            for n in range(0, min(N_SERIES, order // 2) + 1):
                a[2 * n] = c[n] * s ** (2 * n)
            if self.kind == "lambda" and order >= 1:
                a[1] += s
        else:
            nu = self.nu
            for n in range(1, min(N_SERIES, (order + 1) // 2) + 1):
                a[2 * n - 1] = c[n] * (0.25 ** n - nu ** (2 * n)) * s ** (2 * n - 1)
        return a

    @property
    def real_coefficients(self) -> bool:
        return bool(np.abs(self.taylor(12).imag).max() < 1e-14)


def chi(scale=1.0) -> ScalarFunction:
    return ScalarFunction("chi", scale=scale)


def lam(scale=1.0) -> ScalarFunction:
    return ScalarFunction("lambda", scale=scale)


def f_nu(nu) -> ScalarFunction:
    return ScalarFunction("f_nu", param=nu)


def eval_scalar(f: ScalarFunction, z):
    """Evaluate f at z after checking the pole guard."""
    f.check_poles(z)
    out = f(z)
    return out if np.ndim(z) else complex(out.item() if np.ndim(out) else out)


def _finish(F, A, f):
    if np.isrealobj(A) and f.real_coefficients:
        return F.real
    return F


def _taylor_matrix(f, A, E=None):
    # Horner in A^2 on the even and odd parts; [[A, E], [0, A]] also yields
    # the Frechet derivative in the upper right block.
    d = A.shape[0]
    if E is not None:
        A = np.block([[A, E], [np.zeros_like(A), A]])
    coeffs = f.taylor(2 * N_SERIES + 1)
    eye = np.eye(A.shape[0])
    A2 = A @ A
    even = np.zeros(A.shape, dtype=complex)
    odd = np.zeros(A.shape, dtype=complex)
    for k in range(N_SERIES, -1, -1):
        even = even @ A2 + coeffs[2 * k] * eye
        odd = odd @ A2 + coeffs[2 * k + 1] * eye
    out = even + A @ odd
    if not np.all(np.isfinite(out)):
        raise PoleError("Taylor fallback diverged")
    return out if E is None else out[:d, d:]


def _series_ok(f, A) -> bool:
    # well inside the disc of convergence the truncated series is accurate to
    # rounding and, being a polynomial, smooth in A
    return np.linalg.norm(A, 2) <= TAYLOR_FRACTION * f.radius


def _eig(A):
    w, V = np.linalg.eig(A)
    if np.linalg.cond(V) > COND_LIMIT:
        return w, None, None
    return w, V, np.linalg.inv(V)


def fun_of_matrix(f: ScalarFunction, A) -> np.ndarray:
    """f(A) by its Taylor series near 0, otherwise by eigendecomposition.

    The series is also the fallback when the eigenvectors are ill-conditioned.
    """
    A = np.asarray(A)
    if _series_ok(f, A):
        return _finish(_taylor_matrix(f, A), A, f)
    w, V, Vi = _eig(A)
    f.check_poles(w)
    if V is None:
        F = _taylor_matrix(f, A)
    else:
        F = (V * f(w)) @ Vi
    return _finish(F, A, f)


def _divided_differences(f, w):
    fw = f(w)
    dw = w[:, None] - w[None, :]
    close = np.abs(dw) <= 1e-7 * (1 + np.abs(w[:, None]))
    with np.errstate(divide="ignore", invalid="ignore"):
        D = (fw[:, None] - fw[None, :]) / dw
    mid = (w[:, None] + w[None, :]) / 2
    D[close] = f.derivative(mid[close])
    return D


def frechet_of_matrix(f: ScalarFunction, A, E) -> np.ndarray:
    """Directional derivative d/dt f(A + tE) at t = 0."""
    A = np.asarray(A)
    E = np.asarray(E)
    if _series_ok(f, A):
        L = _taylor_matrix(f, A, E)
        if np.isrealobj(A) and np.isrealobj(E) and f.real_coefficients:
            return L.real
        return L
    w, V, Vi = _eig(A)
    f.check_poles(w)
    if V is None:
        L = _taylor_matrix(f, A, E)
    else:
        L = V @ (_divided_differences(f, w) * (Vi @ E @ V)) @ Vi
    if np.isrealobj(A) and np.isrealobj(E) and f.real_coefficients:
        return L.real
    return L


def _coeffs(m):
    return m.coeffs if isinstance(m, AlgebraElement) else np.asarray(m)


def analytic_of_ad(f: ScalarFunction, m, algebra: LieAlgebra | None = None) -> np.ndarray:
    """The dim x dim matrix f(ad_m) acting on coefficient vectors."""
    alg = m.parent if isinstance(m, AlgebraElement) else algebra
    return fun_of_matrix(f, alg.ad(_coeffs(m)))


def logm_principal(G) -> np.ndarray:
    """Principal matrix logarithm by inverse scaling and squaring.

    Takes principal square roots until ``||X - I||_1 <= 1/4`` and sums
    ``2 artanh((X - I)(X + I)^-1)``.  Unlike ``scipy.linalg.logm`` there is no
    randomized norm estimate inside, so equal inputs give equal bits in every
    process.  The caller is responsible for the branch cut.
    """
    X = np.asarray(G)
    n = X.shape[0]
    eye = np.eye(n)
    k = 0
    while np.linalg.norm(X - eye, 1) > 0.25:
        if k == 60:
            raise BranchCutError("square roots do not approach the identity")
        X = scipy.linalg.sqrtm(X)
        k += 1
    Z = np.linalg.solve(X + eye, X - eye)
    Z2 = Z @ Z
    term, L = Z, Z.copy()
    for j in range(1, 40):
        term = term @ Z2
        L = L + term / (2 * j + 1)
        if np.abs(term).max() < 1e-18:
            break
    L = 2.0 ** (k + 1) * L
    if np.isrealobj(G):
        L = np.real_if_close(L, tol=1e6)
    return L


def mat_log_principal(M, algebra: LieAlgebra, tol: float = 1e-9) -> AlgebraElement:
    """Principal logarithm of a group element, as an element of ``algebra``."""
    G = M.matrix if isinstance(M, GroupElement) else np.asarray(M)
    ev = np.linalg.eigvals(G)
    bad = (np.abs(ev.imag) <= 1e-12 * (1 + np.abs(ev))) & (ev.real <= 0)
    if bad.any():
        raise BranchCutError(f"eigenvalue {ev[bad][0]:.6g} on the closed negative real axis")
    L = logm_principal(G)
    try:
        c = algebra.coeffs_of(L, tol=tol)
    except LieAlgebraError as exc:
        raise BranchCutError(f"logarithm leaves the algebra: {exc}") from None
    if algebra.is_real:
        c = np.real(c)
    return AlgebraElement(algebra, c)


def dlog_directional(m, X, side: str, algebra: LieAlgebra | None = None):
    """Derivative of log along a left or right translation.

    ``left``:  d/dt log(e^{tX} e^m)  = lambda(-ad_m / 2) X
    ``right``: d/dt log(e^m e^{tX})  = lambda(+ad_m / 2) X
    """
    alg = m.parent if isinstance(m, AlgebraElement) else algebra
    s = {"left": -0.5, "right": 0.5}.get(side)
    if s is None:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    out = analytic_of_ad(lam(s), _coeffs(m), alg) @ _coeffs(X)
    if isinstance(m, AlgebraElement):
        return AlgebraElement(alg, out.real if alg.is_real and np.isrealobj(_coeffs(X)) else out)
    return out
