"""Lie algebras in their defining representation.

Every algebra here is built from explicit n x n matrices.  Structure
constants and the invariant form are computed from those matrices once and
then frozen, so the matrix route and the coefficient route can be checked
against each other at any time.

Basis orderings (all tensors are coefficient arrays in this order):

* ``sl_split``: positive roots ``E_ij`` (i < j) sorted by height, then the
  Cartan elements ``H_k = E_kk - E_{k+1,k+1}``, then negative roots ``F_ij``
  in the same order as the positive ones.
* ``su_compact``: ``i(E_a + F_a)`` for every positive root, then
  ``E_a - F_a`` for every positive root, then ``i H_k``.
* Borel part of the realified double: ``E_a``, then ``i E_a``, then ``H_k``.

The invariant form is the trace form of the defining representation, which
for sl(n) and su(n) is the Killing form normalized so that long roots have
length sqrt(2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

__all__ = [
    "LieAlgebra",
    "AlgebraElement",
    "GroupElement",
    "RealifiedDouble",
    "LieAlgebraError",
    "build_algebra",
    "bracket",
    "pairing",
    "ad_matrix",
    "group_exp",
    "group_Ad",
    "dagger",
]

GROUP_TOL = 1e-12
SELF_CHECK_TOL = 1e-13


class LieAlgebraError(ValueError):
    pass


def _unit(n, i, j):
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1.0
    return m


def positive_roots(n):
    """Index pairs (i, j), i < j, of the positive roots of sl(n), by height."""
    return sorted(((i, j) for i in range(n) for j in range(i + 1, n)),
                  key=lambda p: (p[1] - p[0], p[0]))


def _chevalley(n):
    roots = positive_roots(n)
    pos = [(_unit(n, i, j), f"E{i + 1}{j + 1}") for i, j in roots]
    cartan = [(_unit(n, k, k) - _unit(n, k + 1, k + 1), f"H{k + 1}")
              for k in range(n - 1)]
    neg = [(_unit(n, j, i), f"F{i + 1}{j + 1}") for i, j in roots]
    if n == 2:
        pos, cartan, neg = [(pos[0][0], "E")], [(cartan[0][0], "H")], [(neg[0][0], "F")]
    return pos, cartan, neg


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """Finite-dimensional matrix Lie algebra with frozen structure data.

    ``structure_constants[a, b, c]`` is f_ab^c with [T_a, T_b] = f_ab^c T_c
    and ``bilinear_form[a, b]`` is <T_a, T_b>.
    """

    kind: str
    rank: int
    scalar_field: str
    basis_labels: tuple[str, ...]
    matrices: np.ndarray = field(repr=False)
    structure_constants: np.ndarray = field(repr=False)
    bilinear_form: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.basis_labels)

    @property
    def n(self) -> int:
        """Size of the defining representation."""
        return self.matrices.shape[1]

    @cached_property
    def form_inv(self) -> np.ndarray:
        return np.linalg.inv(self.bilinear_form)

    @cached_property
    def _coord_solver(self):
        # Least-squares solve of sum_a x_a T_a = X over the real or complex
        # span, used by coeffs_of.
        flat = self.matrices.reshape(self.dim, -1).T
        if self.scalar_field == "real":
            flat = np.vstack([flat.real, flat.imag])
        return np.linalg.pinv(flat), flat

    @property
    def is_real(self) -> bool:
        return self.scalar_field == "real"

    @property
    def dtype(self):
        return float if self.is_real else complex

    def element(self, coeffs) -> AlgebraElement:
        return AlgebraElement(self, np.asarray(coeffs, dtype=self.dtype))

    def basis(self, a: int) -> AlgebraElement:
        c = np.zeros(self.dim, dtype=self.dtype)
        c[a] = 1.0
        return AlgebraElement(self, c)

    def zero(self) -> AlgebraElement:
        return AlgebraElement(self, np.zeros(self.dim, dtype=self.dtype))

    def to_matrix(self, coeffs) -> np.ndarray:
        """sum_a coeffs[a] rep(T_a); complex coefficients are allowed."""
        return np.tensordot(np.asarray(coeffs), self.matrices, axes=(0, 0))

    def coeffs_of(self, X, tol: float | None = 1e-9, complexify: bool = False) -> np.ndarray:
        """Coefficients of a matrix X in the basis.

        With ``complexify`` the basis is used as a basis of the complexified
        algebra and complex coefficients are returned.  Raises when X is not in
        the span beyond ``tol`` (relative to ``1 + |X|``).
        """
        X = np.asarray(X, dtype=complex)
        if complexify or not self.is_real:
            flat = self.matrices.reshape(self.dim, -1).T
            c, *_ = np.linalg.lstsq(flat, X.ravel(), rcond=None)
            err = np.linalg.norm(flat @ c - X.ravel())
        else:
            pinv, flat = self._coord_solver
            rhs = np.concatenate([X.ravel().real, X.ravel().imag])
            c = pinv @ rhs
            err = np.linalg.norm(flat @ c - rhs)
        if tol is not None and err > tol * (1.0 + np.linalg.norm(X)):
            raise LieAlgebraError(
                f"matrix is not in the span of {self.kind}(rank {self.rank}); "
                f"residual {err:.3e}")
        return c

    @cached_property
    def f_lowered(self) -> np.ndarray:
        """f_abc = <[T_a, T_b], T_c>, totally antisymmetric."""
        return np.einsum("abd,dc->abc", self.structure_constants, self.bilinear_form)

    def ad(self, coeffs) -> np.ndarray:
        """Matrix of ad_x acting on coefficient vectors: (ad_x y)^c = x^a f_ab^c y^b."""
        return np.einsum("a,abc->cb", np.asarray(coeffs), self.structure_constants)

    def br(self, x, y) -> np.ndarray:
        """Bracket on raw coefficient arrays."""
        return np.einsum("a,b,abc->c", np.asarray(x), np.asarray(y), self.structure_constants)

    def form(self, x, y) -> complex:
        return np.asarray(x) @ self.bilinear_form @ np.asarray(y)

    def jacobi_residual(self) -> float:
        f = self.structure_constants
        t = np.einsum("abd,dce->abce", f, f)
        jac = t + np.einsum("abce->bcae", t) + np.einsum("abce->cabe", t)
        return float(np.abs(jac).max())

    def invariance_residual(self) -> float:
        """max |<[T_a,T_b],T_c> + <T_b,[T_a,T_c]>| over basis triples."""
        fl = self.f_lowered
        return float(np.abs(fl + np.einsum("acb->abc", fl)).max())

    def rep_residual(self) -> float:
        """Homomorphism check rep([T_a,T_b]) = [rep T_a, rep T_b]."""
        T = self.matrices
        comm = np.einsum("aij,bjk->abik", T, T) - np.einsum("bij,ajk->abik", T, T)
        via_f = np.einsum("abc,cij->abij", self.structure_constants, T)
        return float(np.abs(comm - via_f).max())

    def to_json(self) -> dict:
        def enc(a):
            a = np.asarray(a)
            if np.iscomplexobj(a) and np.abs(a.imag).max(initial=0) > 0:
                return {"re": a.real.tolist(), "im": a.imag.tolist()}
            return np.real(a).tolist()

        return {
            "schema": "poissonlie.algebra/1",
            "kind": self.kind,
            "rank": self.rank,
            "scalar_field": self.scalar_field,
            "basis_labels": list(self.basis_labels),
            "structure_constants": enc(self.structure_constants),
            "bilinear_form": enc(self.bilinear_form),
        }


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    parent: LieAlgebra
    coeffs: np.ndarray

    def __post_init__(self):
        if np.shape(self.coeffs) != (self.parent.dim,):
            raise LieAlgebraError(
                f"expected {self.parent.dim} coefficients, got shape {np.shape(self.coeffs)}")

    def _check(self, other):
        if other.parent is not self.parent:
            raise LieAlgebraError("elements belong to different algebras")

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.parent, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.parent, self.coeffs - other.coeffs)

    def __neg__(self):
        return AlgebraElement(self.parent, -self.coeffs)

    def __mul__(self, s):
        return AlgebraElement(self.parent, s * self.coeffs)

    __rmul__ = __mul__

    @property
    def matrix(self) -> np.ndarray:
        return self.parent.to_matrix(self.coeffs)

    def allclose(self, other, atol=1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self.coeffs, other.coeffs, atol=atol, rtol=0))


@dataclass(frozen=True, eq=False)
class GroupElement:
    """Matrix in the defining representation of SL, SU, Borel or the realified double."""

    group: str
    matrix: np.ndarray
    tol: float = GROUP_TOL

    def __post_init__(self):
        g = np.asarray(self.matrix)
        object.__setattr__(self, "matrix", g)
        n = g.shape[0]
        if g.shape != (n, n):
            raise LieAlgebraError("group element must be a square matrix")
        scale = self.tol * max(1.0, np.linalg.norm(g)) ** n
        if self.group in ("SL", "SU", "RealifiedDouble"):
            if abs(np.linalg.det(g) - 1.0) > scale:
                raise LieAlgebraError(f"{self.group} element must have unit determinant")
        if self.group == "SU":
            if np.abs(g.conj().T @ g - np.eye(n)).max() > self.tol * 10:
                raise LieAlgebraError("SU element must be unitary")
        elif self.group == "Borel":
            d = np.diag(g)
            if (np.abs(np.tril(g, -1)).max(initial=0) > self.tol
                    or np.abs(np.imag(d)).max() > self.tol or np.real(d).min() <= 0):
                raise LieAlgebraError(
                    "Borel element must be upper triangular with positive real diagonal")
        elif self.group not in ("SL", "SU", "RealifiedDouble"):
            raise LieAlgebraError(f"unknown group tag {self.group!r}")

    @property
    def inv(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)


@dataclass(frozen=True, eq=False)
class RealifiedDouble:
    """sl(n, C) viewed as a real Lie algebra, split as su(n) + Borel.

    ``compact`` is su(n) in the order of the compact basis; ``borel_matrices``
    spans the Borel part (upper triangular, real traceless diagonal).
    """

    complex_algebra: LieAlgebra
    compact: LieAlgebra
    borel_matrices: np.ndarray = field(repr=False)
    theta: float = 1.0

    def __post_init__(self):
        if self.theta == 0:
            raise LieAlgebraError("theta must be nonzero")

    @property
    def dim(self) -> int:
        """Real dimension of the compact part (= of the Borel part)."""
        return self.compact.dim

    @property
    def n(self) -> int:
        return self.compact.n

    @cached_property
    def real_basis(self) -> np.ndarray:
        """2*dim matrices: the compact basis followed by the Borel basis."""
        return np.concatenate([self.compact.matrices, self.borel_matrices])

    @cached_property
    def _solver(self):
        flat = self.real_basis.reshape(2 * self.dim, -1).T
        real = np.vstack([flat.real, flat.imag])
        return np.linalg.pinv(real), real

    def real_coords(self, Z) -> np.ndarray:
        """Real coefficients of a traceless complex matrix in ``real_basis``."""
        Z = np.asarray(Z, dtype=complex)
        pinv, real = self._solver
        rhs = np.concatenate([Z.ravel().real, Z.ravel().imag])
        c = pinv @ rhs
        if np.linalg.norm(real @ c - rhs) > 1e-9 * (1 + np.linalg.norm(Z)):
            raise LieAlgebraError("matrix is not in sl(n, C)")
        return c

    def from_real_coords(self, c) -> np.ndarray:
        return np.tensordot(np.asarray(c, dtype=float), self.real_basis, axes=(0, 0))

    def split(self, Z) -> tuple[np.ndarray, np.ndarray]:
        """(pi_g Z, pi_B Z) as matrices."""
        c = self.real_coords(Z)
        d = self.dim
        return (np.tensordot(c[:d], self.real_basis[:d], axes=(0, 0)),
                np.tensordot(c[d:], self.real_basis[d:], axes=(0, 0)))

    def pi_g(self, Z) -> np.ndarray:
        return self.split(Z)[0]

    def pi_b(self, Z) -> np.ndarray:
        return self.split(Z)[1]

    def pairing(self, X, Y, theta: float | None = None) -> float:
        """(1/theta) Im tr(XY) on matrices."""
        th = self.theta if theta is None else theta
        return float(np.imag(np.trace(np.asarray(X) @ np.asarray(Y)))) / th

    @cached_property
    def gram(self) -> np.ndarray:
        """Pairing matrix of ``real_basis`` at theta = 1."""
        B = self.real_basis
        return np.einsum("aij,bji->ab", B, B).imag

    def borel_from_compact(self, X) -> np.ndarray:
        """The unique Y in the Borel part with i(Y + Y^dagger) = X."""
        c = np.linalg.solve(self.b_to_g_matrix, np.real(self.compact.coeffs_of(X)))
        return np.tensordot(c, self.borel_matrices, axes=(0, 0))

    @cached_property
    def b_to_g_matrix(self) -> np.ndarray:
        """Matrix of Y -> i(Y + Y^dagger) from Borel coefficients to compact ones."""
        cols = [self.compact.coeffs_of(1j * (Y + Y.conj().T)) for Y in self.borel_matrices]
        return np.real(np.array(cols).T)


def _finish(kind, rank, scalar_field, labels, mats):
    mats = np.array(mats, dtype=complex)
    dim = len(labels)
    gram = np.einsum("aij,bji->ab", mats, mats)
    if scalar_field == "real":
        if np.abs(gram.imag).max() > SELF_CHECK_TOL:
            raise LieAlgebraError("trace form is not real on a real form")
        gram = gram.real
    proto = LieAlgebra(kind, rank, scalar_field, tuple(labels), mats,
                       np.zeros((dim, dim, dim)), gram)
    f = np.zeros((dim, dim, dim), dtype=proto.dtype)
    for a in range(dim):
        for b in range(dim):
            comm = mats[a] @ mats[b] - mats[b] @ mats[a]
            f[a, b] = proto.coeffs_of(comm, tol=SELF_CHECK_TOL * 100)
    if scalar_field == "real":
        f = np.real(f)
    f[np.abs(f) < 1e-15] = 0.0
    alg = LieAlgebra(kind, rank, scalar_field, tuple(labels), mats, f, gram)
    for name, res in (("Jacobi", alg.jacobi_residual()),
                      ("form invariance", alg.invariance_residual()),
                      ("representation", alg.rep_residual())):
        if res > SELF_CHECK_TOL:
            raise LieAlgebraError(f"{name} self-check failed: {res:.3e}")
    # The Borel part is solvable: its trace form is degenerate by nature.
    if kind != "borel" and abs(np.linalg.det(gram)) < 1e-12:
        raise LieAlgebraError("invariant form is degenerate")
    return alg


def _sl(n, scalar_field):
    pos, cartan, neg = _chevalley(n)
    items = pos + cartan + neg
    return _finish("sl_split", n - 1, scalar_field, [l for _, l in items], [m for m, _ in items])


def _su(n):
    pos, cartan, neg = _chevalley(n)
    if n == 2:
        names = [("i(E+F)", "E-F")]
    else:
        names = [(f"i(E{l[1:]}+F{l[1:]})", f"E{l[1:]}-F{l[1:]}") for _, l in pos]
    mats = [1j * (e + f) for (e, _), (f, _) in zip(pos, neg)]
    mats += [e - f for (e, _), (f, _) in zip(pos, neg)]
    mats += [1j * h for h, _ in cartan]
    labels = [a for a, _ in names] + [b for _, b in names] + [f"i{l}" for _, l in cartan]
    return _finish("su_compact", n - 1, "real", labels, mats)


def build_algebra(kind: str, rank: int, field: str = "real"):
    """Construct ``sl_split``, ``su_compact``, ``borel`` or ``realified_double``.

    ``borel`` returns the real Borel subalgebra (upper triangular, real
    diagonal) of sl(rank+1, C); ``realified_double`` returns a
    :class:`RealifiedDouble` with theta = 1.
    """
    if not isinstance(rank, (int, np.integer)) or rank < 1:
        raise LieAlgebraError(f"rank must be a positive integer, got {rank!r}")
    if field not in ("real", "complex"):
        raise LieAlgebraError(f"unknown scalar field {field!r}")
    n = rank + 1
    if kind == "sl_split":
        return _sl(n, field)
    if kind == "su_compact":
        if field != "real":
            raise LieAlgebraError("su_compact is a real form")
        return _su(n)
    if kind == "borel":
        if field != "real":
            raise LieAlgebraError("the Borel part is a real Lie algebra")
        pos, cartan, _ = _chevalley(n)
        mats = [e for e, _ in pos] + [1j * e for e, _ in pos] + [h for h, _ in cartan]
        labels = [l for _, l in pos] + [f"i{l}" for _, l in pos] + [l for _, l in cartan]
        return _finish("borel", rank, "real", labels, mats)
    if kind == "realified_double":
        if field != "real":
            raise LieAlgebraError("the realified double is a real Lie algebra")
        borel = build_algebra("borel", rank)
        return RealifiedDouble(_sl(n, "complex"), _su(n), borel.matrices)
    raise LieAlgebraError(f"unsupported algebra kind {kind!r}")


def bracket(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    x._check(y)
    return AlgebraElement(x.parent, x.parent.br(x.coeffs, y.coeffs))


def pairing(x: AlgebraElement | np.ndarray, y: AlgebraElement | np.ndarray,
            which: str = "killing", double: RealifiedDouble | None = None):
    """Invariant pairing: ``killing`` (trace form) or ``imaginary_theta``.

    ``imaginary_theta`` needs a :class:`RealifiedDouble` and takes matrices or
    elements of either of its real parts.
    """
    if which == "killing":
        x._check(y)
        return x.parent.form(x.coeffs, y.coeffs)
    if which == "imaginary_theta":
        if double is None:
            raise LieAlgebraError("imaginary_theta pairing needs a realified double")
        X = x.matrix if isinstance(x, AlgebraElement) else x
        Y = y.matrix if isinstance(y, AlgebraElement) else y
        return double.pairing(X, Y)
    raise LieAlgebraError(f"unknown pairing {which!r}")


def ad_matrix(x: AlgebraElement) -> np.ndarray:
    return x.parent.ad(x.coeffs)


def group_exp(x: AlgebraElement, group: str | None = None) -> GroupElement:
    tag = group or {"su_compact": "SU", "borel": "Borel"}.get(x.parent.kind, "SL")
    return GroupElement(tag, scipy.linalg.expm(x.matrix))


def group_Ad(g: GroupElement | np.ndarray, x: AlgebraElement) -> AlgebraElement:
    """g x g^{-1} re-expressed in the basis of x's algebra."""
    G = g.matrix if isinstance(g, GroupElement) else np.asarray(g)
    Y = G @ x.matrix @ np.linalg.inv(G)
    c = x.parent.coeffs_of(Y, tol=1e-9)
    if x.parent.is_real:
        c = np.real(c)
    return AlgebraElement(x.parent, c)


def dagger(z):
    """Minus the Cartan involution: conjugate transpose in the defining rep.

    Accepts matrices, :class:`GroupElement` (returned as a matrix group
    element of the same tag when meaningful) or :class:`AlgebraElement` of the
    compact algebra (where it acts as -1).
    """
    if isinstance(z, AlgebraElement):
        return AlgebraElement(z.parent, np.real(z.parent.coeffs_of(z.matrix.conj().T))
                              if z.parent.is_real else z.parent.coeffs_of(z.matrix.conj().T))
    if isinstance(z, GroupElement):
        tag = {"Borel": "RealifiedDouble"}.get(z.group, z.group)
        return GroupElement(tag, z.matrix.conj().T)
    return np.asarray(z).conj().T
