"""Constant-coefficient symplectic linear algebra on R^dim.

Convention: coordinates are ordered ``(x_1..x_n, y_1..y_n)``, the complex
structure is ``J(x, y) = (-y, x)`` and the form is ``omega(u, v) = <J u, v>``.
With these choices ``omega(x, J y) = <x, y>`` holds identically.
"""
from dataclasses import dataclass

import numpy as np

_CHECK_TOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SymplecticSpace:
    """A real vector space of even dimension with a symplectic form and a compatible J."""

    dim: int
    form_matrix: np.ndarray
    j_matrix: np.ndarray

    def __post_init__(self):
        if self.dim <= 0 or self.dim % 2:
            raise ValueError(f"symplectic dimension must be even and positive, got {self.dim}")
        omega = _frozen(self.form_matrix)
        j = _frozen(self.j_matrix)
        if omega.shape != (self.dim, self.dim) or j.shape != (self.dim, self.dim):
            raise ValueError("form and complex structure must be dim x dim")
        if np.max(np.abs(omega + omega.T)) > _CHECK_TOL:
            raise ValueError("form matrix is not antisymmetric")
        if abs(np.linalg.det(omega)) <= _CHECK_TOL:
            raise ValueError("form matrix is degenerate")
        if np.max(np.abs(j @ j + np.eye(self.dim))) > _CHECK_TOL:
            raise ValueError("J does not square to -1")
        # omega(x, J y) = x^T Omega J y must equal x^T y
        if np.max(np.abs(omega @ j - np.eye(self.dim))) > _CHECK_TOL:
            raise ValueError("J is not compatible with the form")
        object.__setattr__(self, "form_matrix", omega)
        object.__setattr__(self, "j_matrix", j)

    @property
    def n(self):
        return self.dim // 2

    def omega(self, u, v):
        return float(np.asarray(u, dtype=float) @ self.form_matrix @ np.asarray(v, dtype=float))

    def J(self, v):
        return self.j_matrix @ np.asarray(v, dtype=float)

    def gram(self, vectors):
        """Matrix of pairwise form values ``omega(v_a, v_b)`` for the rows of ``vectors``."""
        v = np.asarray(vectors, dtype=float)
        return v @ self.form_matrix @ v.T


def _block_j(half):
    eye = np.eye(half)
    zero = np.zeros((half, half))
    return np.block([[zero, -eye], [eye, zero]])


def standard_space(n):
    """R^{2n} with J(x, y) = (-y, x) and omega(u, v) = <J u, v>."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    n = int(n)
    j = _block_j(n)
    # omega(u, v) = (J u)^T v = u^T J^T v
    return SymplecticSpace(2 * n, j.T, j)


def product_space(n):
    """R^{2n} x R^{2n} with omega((a, b), (c, d)) = <a, d> - <c, b>.

    Both factors are Lagrangian. J acts as (a, b) -> (-b, a).
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    half = 2 * int(n)
    eye = np.eye(half)
    zero = np.zeros((half, half))
    form = np.block([[zero, eye], [-eye, zero]])
    return SymplecticSpace(2 * half, form, _block_j(half))


def block_to_interleaved(n):
    """Linear symplectomorphism from ``product_space(n)`` to ``standard_space(2n)``.

    Returns ``T`` with ``T.T @ Omega_std @ T == Omega_prod``. Conjugate pairs of
    the standard space are ``(x_k, y_k)``; the product pairs ``a_k`` with ``b_k``,
    so ``T`` places ``a`` in the x-block and ``b`` in the y-block. Under the fixed
    conventions of this module that is the identity permutation.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    half = 2 * int(n)
    perm = np.concatenate([np.arange(half), half + np.arange(half)])
    t = np.zeros((2 * half, 2 * half))
    t[np.arange(2 * half), perm] = 1.0
    return t


def is_symplectic_map(t, source, target, tol=_CHECK_TOL):
    """True when ``t`` pulls the target form back to the source form."""
    t = np.asarray(t, dtype=float)
    return bool(np.max(np.abs(t.T @ target.form_matrix @ t - source.form_matrix)) <= tol)
