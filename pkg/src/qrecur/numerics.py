"""Dense complex linear algebra shared by the rest of the package.

Everything here works on plain ``numpy`` arrays of dtype ``complex128``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NegativeEigenvalue, NotHermitian


@dataclass(frozen=True)
class Tolerance:
    """Numerical cutoffs.

    Attributes
    ----------
    eps_rank : float
        Relative eigenvalue / residual-norm cutoff deciding numerical rank.
    eps_check : float
        Absolute slack used when validating invariants.
    eps_converge : float
        Cutoff for truncating series and dropping negligible spectral terms.
    """

    eps_rank: float = 1e-10
    eps_check: float = 1e-9
    eps_converge: float = 1e-12

    def __post_init__(self):
        for name in ("eps_rank", "eps_check", "eps_converge"):
            value = getattr(self, name)
            if not (0.0 < value < 1e-2):
                raise ValueError(f"{name} must lie in (0, 1e-2), got {value!r}")


DEFAULT_TOL = Tolerance()


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {m.shape}")
    return m


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def check_hermitian(a: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> None:
    if a.shape[0] != a.shape[1]:
        raise NotHermitian(f"matrix of shape {a.shape} is not square")
    defect = max_abs(a - dagger(a))
    if defect > tol.eps_check:
        raise NotHermitian(f"Hermiticity defect {defect:.3e} exceeds {tol.eps_check:.1e}")


def support_projector(sigma, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Projector onto the numerically nonzero eigenspace of a PSD matrix.

    Eigenvalues above ``eps_rank * lambda_max`` count as nonzero. A matrix
    whose largest eigenvalue is below ``eps_check`` has empty support.
    """
    sigma = as_matrix(sigma)
    check_hermitian(sigma, tol)
    herm = 0.5 * (sigma + dagger(sigma))
    evals, evecs = np.linalg.eigh(herm)
    lam_max = float(evals[-1]) if evals.size else 0.0
    if lam_max <= tol.eps_check:
        if evals.size and evals[0] < -tol.eps_check:
            raise NegativeEigenvalue(f"eigenvalue {evals[0]:.3e} below zero")
        return np.zeros_like(herm)
    if evals[0] < -tol.eps_check * lam_max:
        raise NegativeEigenvalue(
            f"eigenvalue {evals[0]:.3e} below -eps_check*lambda_max"
        )
    keep = evals > tol.eps_rank * lam_max
    v = evecs[:, keep]
    return v @ dagger(v)


def unitary_from_hamiltonian(h, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """``exp(-iH)`` for Hermitian ``H`` via its eigendecomposition."""
    h = as_matrix(h)
    check_hermitian(h, tol)
    evals, evecs = np.linalg.eigh(0.5 * (h + dagger(h)))
    return (evecs * np.exp(-1j * evals)) @ dagger(evecs)


@dataclass(frozen=True)
class EigenDecomposition:
    """Right/left eigenvectors of a general square matrix.

    ``right[:, n]`` is the n-th right eigenvector and ``left[n, :]`` the
    matching dual row, normalised so that ``left @ right = I``. Any vector
    ``x`` expands as ``right @ (left @ x)``.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    condition: float
    defective: bool

    def reconstruct(self) -> np.ndarray:
        return (self.right * self.eigenvalues) @ self.left


def eig_general(m, tol: Tolerance = DEFAULT_TOL) -> EigenDecomposition:
    """Eigendecomposition of a general complex matrix.

    The decomposition is flagged ``defective`` when the right-eigenvector
    matrix has condition number above ``1 / eps_rank``; its left vectors
    are then unreliable and callers should not expand in this basis.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix of shape {m.shape} is not square")
    evals, right = np.linalg.eig(m)
    cond = float(np.linalg.cond(right))
    defective = not np.isfinite(cond) or cond > 1.0 / tol.eps_rank
    if defective:
        left = np.linalg.pinv(right)
    else:
        left = np.linalg.inv(right)
    return EigenDecomposition(evals, right, left, cond, defective)


def extend_orthonormal_basis(basis, candidates, tol: Tolerance = DEFAULT_TOL) -> list:
    """Gram-Schmidt extension of an orthonormal basis.

    Each candidate contributes its component orthogonal to the current span
    if that component has norm above ``eps_rank``. The projection is done
    twice per candidate to keep the output orthonormal to working precision.
    """
    out = [np.asarray(b, dtype=complex) for b in basis]
    for c in candidates:
        r = np.array(c, dtype=complex)
        for _ in range(2):
            for b in out:
                r = r - b * np.vdot(b, r)
        norm = np.linalg.norm(r)
        if norm > tol.eps_rank:
            out.append(r / norm)
    return out
