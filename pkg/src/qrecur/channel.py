"""Quantum channels in Kraus form.

Density operators, projectors and pure states are plain ``numpy`` arrays;
a :class:`QuantumChannel` is an immutable ordered Kraus set.

Superoperator matrices use column stacking throughout::

    vec(rho) = rho.reshape(-1, order="F")
    vec(A @ rho @ B) = kron(B.T, A) @ vec(rho)
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotNormalized, NotTracePreserving
from .numerics import DEFAULT_TOL, Tolerance, as_matrix, dagger, max_abs


class QuantumChannel:
    """An ordered set of Kraus operators ``A_j`` acting on a ``dim``-level system.

    Parameters
    ----------
    kraus : sequence of array_like
        Square matrices of equal size. The set is stored as given; zero
        operators are kept.
    check : bool
        Require ``sum_j A_j^dag A_j = I`` within ``tol.eps_check``. Pass
        ``False`` for raw Kraus sets (duals of non-unital channels,
        restrictions, channels loaded for validation).
    """

    __slots__ = ("_kraus",)

    def __init__(self, kraus, check: bool = True, tol: Tolerance = DEFAULT_TOL):
        ops = np.array([as_matrix(k) for k in kraus], dtype=complex)
        if ops.ndim != 3 or len(ops) == 0:
            raise ValueError("need at least one Kraus operator")
        if ops.shape[1] != ops.shape[2]:
            raise DimensionMismatch(f"Kraus operators must be square, got {ops.shape[1:]}")
        if not np.all(np.isfinite(ops)):
            raise ValueError("Kraus operators contain NaN or Inf")
        ops.setflags(write=False)
        object.__setattr__(self, "_kraus", ops)
        if check:
            defect = normalization_defect(self)
            if defect > tol.eps_check:
                raise NotTracePreserving(
                    f"sum A^dag A deviates from identity by {defect:.3e}"
                )

    def __setattr__(self, name, value):
        raise AttributeError("QuantumChannel is immutable")

    @property
    def kraus(self) -> np.ndarray:
        """Read-only array of shape ``(D, dim, dim)``."""
        return self._kraus

    @property
    def dim(self) -> int:
        return self._kraus.shape[1]

    def __len__(self):
        return self._kraus.shape[0]

    def __iter__(self):
        return iter(self._kraus)

    def __call__(self, rho):
        return apply(self, rho)

    def __repr__(self):
        return f"QuantumChannel(dim={self.dim}, D={len(self)})"


def identity_channel(dim: int) -> QuantumChannel:
    return QuantumChannel([np.eye(dim)])


def unitary_channel(u, tol: Tolerance = DEFAULT_TOL) -> QuantumChannel:
    return QuantumChannel([u], tol=tol)


def normalization_defect(channel: QuantumChannel) -> float:
    k = channel.kraus
    s = np.einsum("kji,kjl->il", k.conj(), k)
    return max_abs(s - np.eye(channel.dim))


def unitality_defect(channel: QuantumChannel) -> float:
    k = channel.kraus
    s = np.einsum("kij,klj->il", k, k.conj())
    return max_abs(s - np.eye(channel.dim))


def _check_dim(channel: QuantumChannel, a: np.ndarray, what: str) -> None:
    if a.shape != (channel.dim, channel.dim):
        raise DimensionMismatch(
            f"{what} has shape {a.shape}, channel acts on dim {channel.dim}"
        )


def apply(channel: QuantumChannel, rho) -> np.ndarray:
    """``sum_j A_j rho A_j^dag``."""
    rho = as_matrix(rho)
    _check_dim(channel, rho, "rho")
    k = channel.kraus
    return np.einsum("kij,jl,kml->im", k, rho, k.conj())


def apply_adjoint_sum(channel: QuantumChannel, x) -> np.ndarray:
    """``sum_j A_j^dag x A_j``, the Heisenberg-picture action."""
    x = as_matrix(x)
    _check_dim(channel, x, "operand")
    k = channel.kraus
    return np.einsum("kji,jl,klm->im", k.conj(), x, k)


@dataclass(frozen=True)
class ValidationReport:
    trace_preserving: bool
    completely_positive: bool
    unital_global: bool
    max_normalization_defect: float
    max_unitality_defect: float

    def to_dict(self) -> dict:
        return {
            "trace_preserving": self.trace_preserving,
            "completely_positive": self.completely_positive,
            "unital_global": self.unital_global,
            "max_normalization_defect": self.max_normalization_defect,
            "max_unitality_defect": self.max_unitality_defect,
        }


def choi_matrix(channel: QuantumChannel) -> np.ndarray:
    """``sum_j vec(A_j) vec(A_j)^dag`` (column-stacked vec)."""
    vecs = channel.kraus.transpose(0, 2, 1).reshape(len(channel), -1)
    return vecs.T @ vecs.conj()


def validate(channel: QuantumChannel, tol: Tolerance = DEFAULT_TOL) -> ValidationReport:
    norm_defect = normalization_defect(channel)
    unit_defect = unitality_defect(channel)
    choi = choi_matrix(channel)
    choi = 0.5 * (choi + dagger(choi))
    evals = np.linalg.eigvalsh(choi)
    cutoff = -tol.eps_check * max(abs(np.trace(choi).real), 1.0) / channel.dim
    return ValidationReport(
        trace_preserving=norm_defect < tol.eps_check,
        completely_positive=bool(evals[0] >= cutoff),
        unital_global=unit_defect < tol.eps_check,
        max_normalization_defect=norm_defect,
        max_unitality_defect=unit_defect,
    )


def dual(channel: QuantumChannel, tol: Tolerance = DEFAULT_TOL) -> QuantumChannel:
    """Kraus set ``{A_j^dag}``.

    The result is a channel only when the input is unital; otherwise the raw
    Kraus set is returned without a normalisation check.
    """
    unital = unitality_defect(channel) < tol.eps_check
    return QuantumChannel(
        [dagger(k) for k in channel.kraus], check=unital, tol=tol
    )


def compose(outer: QuantumChannel, inner: QuantumChannel) -> QuantumChannel:
    """The channel ``rho -> outer(inner(rho))``.

    Kraus operators are ``B_k A_j`` ordered with the inner index ``j``
    varying slowest.
    """
    if outer.dim != inner.dim:
        raise DimensionMismatch(f"dims {outer.dim} and {inner.dim} differ")
    ops = [b @ a for a in inner.kraus for b in outer.kraus]
    return QuantumChannel(ops, check=False)


def restrict(channel: QuantumChannel, pi, tol: Tolerance = DEFAULT_TOL) -> QuantumChannel:
    """Kraus set ``{A_j Pi}``.

    The result is checked against ``sum Pi A^dag A Pi = Pi`` instead of the
    identity, since it only preserves the trace of states inside ``Pi``.
    """
    pi = as_matrix(pi)
    _check_dim(channel, pi, "projector")
    ops = np.array([k @ pi for k in channel.kraus])
    s = np.einsum("kji,kjl->il", ops.conj(), ops)
    defect = max_abs(s - pi)
    if defect > tol.eps_check:
        raise NotTracePreserving(
            f"restricted Kraus set deviates from Pi by {defect:.3e}"
        )
    return QuantumChannel(ops, check=False)


def measurement_filter(psi, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """The no-return projector ``I - |psi><psi|``."""
    psi = np.asarray(psi, dtype=complex).ravel()
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol.eps_check:
        raise NotNormalized(f"state has norm {norm!r}")
    return np.eye(len(psi), dtype=complex) - np.outer(psi, psi.conj())


def vec(rho) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim, order="F")


def to_superoperator_matrix(channel: QuantumChannel, filter=None) -> np.ndarray:
    """Matrix of ``rho -> F S[rho] F`` on column-stacked vectors.

    Without ``filter`` this is the matrix of the channel itself.
    """
    k = channel.kraus
    if filter is not None:
        f = as_matrix(filter)
        _check_dim(channel, f, "filter")
        k = np.einsum("ij,kjl->kil", f, k)
    # vec(A rho A^dag) = (conj(A) kron A) vec(rho)
    return np.einsum("kab,kcd->acbd", k.conj(), k).reshape(
        channel.dim**2, channel.dim**2
    )


def is_unital_on(channel: QuantumChannel, pi, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Whether ``sum_j A_j Pi A_j^dag = Pi``."""
    pi = as_matrix(pi)
    _check_dim(channel, pi, "projector")
    return max_abs(apply(channel, pi) - pi) < tol.eps_check


# -- file format -----------------------------------------------------------

def _matrix_to_pairs(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _pairs_to_matrix(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("matrix entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def channel_to_dict(channel: QuantumChannel) -> dict:
    return {"dim": channel.dim, "kraus": [_matrix_to_pairs(k) for k in channel.kraus]}


def channel_from_dict(data: dict, check: bool = False) -> QuantumChannel:
    """Build a channel from ``{"dim": int, "kraus": [...]}``.

    Raises ``ValueError`` (or ``KeyError``/``TypeError``) on malformed input.
    Normalisation is not enforced unless ``check`` is set, so that invalid
    channels can still be loaded and reported on.
    """
    dim = int(data["dim"])
    mats = [_pairs_to_matrix(k) for k in data["kraus"]]
    for m in mats:
        if m.shape != (dim, dim):
            raise DimensionMismatch(f"Kraus operator shape {m.shape} != ({dim}, {dim})")
    return QuantumChannel(mats, check=check)


def save_channel(channel: QuantumChannel, path) -> None:
    with open(path, "w") as fh:
        json.dump(channel_to_dict(channel), fh)


def load_channel(path, check: bool = False) -> QuantumChannel:
    with open(path) as fh:
        return channel_from_dict(json.load(fh), check=check)
