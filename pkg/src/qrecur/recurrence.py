"""First-return statistics of a monitored channel.

One timestep applies the channel ``S`` and then measures whether the system
is back in the initial pure state ``|psi>``. Conditioned on "no return so
far" the unnormalised state evolves as

    rho_cond(t+1) = F S[rho_cond(t)] F,   F = I - |psi><psi|,

with ``rho_cond(0) = |psi><psi|``. Its trace ``q_t`` is the survival
probability, ``p_t = q_{t-1} - q_t`` the first-return distribution, and the
expected return time is ``T = sum_{t>=0} q_t = Tr sum_t rho_cond(t)``.

Heavy lifting happens in the relevant subspace (the smallest subspace that
contains ``|psi>`` and is mapped into itself by every Kraus operator), in an
orthonormal basis whose first vector is ``|psi>`` itself.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    QuantumChannel,
    apply,
    is_unital_on,
    measurement_filter,
    to_superoperator_matrix,
    unvec,
    vec,
)
from .errors import (
    DimensionMismatch,
    NonConvergent,
    NonRecurrent,
    NotStochastic,
    TheoremViolation,
)
from .numerics import DEFAULT_TOL, Tolerance, dagger, eig_general, extend_orthonormal_basis

QUANTIZATION_TOL = 1e-6
MAX_HORIZON = 10**6


def _state(psi, dim: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.shape != (dim,):
        raise DimensionMismatch(f"state of length {psi.size} for a dim-{dim} channel")
    return psi


# -- relevant subspace -------------------------------------------------------

def orbit_basis(channel: QuantumChannel, psi, tol: Tolerance = DEFAULT_TOL,
                conditional: bool = False) -> np.ndarray:
    """Orthonormal basis (as columns) of the Kraus orbit of ``psi``.

    Starting from ``[psi]``, every Kraus operator is applied to every basis
    vector and the results are folded in by Gram-Schmidt until nothing new
    appears. With ``conditional`` the operators are ``F A_j`` instead of
    ``A_j``; both choices span the same space.
    """
    psi = _state(psi, channel.dim)
    ops = channel.kraus
    if conditional:
        f = measurement_filter(psi, tol)
        ops = np.einsum("ij,kjl->kil", f, ops)
    basis = extend_orthonormal_basis([], [psi], tol)
    i = 0
    while i < len(basis) and len(basis) < channel.dim:
        basis = extend_orthonormal_basis(basis, [a @ basis[i] for a in ops], tol)
        i += 1
    return np.array(basis).T


def relevant_subspace(channel: QuantumChannel, psi, tol: Tolerance = DEFAULT_TOL,
                      conditional: bool = False) -> tuple:
    """Projector onto the relevant subspace of ``psi`` and its dimension."""
    b = orbit_basis(channel, psi, tol, conditional)
    return b @ dagger(b), b.shape[1]


def _restricted_kraus(channel: QuantumChannel, basis: np.ndarray) -> QuantumChannel:
    ops = np.einsum("ia,kij,jb->kab", basis.conj(), channel.kraus, basis)
    return QuantumChannel(ops, check=False)


def conditional_superoperator(channel: QuantumChannel, psi, tol: Tolerance = DEFAULT_TOL,
                              basis: np.ndarray | None = None) -> np.ndarray:
    """Matrix of ``rho -> F S[rho] F`` restricted to the relevant subspace.

    The result acts on column-stacked ``r x r`` operators written in
    ``basis`` (the orbit basis unless given), where ``psi`` is the first
    basis vector.
    """
    if basis is None:
        basis = orbit_basis(channel, psi, tol)
    r = basis.shape[1]
    e0 = np.zeros(r, dtype=complex)
    e0[0] = 1.0
    return to_superoperator_matrix(_restricted_kraus(channel, basis), measurement_filter(e0))


# -- direct iteration --------------------------------------------------------

def conditional_step(channel: QuantumChannel, psi, rho) -> np.ndarray:
    """One monitored step: ``F S[rho] F`` with ``F = I - |psi><psi|``."""
    psi = _state(psi, channel.dim)
    out = apply(channel, rho)
    v = out @ psi
    w = psi.conj() @ out
    return out - np.outer(v, psi.conj()) - np.outer(psi, w) + np.vdot(psi, v) * np.outer(psi, psi.conj())


@dataclass
class ReturnAnalysis:
    """Everything known about the return of one ``(channel, psi)`` pair.

    ``q[t]`` for ``t = 0..L`` (``q[0] = 1``), ``p[t-1]`` is ``p_t`` for
    ``t = 1..L``, and ``partial_T[L']`` is the partial expected return time
    ``T^(L') = sum_{t<=L'} q_t`` for ``L' = 0..L``.
    """

    q: list = field(default_factory=list)
    p: list = field(default_factory=list)
    partial_T: list = field(default_factory=list)
    exact_T: float = math.nan
    recurrent: bool = False
    relevant_dim: int = 0
    psi_unital: bool = False
    method: str = "spectral"

    def to_dict(self) -> dict:
        return {
            "q": [float(x) for x in self.q],
            "p": [float(x) for x in self.p],
            "partial_T": [float(x) for x in self.partial_T],
            "exact_T": "inf" if math.isinf(self.exact_T) else float(self.exact_T),
            "recurrent": bool(self.recurrent),
            "relevant_dim": int(self.relevant_dim),
            "psi_unital": bool(self.psi_unital),
            "method": self.method,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "ReturnAnalysis":
        t = data["exact_T"]
        return cls(
            q=list(data["q"]),
            p=list(data["p"]),
            partial_T=list(data["partial_T"]),
            exact_T=math.inf if t == "inf" else float(t),
            recurrent=bool(data["recurrent"]),
            relevant_dim=int(data["relevant_dim"]),
            psi_unital=bool(data["psi_unital"]),
            method=data["method"],
        )

    @classmethod
    def from_json(cls, text: str) -> "ReturnAnalysis":
        return cls.from_dict(json.loads(text))


def return_series(channel: QuantumChannel, psi, horizon: int) -> ReturnAnalysis:
    """Survival and first-return probabilities up to ``horizon`` steps.

    Obtained by iterating :func:`conditional_step` on density matrices, so
    it is independent of the spectral machinery below.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    psi = _state(psi, channel.dim)
    rho = np.outer(psi, psi.conj())
    q = np.empty(horizon + 1)
    q[0] = 1.0
    for t in range(1, horizon + 1):
        rho = conditional_step(channel, psi, rho)
        q[t] = np.trace(rho).real
    p = q[:-1] - q[1:]
    return ReturnAnalysis(q=q.tolist(), p=p.tolist(), partial_T=np.cumsum(q).tolist(),
                          method="summation")


# -- spectral route ----------------------------------------------------------

@dataclass
class SpectralData:
    """Eigen-expansion of the conditional step on the relevant subspace.

    ``|psi><psi| = sum_n coefficients[n] * chi_n`` with
    ``F S[chi_n] F = eigenvalues[n] * chi_n`` and ``traces[n] = Tr chi_n``.
    """

    eigenvalues: np.ndarray
    coefficients: np.ndarray
    traces: np.ndarray
    defective: bool
    condition: float = 1.0

    @property
    def weights(self) -> np.ndarray:
        return self.coefficients * self.traces

    def expected_return(self) -> complex:
        """``sum_n c_n Tr(chi_n) / (1 - alpha_n)``; valid only when recurrent."""
        return complex(np.sum(self.weights / (1.0 - self.eigenvalues)))

    def partial(self, horizon: int) -> complex:
        """``sum_n c_n Tr(chi_n) (alpha_n^(L+1) - 1) / (alpha_n - 1)``."""
        a = self.eigenvalues
        near_one = np.abs(a - 1.0) < 1e-14
        safe = np.where(near_one, 0.0, a)
        geom = np.where(near_one, horizon + 1.0, (safe ** (horizon + 1) - 1.0) / (safe - 1.0))
        return complex(np.sum(self.weights * geom))


def spectral_data(superop: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> SpectralData:
    """Eigen-expansion of ``vec(|e0><e0|)`` for a conditional superoperator."""
    r = int(round(math.sqrt(superop.shape[0])))
    eig = eig_general(superop, tol)
    start = np.zeros(r * r, dtype=complex)
    start[0] = 1.0
    coeffs = eig.left @ start
    traces = vec(np.eye(r)) @ eig.right
    return SpectralData(eig.eigenvalues, coeffs, traces, eig.defective, eig.condition)


def _geometric_sum(superop: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    """``sum_{t<n} S^t v`` by repeated doubling."""
    size = superop.shape[0]
    total = np.zeros_like(v)
    block_sum = np.eye(size, dtype=complex)  # sum_{t<2^k} S^t
    block_pow = superop.copy()  # S^(2^k)
    shift = np.eye(size, dtype=complex)  # S^(terms already summed)
    while n:
        if n & 1:
            total = total + shift @ (block_sum @ v)
            shift = shift @ block_pow
        n >>= 1
        if n:
            block_sum = block_sum + block_pow @ block_sum
            block_pow = block_pow @ block_pow
    return total


def _recurrence_verdict(spec: SpectralData, tol: Tolerance) -> bool:
    mags = np.abs(spec.eigenvalues)
    w = np.abs(spec.weights)
    stuck = (mags >= 1.0 - tol.eps_rank) | (np.abs(1.0 - spec.eigenvalues) < tol.eps_rank)
    return not np.any(stuck & (w > tol.eps_converge))


def _summation_total(superop: np.ndarray, tol: Tolerance, max_horizon: int) -> float:
    r2 = superop.shape[0]
    r = int(round(math.sqrt(r2)))
    trace_row = vec(np.eye(r))
    x = np.zeros(r2, dtype=complex)
    x[0] = 1.0
    total = 1.0
    q_prev = 1.0
    for t in range(1, max_horizon + 1):
        x = superop @ x
        q = float((trace_row @ x).real)
        total += q
        if q <= tol.eps_converge * 1e-3:
            return total
        ratio = q / q_prev if q_prev > 0 else 1.0
        if t > 1 and ratio < 1.0 and q * ratio / (1.0 - ratio) < tol.eps_converge:
            return total
        q_prev = q
    raise NonConvergent(f"tail bound not met within {max_horizon} steps")


def _exact_from_superop(superop: np.ndarray, out: ReturnAnalysis, tol: Tolerance,
                        max_horizon: int) -> SpectralData:
    r2 = superop.shape[0]
    r = int(round(math.sqrt(r2)))
    spec = spectral_data(superop, tol)
    if spec.defective:
        out.method = "summation"
        try:
            out.exact_T = _summation_total(superop, tol, max_horizon)
            out.recurrent = True
        except NonConvergent:
            if float(np.max(np.abs(spec.eigenvalues))) < 1.0 - tol.eps_rank:
                raise
            out.exact_T, out.recurrent = math.inf, False
        return spec
    if not _recurrence_verdict(spec, tol):
        out.exact_T, out.recurrent = math.inf, False
        return spec
    start = np.zeros(r2, dtype=complex)
    start[0] = 1.0
    x = np.linalg.solve(np.eye(r2) - superop, start)
    total = complex(vec(np.eye(r)) @ x)
    if abs(total.imag) > tol.eps_check * max(1.0, abs(total.real)):
        raise NonConvergent(f"expected return time has imaginary part {total.imag:.3e}")
    out.exact_T = total.real
    out.recurrent = True
    return spec


def expected_return_spectral(channel: QuantumChannel, psi, tol: Tolerance = DEFAULT_TOL,
                             max_horizon: int = MAX_HORIZON) -> tuple:
    """Exact expected return time from the spectrum of the conditional step.

    The conditional superoperator on the relevant subspace is diagonalised;
    any mode with ``|alpha| >= 1 - eps_rank`` and non-negligible weight
    ``|c_n Tr chi_n|`` makes the walk non-recurrent (``exact_T = inf``).
    Otherwise the geometric series ``sum_n c_n Tr chi_n / (1 - alpha_n)`` is
    evaluated as ``Tr (1 - FS)^{-1} |psi><psi|``, which is the same sum but
    does not suffer from ill-conditioned eigenvectors. A defective spectrum
    falls back to summing ``q_t`` with a geometric tail bound.

    Returns
    -------
    (ReturnAnalysis, SpectralData)
        The analysis carries ``exact_T``, ``recurrent``, ``relevant_dim``
        and ``method``; the series fields are left empty.
    """
    basis = orbit_basis(channel, psi, tol)
    superop = conditional_superoperator(channel, psi, tol, basis)
    out = ReturnAnalysis(relevant_dim=basis.shape[1])
    spec = _exact_from_superop(superop, out, tol, max_horizon)
    return out, spec


def _is_infinite_horizon(h) -> bool:
    return h is None or (isinstance(h, (float, str)) and math.isinf(float(h)))


def analyse_horizons(channel: QuantumChannel, psi, horizons, tol: Tolerance = DEFAULT_TOL,
                     max_horizon: int = MAX_HORIZON) -> tuple:
    """Exact analysis plus ``T^(L)`` for each horizon, sharing one superoperator.

    Returns ``(ReturnAnalysis, [T^(L) for L in horizons])``; infinite
    horizons (``None`` or ``inf``) map to ``exact_T``.
    """
    basis = orbit_basis(channel, psi, tol)
    r = basis.shape[1]
    superop = conditional_superoperator(channel, psi, tol, basis)
    out = ReturnAnalysis(relevant_dim=r)
    _exact_from_superop(superop, out, tol, max_horizon)
    start = np.zeros(r * r, dtype=complex)
    start[0] = 1.0
    trace_row = vec(np.eye(r))
    values = []
    for h in horizons:
        if _is_infinite_horizon(h):
            values.append(out.exact_T)
        else:
            values.append(float((trace_row @ _geometric_sum(superop, start, int(h) + 1)).real))
    return out, values


def expected_return_partial(channel: QuantumChannel, psi, horizons,
                            tol: Tolerance = DEFAULT_TOL):
    """Partial expected return time ``T^(L) = sum_{t=0}^{L} q_t``.

    ``horizons`` may be an int or a sequence; ``None`` or ``inf`` entries give
    the exact value. Finite horizons are summed by repeated doubling of the
    restricted conditional superoperator, so ``L = 10^4`` costs a few dozen
    small matrix products.
    """
    scalar = horizons is None or np.isscalar(horizons)
    hs = [horizons] if scalar else list(horizons)
    _, values = analyse_horizons(channel, psi, hs, tol)
    return values[0] if scalar else values


def tilde_rho(channel: QuantumChannel, psi, tol: Tolerance = DEFAULT_TOL,
              max_horizon: int = MAX_HORIZON) -> np.ndarray:
    """``sum_{t>=0} rho_cond(t)``, summed until the trace increment is negligible."""
    psi = _state(psi, channel.dim)
    radius = conditional_spectral_radius(channel, psi, tol)
    if radius >= 1.0 - tol.eps_rank:
        raise NonRecurrent(f"conditional step has spectral radius {radius:.12f}")
    n = channel.dim
    superop = to_superoperator_matrix(channel, measurement_filter(psi, tol))
    x = vec(np.outer(psi, psi.conj()))
    trace_row = vec(np.eye(n))
    total = x.copy()
    for _ in range(max_horizon):
        x = superop @ x
        total += x
        if abs(trace_row @ x) < tol.eps_converge:
            return unvec(total, n)
    raise NonConvergent(f"partial sums did not settle within {max_horizon} steps")


def conditional_spectral_radius(channel: QuantumChannel, psi, tol: Tolerance = DEFAULT_TOL) -> float:
    """Largest ``|alpha|`` of the conditional step on the relevant subspace."""
    superop = conditional_superoperator(channel, psi, tol)
    return float(np.max(np.abs(np.linalg.eigvals(superop))))


def quantization_verdict(channel: QuantumChannel, psi, tol: Tolerance = DEFAULT_TOL,
                         horizon: int = 0,
                         quantization_tol: float = QUANTIZATION_TOL) -> ReturnAnalysis:
    """Full analysis, checking ``T = dim(relevant subspace)`` for Psi-unital walks.

    Raises
    ------
    TheoremViolation
        If the walk is unital on its relevant subspace but the computed
        return time is not its dimension within ``quantization_tol``.
    """
    psi = _state(psi, channel.dim)
    pi, rdim = relevant_subspace(channel, psi, tol)
    analysis, _ = expected_return_spectral(channel, psi, tol)
    if horizon > 0:
        series = return_series(channel, psi, horizon)
        analysis.q, analysis.p, analysis.partial_T = series.q, series.p, series.partial_T
    else:
        analysis.q, analysis.p, analysis.partial_T = [1.0], [], [1.0]
    analysis.relevant_dim = rdim
    analysis.psi_unital = is_unital_on(channel, pi, tol)
    if analysis.psi_unital:
        defect = abs(analysis.exact_T - rdim)
        if not defect < quantization_tol:
            raise TheoremViolation(
                f"Psi-unital walk has T = {analysis.exact_T!r} but relevant dim {rdim}",
                defect, analysis,
            )
    return analysis


# -- classical limit ---------------------------------------------------------

def classical_kac_oracle(p, j: int, tol: Tolerance = DEFAULT_TOL) -> float:
    """Mean return time to state ``j`` of a Markov chain, by Kac's lemma.

    ``p[a, b]`` is the probability to step from ``a`` to ``b``. Returns
    ``inf`` when ``j`` is transient, otherwise ``1 / pi_j`` for the stationary
    distribution of the closed class of ``j``.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise NotStochastic("transition matrix must be square")
    if np.any(p < -tol.eps_check) or np.max(np.abs(p.sum(axis=1) - 1.0)) > tol.eps_check:
        raise NotStochastic("rows must be non-negative and sum to one")
    edges = p > tol.eps_converge
    reach = _reachable(edges, j)
    for k in np.flatnonzero(reach):
        if not _reachable(edges, k)[j]:
            return math.inf
    idx = np.flatnonzero(reach)
    sub = p[np.ix_(idx, idx)]
    evals, evecs = np.linalg.eig(sub.T)
    stat = np.real(evecs[:, np.argmin(np.abs(evals - 1.0))])
    stat = stat / stat.sum()
    return float(1.0 / stat[np.searchsorted(idx, j)])


def _reachable(edges: np.ndarray, start: int) -> np.ndarray:
    seen = np.zeros(len(edges), dtype=bool)
    seen[start] = True
    frontier = [start]
    while frontier:
        nxt = np.flatnonzero(edges[frontier].any(axis=0) & ~seen)
        seen[nxt] = True
        frontier = list(nxt)
    return seen


def diagonal_markov_matrix(channel: QuantumChannel) -> np.ndarray:
    """Transition matrix ``P[a, b] = <b|S[|a><a|]|b>`` of the node populations."""
    n = channel.dim
    return np.array([np.diag(apply(channel, np.diag(np.eye(n)[a]).astype(complex))).real
                     for a in range(n)])
