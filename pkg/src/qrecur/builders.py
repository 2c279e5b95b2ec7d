"""Channel families and special states for walks on small graphs.

Nodes are labelled ``0 .. M-1``; the walk normally starts on node 0.

Random constructors take a ``seed`` which may be an integer, a
``numpy.random.SeedSequence`` or an already-built ``Generator``. Integer
and ``SeedSequence`` seeds are fed to the counter-based Philox bit
generator, so a given seed yields the same stream on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import QuantumChannel, compose, identity_channel, unitary_channel
from .errors import IndexOutOfRange, RateOutOfRange, ZeroHopping
from .numerics import DEFAULT_TOL, Tolerance, unitary_from_hamiltonian


def make_rng(seed) -> np.random.Generator:
    """Philox generator from an int or SeedSequence; generators pass through."""
    if seed is None:
        raise ValueError("an explicit seed is required for random builders")
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.Philox(seed))


def basis_state(dim: int, j: int = 0) -> np.ndarray:
    if not 0 <= j < dim:
        raise IndexOutOfRange(f"node {j} outside 0..{dim - 1}")
    e = np.zeros(dim, dtype=complex)
    e[j] = 1.0
    return e


def _check_rate(d: float) -> float:
    d = float(d)
    if not 0.0 <= d <= 1.0:
        raise RateOutOfRange(f"rate {d!r} outside [0, 1]")
    return d


@dataclass(frozen=True)
class StarGraphSpec:
    """Star graph with centre 0 and leaves ``1 .. M-1``.

    ``hoppings[l-1]`` is the amplitude ``v_l`` on the edge between the centre
    and leaf ``l``.
    """

    hoppings: tuple
    decoherence_rate: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.hoppings, dtype=complex).ravel()
        if v.size < 1:
            raise ValueError("a star graph needs at least one leaf")
        if np.any(np.abs(v) == 0):
            raise ZeroHopping("all hopping amplitudes must be nonzero")
        object.__setattr__(self, "hoppings", tuple(v))
        object.__setattr__(self, "decoherence_rate", _check_rate(self.decoherence_rate))

    @property
    def nodes(self) -> int:
        return len(self.hoppings) + 1

    @property
    def v(self) -> np.ndarray:
        return np.array(self.hoppings, dtype=complex)

    @property
    def vbar(self) -> float:
        return float(np.linalg.norm(self.v))


def sample_disk(rng: np.random.Generator, n: int, radius: float = 1.0) -> np.ndarray:
    """``n`` points uniform on the open complex disk, by rejection from the square."""
    out = np.empty(n, dtype=complex)
    filled = 0
    while filled < n:
        x, y = rng.uniform(-radius, radius, size=2)
        z = complex(x, y)
        if 0.0 < abs(z) < radius:
            out[filled] = z
            filled += 1
    return out


def random_star_spec(nodes: int, decoherence_rate: float, seed, radius: float = 1.0) -> StarGraphSpec:
    rng = make_rng(seed)
    return StarGraphSpec(tuple(sample_disk(rng, nodes - 1, radius)), decoherence_rate)


def star_hamiltonian(spec: StarGraphSpec) -> np.ndarray:
    m = spec.nodes
    h = np.zeros((m, m), dtype=complex)
    h[1:, 0] = spec.v
    h[0, 1:] = spec.v.conj()
    return h


def uniform_decoherence(nodes: int, d: float) -> QuantumChannel:
    """Dephasing in the node basis: off-diagonals shrink by ``1 - d``.

    Kraus set ``{sqrt(d) |j><j|}_j`` followed by ``sqrt(1-d) I``.
    """
    d = _check_rate(d)
    ops = []
    for j in range(nodes):
        b = np.zeros((nodes, nodes), dtype=complex)
        b[j, j] = np.sqrt(d)
        ops.append(b)
    ops.append(np.sqrt(1.0 - d) * np.eye(nodes))
    return QuantumChannel(ops)


def star_channel(spec: StarGraphSpec, tol: Tolerance = DEFAULT_TOL) -> QuantumChannel:
    """``rho -> D[U rho U^dag]`` with ``U = exp(-iH)`` for the star Hamiltonian."""
    u = unitary_from_hamiltonian(star_hamiltonian(spec), tol)
    return compose(uniform_decoherence(spec.nodes, spec.decoherence_rate), unitary_channel(u, tol))


def population_transfer(nodes: int, target: int, d: float, source: int | None = None) -> QuantumChannel:
    """Partial incoherent transfer of population from ``source`` to ``target``.

    ``source`` defaults to ``(target + 1) mod M``. Kraus operators are
    ``sqrt(d) |target><source|`` and ``I + (sqrt(1-d) - 1) |source><source|``;
    the damping sits on the source site, which is what makes the pair
    trace preserving.
    """
    d = _check_rate(d)
    if not 0 <= target < nodes:
        raise IndexOutOfRange(f"target {target} outside 0..{nodes - 1}")
    if source is None:
        source = (target + 1) % nodes
    if not 0 <= source < nodes:
        raise IndexOutOfRange(f"source {source} outside 0..{nodes - 1}")
    if source == target:
        raise ValueError("source and target must differ")
    b0 = np.zeros((nodes, nodes), dtype=complex)
    b0[target, source] = np.sqrt(d)
    b1 = np.eye(nodes, dtype=complex)
    b1[source, source] = np.sqrt(1.0 - d)
    return QuantumChannel([b0, b1])


def loop_transfer(nodes: int, d: float) -> QuantumChannel:
    """Transfer ``j+1 -> j`` around the directed loop ``0 -> M-1 -> ... -> 1 -> 0``."""
    d = _check_rate(d)
    ops = []
    for j in range(nodes):
        b = np.zeros((nodes, nodes), dtype=complex)
        b[j, (j + 1) % nodes] = np.sqrt(d)
        ops.append(b)
    ops.append(np.sqrt(1.0 - d) * np.eye(nodes))
    return QuantumChannel(ops)


def cue_unitary(nodes: int, seed) -> np.ndarray:
    """Haar-random unitary (QR of a complex Ginibre matrix with phase fixing)."""
    rng = make_rng(seed)
    z = (rng.standard_normal((nodes, nodes)) + 1j * rng.standard_normal((nodes, nodes))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def random_disk_hamiltonian(nodes: int, radius: float, seed, include_diagonal: bool = True) -> np.ndarray:
    """Hermitian matrix with off-diagonal entries uniform on the disk of ``radius``.

    Diagonal entries are uniform on ``[-radius, radius]`` (or zero when
    ``include_diagonal`` is false). Entries are drawn row by row over the
    upper triangle.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    rng = make_rng(seed)
    h = np.zeros((nodes, nodes), dtype=complex)
    for i in range(nodes):
        if include_diagonal:
            x = rng.uniform(-radius, radius)
            while abs(x) >= radius:
                x = rng.uniform(-radius, radius)
            h[i, i] = x
        if i + 1 < nodes:
            h[i, i + 1:] = sample_disk(rng, nodes - i - 1, radius)
    iu = np.triu_indices(nodes, 1)
    h[iu[1], iu[0]] = h[iu].conj()
    return h


def dark_states(spec: StarGraphSpec) -> list:
    """The ``M-2`` normalised zero-energy states with no weight on node 0.

    ``|Psi_j> ~ sum_l exp(i j l 2 pi / (M-1)) / conj(v_l) |l>`` for
    ``j = 1..M-2``. The phases run over the ``M-1`` leaves, so the hopping
    terms into node 0 cancel as a full sum of roots of unity.
    """
    m = spec.nodes
    v = spec.v
    l = np.arange(1, m)
    out = []
    for j in range(1, m - 1):
        psi = np.zeros(m, dtype=complex)
        psi[1:] = np.exp(2j * np.pi * j * l / (m - 1)) / v.conj()
        out.append(psi / np.linalg.norm(psi))
    return out


def plus_minus_states(spec: StarGraphSpec) -> tuple:
    """The two eigenstates ``(|0> +- |v>)/sqrt(2)`` with energies ``+-vbar``."""
    m = spec.nodes
    vket = np.zeros(m, dtype=complex)
    vket[1:] = spec.v / spec.vbar
    e0 = basis_state(m, 0)
    return (e0 + vket) / np.sqrt(2.0), (e0 - vket) / np.sqrt(2.0)


# -- config-driven construction --------------------------------------------

FAMILIES = ("identity", "star", "decoherence", "transfer", "loop", "cue", "disk_hamiltonian", "unitary")


def _pairs_to_complex(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim >= 1 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    raise ValueError("complex values must be [re, im] pairs")


def _unitary_from_config(cfg, nodes: int, rng) -> np.ndarray:
    """Unitary part of a composite walk.

    ``cfg`` is ``"identity"``, ``"cue"``, a matrix of ``[re, im]`` pairs, or a
    dict ``{"family": "cue" | "disk_hamiltonian", ...}``.
    """
    if cfg is None or cfg == "identity":
        return np.eye(nodes, dtype=complex)
    if cfg == "cue":
        cfg = {"family": "cue"}
    if isinstance(cfg, dict):
        fam = cfg.get("family")
        src = cfg.get("seed", rng)
        if fam == "cue":
            return cue_unitary(nodes, src)
        if fam == "disk_hamiltonian":
            h = random_disk_hamiltonian(
                nodes, float(cfg.get("radius", 0.1)), src,
                include_diagonal=bool(cfg.get("include_diagonal", True)),
            )
            return unitary_from_hamiltonian(h)
        raise ValueError(f"unknown unitary family {fam!r}")
    return _pairs_to_complex(cfg)


def build_channel(cfg: dict, seed=None) -> QuantumChannel:
    """Construct a channel from a JSON-style builder spec.

    Recognised families (extra keys in brackets)::

        identity          [M]
        decoherence       [M, d]
        star              [d, hoppings: [[re, im], ...] | "random", M, radius]
        transfer          [M, target, d, source, unitary]
        loop              [M, d, unitary]
        cue               [M, seed]
        disk_hamiltonian  [M, radius, seed, include_diagonal]
        unitary           [matrix]

    Random parts draw from ``cfg["seed"]`` when present, else from ``seed``.
    """
    fam = cfg.get("family")
    if fam not in FAMILIES:
        raise ValueError(f"unknown builder family {fam!r}")
    src = cfg["seed"] if "seed" in cfg else seed
    rng = make_rng(src) if src is not None else None

    if fam == "identity":
        return identity_channel(int(cfg["M"]))
    if fam == "decoherence":
        return uniform_decoherence(int(cfg["M"]), cfg["d"])
    if fam == "star":
        hop = cfg.get("hoppings", "random")
        if hop == "random":
            spec = random_star_spec(int(cfg["M"]), cfg.get("d", 0.0), rng, float(cfg.get("radius", 1.0)))
        else:
            spec = StarGraphSpec(tuple(_pairs_to_complex(hop)), cfg.get("d", 0.0))
        return star_channel(spec)
    if fam == "transfer":
        m = int(cfg["M"])
        u = _unitary_from_config(cfg.get("unitary"), m, rng)
        step = population_transfer(m, int(cfg["target"]), cfg["d"], cfg.get("source"))
        return compose(step, unitary_channel(u))
    if fam == "loop":
        m = int(cfg["M"])
        u = _unitary_from_config(cfg.get("unitary"), m, rng)
        return compose(loop_transfer(m, cfg["d"]), unitary_channel(u))
    if fam == "cue":
        return unitary_channel(cue_unitary(int(cfg["M"]), rng))
    if fam == "disk_hamiltonian":
        h = random_disk_hamiltonian(
            int(cfg["M"]), float(cfg.get("radius", 0.1)), rng,
            include_diagonal=bool(cfg.get("include_diagonal", True)),
        )
        return unitary_channel(unitary_from_hamiltonian(h))
    return unitary_channel(_pairs_to_complex(cfg["matrix"]))
