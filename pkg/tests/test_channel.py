import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrecur import (
    QuantumChannel,
    apply,
    compose,
    cue_unitary,
    dual,
    identity_channel,
    is_unital_on,
    load_channel,
    loop_transfer,
    measurement_filter,
    population_transfer,
    random_star_spec,
    restrict,
    save_channel,
    star_channel,
    plus_minus_states,
    to_superoperator_matrix,
    unitary_channel,
    uniform_decoherence,
    validate,
)
from qrecur.channel import choi_matrix, unvec, vec
from qrecur.errors import DimensionMismatch, NotNormalized, NotTracePreserving

from conftest import random_density, random_kraus_channel, random_unitary_mixture

SX = np.array([[0, 1], [1, 0]], dtype=complex)


def same_action(a, b, tol=1e-9):
    return np.max(np.abs(to_superoperator_matrix(a) - to_superoperator_matrix(b))) < tol


class TestConstruction:
    def test_rejects_unnormalised(self):
        with pytest.raises(NotTracePreserving):
            QuantumChannel([0.5 * np.eye(2)])

    def test_unchecked(self):
        assert QuantumChannel([0.5 * np.eye(2)], check=False).dim == 2

    def test_rejects_non_square(self):
        with pytest.raises(DimensionMismatch):
            QuantumChannel([np.ones((2, 3))], check=False)

    def test_immutable(self):
        ch = identity_channel(2)
        with pytest.raises(ValueError):
            ch.kraus[0, 0, 0] = 2
        with pytest.raises(AttributeError):
            ch.foo = 1


class TestApply:
    def test_identity(self, rng):
        rho = random_density(3, rng)
        assert np.allclose(apply(identity_channel(3), rho), rho)

    def test_full_dephasing(self):
        rho = np.array([[0.5, 0.5], [0.5, 0.5]])
        assert np.allclose(apply(uniform_decoherence(2, 1.0), rho), np.diag([0.5, 0.5]))

    def test_swap(self):
        out = apply(unitary_channel(SX), np.diag([1.0, 0.0]))
        assert np.allclose(out, np.diag([0.0, 1.0]))

    def test_dim_mismatch(self):
        with pytest.raises(DimensionMismatch):
            apply(identity_channel(2), np.eye(3))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(1, 4))
    def test_trace_and_positivity(self, seed, dim, n_kraus):
        rng = np.random.default_rng(seed)
        ch = random_kraus_channel(dim, n_kraus, rng)
        rho = random_density(dim, rng)
        out = apply(ch, rho)
        assert abs(np.trace(out) - 1) < 1e-9
        assert np.linalg.eigvalsh(0.5 * (out + out.conj().T)).min() > -1e-9


class TestValidate:
    def test_identity(self):
        r = validate(identity_channel(3))
        assert r.trace_preserving and r.completely_positive and r.unital_global
        assert r.max_normalization_defect == 0 and r.max_unitality_defect == 0

    def test_population_transfer_not_unital(self):
        r = validate(population_transfer(6, target=0, d=0.5, source=1))
        assert r.trace_preserving and not r.unital_global

    def test_loop_after_unitary_is_unital(self):
        ch = compose(loop_transfer(6, 0.3), unitary_channel(cue_unitary(6, 5)))
        assert validate(ch).unital_global

    def test_choi_of_identity(self):
        choi = choi_matrix(identity_channel(2))
        assert np.allclose(choi, vec(np.eye(2))[:, None] * vec(np.eye(2)).conj()[None, :])

    def test_unnormalised_report(self):
        r = validate(QuantumChannel([0.5 * np.eye(2)], check=False))
        assert not r.trace_preserving
        assert r.max_normalization_defect == pytest.approx(0.75)


class TestDual:
    def test_unitary(self):
        u = cue_unitary(3, 1)
        assert np.allclose(dual(unitary_channel(u)).kraus[0], u.conj().T)

    def test_decoherence_self_dual(self):
        ch = uniform_decoherence(4, 0.3)
        assert same_action(dual(ch), ch)

    def test_non_unital_dual_preserves_identity(self):
        ch = population_transfer(5, 0, 0.4)
        d = dual(ch)  # unvalidated Kraus set
        assert np.allclose(apply(d, np.eye(5)), np.eye(5))

    def test_unital_dual_is_trace_preserving(self, rng):
        ch = random_unitary_mixture(3, 3, rng)
        assert validate(dual(ch)).trace_preserving


class TestCompose:
    def test_identity(self, rng):
        ch = random_kraus_channel(3, 2, rng)
        assert same_action(compose(identity_channel(3), ch), ch)

    def test_ordering(self):
        u, v = cue_unitary(3, 1), cue_unitary(3, 2)
        assert np.allclose(compose(unitary_channel(v), unitary_channel(u)).kraus[0], v @ u)

    def test_decoherence_after_unitary(self, rng):
        u = cue_unitary(4, 9)
        ch = compose(uniform_decoherence(4, 0.3), unitary_channel(u))
        rho = random_density(4, rng)
        mid = u @ rho @ u.conj().T
        expected = np.where(np.eye(4, dtype=bool), mid, 0.7 * mid)
        assert np.allclose(apply(ch, rho), expected)

    def test_associative(self, rng):
        a, b, c = (random_kraus_channel(3, 2, rng) for _ in range(3))
        assert same_action(compose(compose(a, b), c), compose(a, compose(b, c)))

    def test_normalised(self, rng):
        ch = compose(random_kraus_channel(3, 2, rng), random_kraus_channel(3, 3, rng))
        assert validate(ch).trace_preserving
        assert len(ch) == 6


class TestRestrict:
    def test_identity_projector(self, rng):
        ch = random_kraus_channel(3, 2, rng)
        assert same_action(restrict(ch, np.eye(3)), ch)

    def test_zero_projector(self, rng):
        ch = random_kraus_channel(3, 2, rng)
        assert np.all(restrict(ch, np.zeros((3, 3))).kraus == 0)

    def test_star_plus_minus_span_invariant(self):
        spec = random_star_spec(6, 0.0, 4)
        ch = star_channel(spec)
        plus, minus = plus_minus_states(spec)
        pi = np.outer(plus, plus.conj()) + np.outer(minus, minus.conj())
        r = restrict(ch, pi)
        for a in (plus, minus):
            for b in (plus, minus):
                x = np.outer(a, b.conj())
                out = apply(r, x)
                assert np.max(np.abs(pi @ out @ pi - out)) < 1e-9


class TestFilter:
    def test_basis_state(self):
        assert np.allclose(measurement_filter(np.array([1, 0])), np.diag([0, 1]))

    def test_superposition(self):
        psi = np.array([1, 1]) / np.sqrt(2)
        assert np.allclose(measurement_filter(psi), [[0.5, -0.5], [-0.5, 0.5]])

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 7))
    def test_trace(self, seed, dim):
        rng = np.random.default_rng(seed)
        psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        psi /= np.linalg.norm(psi)
        assert np.trace(measurement_filter(psi)).real == pytest.approx(dim - 1)

    def test_not_normalised(self):
        with pytest.raises(NotNormalized):
            measurement_filter(np.array([1.0, 1.0]))


class TestSuperoperator:
    def test_identity(self):
        assert np.allclose(to_superoperator_matrix(identity_channel(3)), np.eye(9))

    def test_vec_convention(self, rng):
        a = rng.standard_normal((3, 3))
        b = rng.standard_normal((3, 3))
        rho = rng.standard_normal((3, 3))
        assert np.allclose(vec(a @ rho @ b), np.kron(b.T, a) @ vec(rho))
        assert np.allclose(unvec(vec(rho), 3), rho)

    def test_matches_kraus_application(self, rng):
        ch = random_kraus_channel(4, 3, rng)
        s = to_superoperator_matrix(ch)
        for _ in range(20):
            rho = random_density(4, rng)
            assert np.max(np.abs(unvec(s @ vec(rho), 4) - apply(ch, rho))) < 1e-9

    def test_filtered(self, rng):
        ch = random_kraus_channel(3, 2, rng)
        f = measurement_filter(np.array([0, 1, 0]))
        rho = random_density(3, rng)
        s = to_superoperator_matrix(ch, f)
        assert np.allclose(unvec(s @ vec(rho), 3), f @ apply(ch, rho) @ f)

    @pytest.mark.parametrize("seed", range(5))
    def test_filtered_unitary_contracts(self, seed):
        ch = unitary_channel(cue_unitary(4, seed))
        s = to_superoperator_matrix(ch, measurement_filter(np.eye(4)[0]))
        assert np.max(np.abs(np.linalg.eigvals(s))) <= 1 + 1e-9


class TestUnitalOn:
    def test_unitary_invariant_subspace(self):
        u = np.zeros((4, 4), dtype=complex)
        u[:2, :2] = cue_unitary(2, 1)
        u[2:, 2:] = cue_unitary(2, 2)
        pi = np.diag([1, 1, 0, 0]).astype(complex)
        assert is_unital_on(unitary_channel(u), pi)

    def test_star_decoherence_unital(self):
        assert is_unital_on(star_channel(random_star_spec(6, 0.1, 3)), np.eye(6))

    def test_population_transfer_step(self):
        ch = compose(population_transfer(6, 5, 0.5), unitary_channel(cue_unitary(6, 3)))
        assert not is_unital_on(ch, np.eye(6))


class TestSteadyStates:
    """Fixed points of unital channels are fixed by the dual and commute with Kraus operators."""

    @staticmethod
    def fixed_points(ch):
        s = to_superoperator_matrix(ch) - np.eye(ch.dim**2)
        _, sv, vh = np.linalg.svd(s)
        return [unvec(vh[i].conj(), ch.dim) for i in np.flatnonzero(sv < 1e-9)]

    def unital_channels(self):
        block = np.zeros((4, 4), dtype=complex)
        block[:2, :2] = cue_unitary(2, 1)
        block[2:, 2:] = cue_unitary(2, 2)
        block2 = np.zeros((4, 4), dtype=complex)
        block2[:2, :2] = cue_unitary(2, 3)
        block2[2:, 2:] = cue_unitary(2, 4)
        yield QuantumChannel([np.sqrt(0.4) * block, np.sqrt(0.6) * block2])
        yield star_channel(random_star_spec(6, 0.0, 1))
        yield star_channel(random_star_spec(5, 0.4, 2))
        yield compose(loop_transfer(5, 0.5), unitary_channel(cue_unitary(5, 8)))

    def test_dual_fixes_steady_states(self):
        for ch in self.unital_channels():
            sd = to_superoperator_matrix(dual(ch))
            chis = self.fixed_points(ch)
            assert chis
            for chi in chis:
                assert np.max(np.abs(unvec(sd @ vec(chi), ch.dim) - chi)) < 1e-9

    def test_steady_states_commute_with_kraus(self):
        for ch in self.unital_channels():
            for chi in self.fixed_points(ch):
                for a in ch.kraus:
                    assert np.max(np.abs(a @ chi - chi @ a)) < 1e-8


class TestFileFormat:
    def test_round_trip(self, tmp_path, rng):
        ch = random_kraus_channel(3, 2, rng)
        path = tmp_path / "ch.json"
        save_channel(ch, path)
        back = load_channel(path)
        assert np.array_equal(back.kraus, ch.kraus)
        data = json.loads(path.read_text())
        assert data["dim"] == 3 and len(data["kraus"]) == 2
        assert len(data["kraus"][0][0][0]) == 2

    def test_shape_mismatch(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"dim": 3, "kraus": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]}))
        with pytest.raises(DimensionMismatch):
            load_channel(path)
