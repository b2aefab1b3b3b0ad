import numpy as np
import pytest

from channel_forge import (
    KrausSet,
    NumericalDeadEnd,
    apply_channel_exact,
    channel_distance,
    identity_channel,
    minimal_kraus,
    monte_carlo,
    run_instrument,
    run_povm,
    run_trajectory,
    synthesize,
)
from channel_forge.applications import corner_transpose_channel
from channel_forge.channel_repr import DimensionMismatch
from channel_forge.simulator import enumerate_paths, povm_elements
from channel_forge.tree_synthesis import AdaptiveCircuit

from oracles import (
    amplitude_damping,
    apply_kraus,
    choi_by_units,
    corner_transpose_direct,
    random_density,
    random_kraus,
    trace_distance,
)


def damping_circuit(gamma):
    return synthesize(KrausSet(amplitude_damping(gamma)))


def test_identity_circuit_is_identity(rng):
    c = synthesize(KrausSet([np.eye(3)]))
    rho = random_density(3, 2, rng)
    np.testing.assert_allclose(apply_channel_exact(c, rho), rho, atol=1e-14)
    rec = run_trajectory(c, rho, 1)
    assert rec.outcome_bits == "0"
    np.testing.assert_allclose(rec.final_state, rho, atol=1e-14)


def test_full_decay():
    out = apply_channel_exact(damping_circuit(1.0), np.diag([0.0, 1.0]))
    np.testing.assert_allclose(out, np.diag([1.0, 0.0]), atol=1e-15)


def test_corner_coherence_matches_formula():
    c = synthesize(corner_transpose_channel(3).kraus)
    rho = np.zeros((3, 3), dtype=complex)
    rho[0, 2] = 1.0
    np.testing.assert_allclose(apply_channel_exact(c, rho), corner_transpose_direct(rho), atol=1e-12)


def test_ket_input_is_accepted():
    c = damping_circuit(0.5)
    np.testing.assert_allclose(apply_channel_exact(c, np.array([0, 1])), np.diag([0.5, 0.5]), atol=1e-15)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        apply_channel_exact(damping_circuit(0.1), np.eye(3) / 3)


def test_path_probabilities_match_leaf_born_rule(rng):
    k = minimal_kraus(KrausSet(random_kraus(4, 6, rng)))
    c = synthesize(k)
    rho = random_density(4, 4, rng)
    paths = {b: p for b, p, _ in enumerate_paths(c, rho)}
    assert sum(paths.values()) == pytest.approx(1, abs=1e-9)
    for bits, p in paths.items():
        op = c.leaf_kraus[bits]
        assert p == pytest.approx(np.trace(op @ rho @ op.conj().T).real, abs=1e-12)


def test_dead_end_detected():
    c = AdaptiveCircuit.from_blocks({"": (np.zeros((2, 2)), np.zeros((2, 2)))})
    with pytest.raises(NumericalDeadEnd):
        run_trajectory(c, np.eye(2) / 2, 0)


def test_monte_carlo_determinism_and_single_run(rng, monkeypatch):
    c = synthesize(minimal_kraus(KrausSet(random_kraus(3, 5, rng))))
    rho = random_density(3, 1, rng)
    a = monte_carlo(c, rho, 200, seed=11)
    monkeypatch.setenv("CHANNEL_FORGE_THREADS", "1")
    b = monte_carlo(c, rho, 200, seed=11)
    np.testing.assert_array_equal(a.state, b.state)
    assert a.histogram == b.histogram
    one = monte_carlo(c, rho, 1, seed=5)
    np.testing.assert_array_equal(one.state, one.records[0].final_state)


def test_monte_carlo_converges_on_damping():
    c = damping_circuit(0.3)
    rho = np.full((2, 2), 0.5)
    mc = monte_carlo(c, rho, 10_000, seed=3)
    assert trace_distance(mc.state, apply_channel_exact(c, rho)) <= 0.05


def test_instrument_limits(rng):
    c = synthesize(minimal_kraus(KrausSet(random_kraus(3, 8, rng))))
    rho = random_density(3, 3, rng)
    exact = apply_channel_exact(c, rho)
    full = run_instrument(c, rho, 0)
    assert list(full.outcomes) == [""]
    np.testing.assert_allclose(full.outcomes[""][1], exact, atol=1e-12)
    for keep in range(c.depth + 1):
        res = run_instrument(c, rho, keep)
        assert sum(res.probabilities().values()) == pytest.approx(1, abs=1e-9)
        np.testing.assert_allclose(res.average_state(), exact, atol=1e-9)


def test_projective_measurement_instrument():
    p0, p1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    c = synthesize(KrausSet([p0, p1]))
    res = run_instrument(c, np.full((2, 2), 0.5), 1)
    assert res.probabilities() == pytest.approx({"0": 0.5, "1": 0.5})
    np.testing.assert_allclose(res.outcomes["1"][1], p1, atol=1e-15)
    assert run_povm(c, p0, 1) == pytest.approx({"0": 1.0, "1": 0.0})


def test_povm_elements(rng):
    c = synthesize(minimal_kraus(KrausSet(random_kraus(3, 9, rng))))
    pis = povm_elements(c, 2)
    np.testing.assert_allclose(sum(pis.values()), np.eye(3), atol=1e-9)
    rho = random_density(3, 2, rng)
    probs = run_povm(c, rho, 2)
    inst = run_instrument(c, rho, 2).probabilities()
    for mu in probs:
        assert probs[mu] == pytest.approx(inst.get(mu, 0.0), abs=1e-10)
    mixed = run_povm(c, np.eye(3) / 3, 2)
    for mu, pi in pis.items():
        assert mixed[mu] == pytest.approx(np.trace(pi).real / 3, abs=1e-12)


def test_channel_distance_examples():
    ident = identity_channel(2)
    assert channel_distance(ident, ident) == 0
    depol = KrausSet([np.eye(2) / 2, np.array([[0, 1], [1, 0]]) / 2, np.array([[0, -1j], [1j, 0]]) / 2, np.diag([1, -1]) / 2])
    ref = np.linalg.norm(choi_by_units(lambda r: r, 2) - choi_by_units(lambda r: apply_kraus(depol.ops, r), 2))
    assert channel_distance(ident, depol) == pytest.approx(ref)
    assert ref == pytest.approx(np.sqrt(3))
    k = minimal_kraus(KrausSet(random_kraus(3, 4, np.random.default_rng(0))))
    assert channel_distance(synthesize(k), k) < 1e-8
