import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from channel_forge import (
    ChannelSpec,
    ChoiMatrix,
    KrausSet,
    NotCompletelyPositive,
    SuperOperator,
    channel_determinant,
    choi_distance,
    choi_to_kraus,
    choi_to_superop,
    identity_channel,
    kraus_magnitudes,
    kraus_rank,
    kraus_to_choi,
    kraus_to_superop,
    minimal_kraus,
    superop_to_choi,
    validate_cptp,
)
from channel_forge.channel_repr import DimensionMismatch, pad_to_square

from oracles import amplitude_damping, choi_by_units, random_kraus, superop_by_units, apply_kraus

X = np.array([[0, 1], [1, 0]], dtype=complex)


def bit_flip(p):
    return [np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * X]


def test_identity_superop_is_identity():
    np.testing.assert_allclose(kraus_to_superop(KrausSet([np.eye(2)])).matrix, np.eye(4))


def test_bit_flip_superop_entries():
    t = kraus_to_superop(KrausSet(bit_flip(0.25))).matrix
    assert t[0, 0] == pytest.approx(0.75)
    assert t[0, 3] == pytest.approx(0.25)
    np.testing.assert_allclose(t, superop_by_units(lambda r: apply_kraus(bit_flip(0.25), r), 2), atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_superop_applies_like_kraus(rng, d):
    ops = random_kraus(d, 3, rng)
    rho = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    s = kraus_to_superop(KrausSet(ops))
    np.testing.assert_allclose(s.apply(rho), apply_kraus(ops, rho), atol=1e-12)


def test_kraus_set_rejects_mixed_dimensions():
    with pytest.raises(DimensionMismatch):
        KrausSet([np.eye(2), np.eye(3)])


def test_identity_choi_is_rank_one_with_eigenvalue_d():
    c = superop_to_choi(SuperOperator(np.eye(4)))
    omega = np.eye(2).reshape(-1)
    np.testing.assert_allclose(c.matrix, np.outer(omega, omega))
    np.testing.assert_allclose(c.spectrum(), [2, 0, 0, 0], atol=1e-14)


def test_depolarizing_choi_is_half_identity():
    ops = [np.eye(2) / 2, X / 2, np.array([[0, -1j], [1j, 0]]) / 2, np.diag([1, -1]) / 2]
    np.testing.assert_allclose(kraus_to_choi(KrausSet(ops)).matrix, np.eye(4) / 2, atol=1e-15)


def test_choi_matches_unit_oracle(rng):
    ops = random_kraus(3, 4, rng)
    ref = choi_by_units(lambda r: apply_kraus(ops, r), 3)
    m = kraus_to_choi(KrausSet(ops)).matrix
    np.testing.assert_allclose(m, ref, atol=1e-13)
    assert np.trace(m).real == pytest.approx(3)
    assert np.linalg.eigvalsh(m)[0] > -1e-12


def test_choi_superop_reshuffle_is_involution(rng):
    t = kraus_to_superop(KrausSet(random_kraus(3, 2, rng)))
    np.testing.assert_allclose(choi_to_superop(superop_to_choi(t)).matrix, t.matrix, atol=1e-15)


def test_identity_choi_gives_identity_kraus():
    omega = np.eye(2).reshape(-1)
    k = choi_to_kraus(ChoiMatrix(np.outer(omega, omega)))
    assert len(k) == 1
    np.testing.assert_allclose(k[0], np.eye(2), atol=1e-15)


def test_damping_choi_gives_two_kraus():
    k = choi_to_kraus(kraus_to_choi(KrausSet(amplitude_damping(0.3))))
    assert len(k) == 2
    assert sum(kraus_magnitudes(k)) == pytest.approx(2)
    assert choi_distance(k, KrausSet(amplitude_damping(0.3))) < 1e-14


def test_choi_eigenvalue_under_threshold_is_dropped():
    v1 = np.eye(2).reshape(-1) / np.sqrt(2)
    v2 = np.array([0, 1, 0, 0])
    m = 2 * np.outer(v1, v1) + 5e-11 * np.outer(v2, v2)
    assert len(choi_to_kraus(ChoiMatrix(m))) == 1
    assert len(choi_to_kraus(ChoiMatrix(m), threshold=1e-11)) == 2


def test_choi_to_kraus_rejects_negative_spectrum():
    swap = np.eye(4)[[0, 2, 1, 3]]
    with pytest.raises(NotCompletelyPositive):
        choi_to_kraus(ChoiMatrix(swap))


def test_kraus_ordering_and_phase_convention(rng):
    k = choi_to_kraus(kraus_to_choi(KrausSet(random_kraus(3, 4, rng))))
    mags = kraus_magnitudes(k)
    assert mags == sorted(mags, reverse=True)
    for op in k:
        flat = op.reshape(-1)
        top = flat[np.argmax(np.abs(flat))]
        assert abs(top.imag) < 1e-14 and top.real > 0


def test_minimal_kraus_collapses_duplicates():
    k = minimal_kraus(KrausSet([np.eye(2) / np.sqrt(2)] * 2))
    assert len(k) == 1
    np.testing.assert_allclose(np.abs(k[0]), np.eye(2), atol=1e-15)


def test_minimal_kraus_reduces_padded_rank_two(rng):
    a, b = amplitude_damping(0.4)
    u = np.linalg.qr(rng.normal(size=(2, 2)))[0]
    ops = [u[0, 0] * a + u[0, 1] * b, u[1, 0] * a + u[1, 1] * b, np.zeros((2, 2)), (a + b) * 0]
    k = minimal_kraus(KrausSet(ops))
    assert len(k) == 2
    assert choi_distance(k, KrausSet([a, b])) < 1e-14


def test_minimal_kraus_keeps_minimal_damping():
    k = minimal_kraus(KrausSet(amplitude_damping(0.3)))
    assert len(k) == 2
    assert choi_distance(k, KrausSet(amplitude_damping(0.3))) < 1e-14


def test_validate_identity_passes():
    r = validate_cptp(identity_channel(3))
    assert r.passed and r.completeness_residual == 0


def test_validate_doubled_identity_fails_completeness():
    r = validate_cptp(KrausSet([np.eye(2), np.eye(2)]))
    assert not r.is_tp
    assert r.completeness_residual == pytest.approx(np.sqrt(2))


def test_validate_transpose_map_fails_positivity():
    t = SuperOperator(superop_by_units(lambda r: r.T, 2))
    r = validate_cptp(t)
    assert not r.passed
    assert r.choi_min_eigenvalue == pytest.approx(-1)


def test_kraus_magnitudes_examples():
    assert kraus_magnitudes(KrausSet([np.eye(4)])) == pytest.approx([4])
    assert kraus_magnitudes(KrausSet(bit_flip(0.25))) == pytest.approx([1.5, 0.5])


def test_determinant_examples(rng):
    assert channel_determinant(SuperOperator(np.eye(9))) == pytest.approx(1)
    u = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))[0]
    assert abs(channel_determinant(kraus_to_superop(KrausSet([u])))) == pytest.approx(1)


def test_kraus_rank_identity():
    assert kraus_rank(identity_channel(4)) == 1


def test_rectangular_operators_are_zero_padded():
    ops = [np.array([[1, 0, 0], [0, 1, 0]]), np.array([[0, 0, 1], [0, 0, 0]])]
    padded, shape = pad_to_square(ops)
    assert shape == (2, 3) and padded[0].shape == (3, 3)
    spec = ChannelSpec.from_kraus(ops)
    assert spec.meta["padding"] == {"d_out": 2, "d_in": 3, "dim": 3}
    assert validate_cptp(spec).is_cp


@pytest.mark.parametrize("d", [2, 4, 8])
def test_round_trip_random(rng, d):
    for n in (1, d, d * d):
        k = KrausSet(random_kraus(d, n, rng))
        m0 = kraus_to_choi(k).matrix
        k2 = choi_to_kraus(superop_to_choi(kraus_to_superop(k)))
        assert np.max(np.abs(kraus_to_choi(k2).matrix - m0)) < 1e-10
        assert validate_cptp(k2).passed
        assert len(minimal_kraus(k)) == kraus_rank(k)
        np.testing.assert_allclose(kraus_magnitudes(k2), ChoiMatrix(m0).spectrum()[: len(k2)], atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(d=st.integers(2, 6), seed=st.integers(0, 2**32 - 1))
def test_rank_two_determinant_is_nonnegative(d, seed):
    ops = random_kraus(d, 2, np.random.default_rng(seed))
    det = channel_determinant(kraus_to_superop(KrausSet(ops)))
    scale = max(1.0, abs(det))
    assert abs(det.imag) < 1e-12 * scale
    assert det.real >= -1e-12 * scale
