import numpy as np
import pytest

from channel_forge import KrausSet, NotIsometry, choi_distance, minimal_kraus, synthesize, verify_circuit
from channel_forge.tree_synthesis import (
    AdaptiveCircuit,
    TreeNode,
    complete_unitary,
    depth_for,
    internal_block,
    labels_at,
    leaf_block,
    node_scaffold,
    pad_kraus,
    projection_monotonicity,
)

from oracles import amplitude_damping, random_kraus


def rank3_channel(rng, d=3):
    return minimal_kraus(KrausSet(random_kraus(d, 3, rng)))


@pytest.mark.parametrize("n,depth", [(1, 1), (2, 1), (3, 2), (4, 2), (5, 3), (9, 4), (64, 6)])
def test_depth(n, depth):
    assert depth_for(n) == depth


def test_pad_single_operator():
    p = pad_kraus(KrausSet([np.eye(2)]))
    assert len(p) == 2 and not np.any(p[1])


def test_pad_three_operators(rng):
    assert len(pad_kraus(rank3_channel(rng))) == 4


def test_labels():
    assert labels_at(0) == [""]
    assert labels_at(2) == ["00", "01", "10", "11"]


def test_root_scaffold_is_trivial(rng):
    s = node_scaffold("", pad_kraus(rank3_channel(rng)))
    np.testing.assert_allclose(s.M, np.eye(3))
    np.testing.assert_allclose(s.Q, np.zeros((3, 3)))


def test_scalar_branch_sum_scaffold():
    ops = [np.eye(2) / 2] * 4
    s = node_scaffold("0", pad_kraus(KrausSet(ops)))
    np.testing.assert_allclose(s.D, np.full(2, 1 / np.sqrt(2)))
    np.testing.assert_allclose(s.P, 1)
    np.testing.assert_allclose(s.Q, 0, atol=1e-15)
    b = internal_block(node_scaffold("", pad_kraus(KrausSet(ops))), s)
    np.testing.assert_allclose(b, np.eye(2) / np.sqrt(2), atol=1e-15)


def test_rank_deficient_branch_has_kernel(rng):
    # Leaf "11" is the zero pad, so branch "1" holds one operator of rank < d.
    d = 3
    k = KrausSet(random_kraus(d, 3, rng))
    ops = list(k.ops)
    ops[2] = ops[2] @ np.diag([1, 1, 0])
    fix = np.linalg.inv(np.linalg.cholesky(sum(o.conj().T @ o for o in ops)).conj().T)
    ops = [o @ fix for o in ops]
    padded = pad_kraus(KrausSet(ops))
    s = node_scaffold("1", padded)
    assert s.P_perp.sum() == 1
    parent = node_scaffold("", padded)
    b1 = internal_block(parent, s)
    b0 = internal_block(parent, node_scaffold("0", padded))
    assert TreeNode("", b0, b1).isometry_residual() < 1e-12
    assert projection_monotonicity(padded) > -1e-9


def test_depth_one_leaf_blocks_are_the_kraus_operators():
    k = KrausSet(amplitude_damping(0.3))
    padded = pad_kraus(k)
    root = node_scaffold("", padded)
    np.testing.assert_allclose(leaf_block(root, "0", padded), k[0])
    np.testing.assert_allclose(leaf_block(root, "1", padded), k[1])
    c = synthesize(k)
    assert c.depth == 1
    np.testing.assert_allclose(c.nodes[""].block0, k[0], atol=1e-15)
    np.testing.assert_allclose(c.nodes[""].block1, k[1], atol=1e-15)


def test_unitary_channel_gets_zero_partner(rng):
    u = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))[0]
    c = synthesize(KrausSet([u]))
    assert c.depth == 1
    np.testing.assert_allclose(c.leaf_kraus["0"], u, atol=1e-14)
    np.testing.assert_allclose(c.leaf_kraus["1"], 0, atol=1e-14)


def test_complete_unitary_identity_block():
    u = complete_unitary(np.eye(2), np.zeros((2, 2)))
    np.testing.assert_allclose(u, np.eye(4))


def test_complete_unitary_balanced_blocks():
    b = np.eye(2) / np.sqrt(2)
    u = complete_unitary(b, b)
    assert np.linalg.norm(u.conj().T @ u - np.eye(4)) < 1e-12
    np.testing.assert_allclose(u[:, :2], np.vstack([b, b]))


def test_complete_unitary_rejects_non_isometry():
    with pytest.raises(NotIsometry):
        complete_unitary(np.eye(2), np.eye(2))


@pytest.mark.parametrize("d,n", [(2, 3), (3, 5), (4, 16), (5, 7)])
def test_synthesis_invariants(rng, d, n):
    k = minimal_kraus(KrausSet(random_kraus(d, n, rng)))
    c = synthesize(k)
    r = verify_circuit(c, k)
    assert r.passed, r.to_dict()
    assert c.depth == depth_for(n)
    assert len(c.nodes) == 2**c.depth - 1 and len(c.leaf_kraus) == 2**c.depth
    for node in c.nodes.values():
        u = node.full_unitary
        assert np.linalg.norm(u.conj().T @ u - np.eye(2 * d)) < 1e-10
    assert projection_monotonicity(pad_kraus(k)) > -1e-9


def test_synthesis_is_bit_stable(rng):
    k = minimal_kraus(KrausSet(random_kraus(3, 6, rng)))
    a, b = synthesize(k), synthesize(KrausSet(list(k.ops)))
    for lab in a.nodes:
        np.testing.assert_array_equal(a.nodes[lab].block0, b.nodes[lab].block0)


def test_verify_flags_perturbed_node(rng):
    k = minimal_kraus(KrausSet(random_kraus(3, 4, rng)))
    c = synthesize(k)
    blocks = {lab: n.blocks() for lab, n in c.nodes.items()}
    b0, b1 = blocks["1"]
    blocks["1"] = (b0 + 1e-3, b1)
    r = verify_circuit(AdaptiveCircuit.from_blocks(blocks), k)
    assert not r.passed
    assert r.failed_nodes == ["1"]


def test_circuit_rejects_missing_nodes():
    with pytest.raises(Exception):
        AdaptiveCircuit(2, 2, {"": TreeNode("", np.eye(2), np.zeros((2, 2)))})


def test_channel_level_verification_ignores_leaf_labels(rng):
    k = minimal_kraus(KrausSet(random_kraus(2, 2, rng)))
    swapped = KrausSet([k[1], k[0]])
    c = synthesize(k)
    assert not verify_circuit(c, swapped).passed
    assert verify_circuit(c, swapped, exact_leaves=False).passed
    assert choi_distance(c.kraus_set(), swapped) < 1e-12
