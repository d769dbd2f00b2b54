import numpy as np
import pytest

from qistate.actions import (Automorphism, apply, close_group, compose,
                             equal_as_maps, identity_automorphism, inverse,
                             predual)
from qistate.algebra import AlgebraDescriptor, AlgebraElement, identity
from qistate.instances import (inner_generator, permutation_generator,
                               random_unitary)
from qistate.matcore import InputError

X = np.array([[0.0, 1.0], [1.0, 0.0]])
Z = np.diag([1.0, -1.0])


def random_element(rng, desc):
    return AlgebraElement(desc, [rng.standard_normal((n, n))
                                 + 1j * rng.standard_normal((n, n))
                                 for n in desc.block_dims])


def random_automorphism(rng, desc):
    # block dims here are all equal, so any cyclic shift is allowed
    k = desc.num_blocks
    shift = int(rng.integers(k))
    perm = tuple((j + shift) % k for j in range(k))
    us = [random_unitary(rng, n) for n in desc.block_dims]
    return Automorphism(desc, perm, us)


def test_apply_identity(rng):
    desc = AlgebraDescriptor((2, 3))
    a = random_element(rng, desc)
    assert (apply(identity_automorphism(desc), a) - a).op_norm() == 0.0


def test_apply_pauli_flip():
    # hand computation: X diag(1,0) X = diag(0,1)
    desc = AlgebraDescriptor((2,))
    g = inner_generator(desc, 0, X)
    a = AlgebraElement(desc, [np.diag([1.0, 0.0])])
    assert np.allclose(apply(g, a).blocks[0], np.diag([0.0, 1.0]))


def test_apply_is_isometric_multiplicative_star(rng):
    desc = AlgebraDescriptor((2, 2, 2))
    g = random_automorphism(rng, desc)
    a, b = random_element(rng, desc), random_element(rng, desc)
    assert abs(apply(g, a).op_norm() - a.op_norm()) < 1e-10
    assert (apply(g, a @ b) - apply(g, a) @ apply(g, b)).op_norm() < 1e-10
    assert (apply(g, a.adjoint()) - apply(g, a).adjoint()).op_norm() < 1e-10
    assert (apply(g, identity(desc)) - identity(desc)).op_norm() < 1e-12


def test_perm_must_preserve_dimensions():
    desc = AlgebraDescriptor((2, 3))
    with pytest.raises(InputError, match="dim"):
        Automorphism(desc, (1, 0), [np.eye(2), np.eye(3)])


def test_compose_matches_sequential_action(rng):
    desc = AlgebraDescriptor((2, 2))
    g, h = random_automorphism(rng, desc), random_automorphism(rng, desc)
    a = random_element(rng, desc)
    assert (apply(compose(g, h), a) - apply(g, apply(h, a))).op_norm() < 1e-10


def test_compose_with_identity(rng):
    desc = AlgebraDescriptor((3, 3))
    g = random_automorphism(rng, desc)
    e = identity_automorphism(desc)
    assert equal_as_maps(compose(g, e), g)
    assert equal_as_maps(compose(e, g), g)


def test_swap_is_involution(rng):
    desc = AlgebraDescriptor((2, 2))
    swap = permutation_generator(desc, (1, 0))
    a = random_element(rng, desc)
    assert (apply(compose(swap, swap), a) - a).op_norm() < 1e-12


def test_associativity(rng):
    desc = AlgebraDescriptor((2, 2))
    f, g, h = (random_automorphism(rng, desc) for _ in range(3))
    a = random_element(rng, desc)
    lhs = apply(compose(compose(f, g), h), a)
    rhs = apply(compose(f, compose(g, h)), a)
    assert (lhs - rhs).op_norm() < 1e-10


def test_inverse(rng):
    desc = AlgebraDescriptor((2, 2, 2))
    g = random_automorphism(rng, desc)
    a = random_element(rng, desc)
    assert (apply(compose(g, inverse(g)), a) - a).op_norm() < 1e-10
    assert (apply(compose(inverse(g), g), a) - a).op_norm() < 1e-10


def test_equal_as_maps_phase_freedom(rng):
    desc = AlgebraDescriptor((2,))
    u = random_unitary(rng, 2)
    g = inner_generator(desc, 0, u)
    h = inner_generator(desc, 0, np.exp(0.7j) * u)
    assert equal_as_maps(g, h)


def test_equal_as_maps_distinguishes():
    desc = AlgebraDescriptor((2,))
    # X and Z conjugation differ on the matrix unit e_11
    assert not equal_as_maps(inner_generator(desc, 0, X),
                             inner_generator(desc, 0, Z))


def test_close_group_trivial():
    desc = AlgebraDescriptor((2,))
    grp = close_group([identity_automorphism(desc)], cap=4)
    assert grp.order == 1


def test_close_group_involution():
    desc = AlgebraDescriptor((2,))
    grp = close_group([inner_generator(desc, 0, X)], cap=8)
    assert grp.order == 2
    assert grp.inv == [0, 1]


def test_close_group_commuting_product():
    # block swap and a simultaneous spin flip generate Z2 x Z2
    desc = AlgebraDescriptor((2, 2))
    swap = permutation_generator(desc, (1, 0))
    flip = Automorphism(desc, (0, 1), [X, X])
    grp = close_group([swap, flip], cap=16)
    assert grp.order == 4
    for i in range(4):
        assert sorted(grp.mult[i]) == list(range(4))
        assert sorted(grp.mult[:, i]) == list(range(4))


def test_close_group_hits_cap_for_infinite_order():
    desc = AlgebraDescriptor((2,))
    # irrational rotation: conjugation has infinite order
    theta = np.sqrt(2.0)
    u = np.diag([1.0, np.exp(1j * theta)])
    with pytest.raises(InputError, match="not finite at cap"):
        close_group([inner_generator(desc, 0, u)], cap=40)


def test_predual_identity(rng):
    desc = AlgebraDescriptor((2, 2))
    rho = random_element(rng, desc)
    assert (predual(identity_automorphism(desc), rho) - rho).op_norm() == 0.0


def test_predual_hand_value():
    desc = AlgebraDescriptor((2,))
    g = inner_generator(desc, 0, X)
    rho = AlgebraElement(desc, [np.diag([1 / 3, 2 / 3])])
    assert np.allclose(predual(g, rho).blocks[0], np.diag([2 / 3, 1 / 3]))


def test_predual_trace_duality(rng):
    desc = AlgebraDescriptor((2, 2))
    g = random_automorphism(rng, desc)
    rho, a = random_element(rng, desc), random_element(rng, desc)
    lhs = (predual(g, rho) @ a).trace()
    rhs = (rho @ apply(g, a)).trace()
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))


def test_predual_preserves_positivity_and_trace(rng):
    desc = AlgebraDescriptor((3, 3))
    g = random_automorphism(rng, desc)
    m = random_element(rng, desc)
    rho = m @ m.adjoint()
    out = predual(g, rho)
    assert out.min_eig() > -1e-10
    assert abs(out.trace() - rho.trace()) < 1e-10 * abs(rho.trace())


def test_predual_contravariance(rng):
    desc = AlgebraDescriptor((2, 2))
    g, h = random_automorphism(rng, desc), random_automorphism(rng, desc)
    rho = random_element(rng, desc)
    lhs = predual(compose(g, h), rho)
    rhs = predual(h, predual(g, rho))
    assert (lhs - rhs).op_norm() < 1e-10


def test_block_orbits():
    desc = AlgebraDescriptor((2, 2, 3))
    swap = permutation_generator(desc, (1, 0, 2))
    grp = close_group([swap], cap=4)
    assert grp.block_orbits() == [[0, 1], [2]]
