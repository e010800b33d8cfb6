import numpy as np
import pytest

from scramblesim.errors import DimensionError
from scramblesim.regions import Regions, wire_pair_to_site

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)


def test_defaults():
    r = Regions((2, 3, 2))
    assert r.A == (0,) and r.D == (2,)
    assert r.B == (1, 2) and r.C == (0, 1)
    assert (r.d_A, r.d_B, r.d_C, r.d_D) == (2, 6, 6, 2)


def test_negative_indices_normalized():
    assert Regions((2, 2, 2), A=(-1,), D=(0,)).A == (2,)


def test_size_mismatch():
    with pytest.raises(DimensionError):
        Regions((2, 2), out_dims=(3,))


def test_empty_region():
    with pytest.raises(ValueError):
        Regions((2, 2), A=())


def test_canonical_round_trip(rng):
    r = Regions((2, 3, 2), A=(1,), D=(0,))
    op = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    np.testing.assert_allclose(r.from_canonical(r.canonical(op)), op)


def test_canonical_identity_when_ordered(rng):
    r = Regions((2, 2))
    op = rng.standard_normal((4, 4))
    np.testing.assert_allclose(r.canonical(op), op)


def test_embed_input_on_middle_site():
    r = Regions((2, 2, 2), A=(1,))
    np.testing.assert_allclose(r.embed_input(X), np.kron(np.kron(np.eye(2), X), np.eye(2)))


def test_embed_output_default_last():
    r = Regions((2, 2, 2))
    np.testing.assert_allclose(r.embed_output(Z), np.kron(np.eye(4), Z))


def test_canonical_moves_a_first():
    r = Regions((2, 3), A=(1,), D=(1,))
    # input site 1 (dim 3) becomes the leading input factor
    op = np.kron(np.eye(2), np.diag([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(r.canonical_input(op), np.kron(np.diag([1.0, 2.0, 3.0]), np.eye(2)))
    # outputs read (C, D) = (site 0, site 1), already in order
    np.testing.assert_allclose(r.canonical_output(op), op)


@pytest.mark.parametrize("pair, site", [((3, 4), 2), ((1, 6), 0), ((2, 5), 1), ((5, 2), 1)])
def test_wire_pairs_three_sites(pair, site):
    assert wire_pair_to_site(pair, 3) == site


@pytest.mark.parametrize("pair", [(1, 4), (3, 3), (0, 7)])
def test_wire_pairs_rejected(pair):
    with pytest.raises(ValueError):
        wire_pair_to_site(pair, 3)


def test_for_operator_guesses_dims():
    assert Regions.for_operator(np.eye(9)).in_dims == (3, 3)
    with pytest.raises(DimensionError):
        Regions.for_operator(np.eye(6))
