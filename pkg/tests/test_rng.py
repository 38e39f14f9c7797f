import numpy as np
import pytest

from decolab.rng import (
    Xoshiro256pp,
    random_decomposition,
    random_density_matrix,
    random_unitary_matrix,
)

# regression pins for the exact output stream (seed 0); any change here breaks
# reproducibility of every seeded suite
SEED0_FIRST_U64 = [5987356902031041503, 7051070477665621255, 6633766593972829180]


def test_stream_regression_pins():
    rng = Xoshiro256pp(0)
    assert [rng.next_u64() for _ in range(3)] == SEED0_FIRST_U64


def test_same_seed_same_stream():
    a, b = Xoshiro256pp(123), Xoshiro256pp(123)
    assert [a.next_u64() for _ in range(100)] == [b.next_u64() for _ in range(100)]
    assert Xoshiro256pp(124).next_u64() != Xoshiro256pp(123).next_u64()


def test_uniform_range_and_determinism():
    rng = Xoshiro256pp(7)
    xs = rng.uniforms(2000)
    assert np.all(xs >= 0.0) and np.all(xs < 1.0)
    assert 0.45 < xs.mean() < 0.55


def test_randint_bounds():
    rng = Xoshiro256pp(9)
    vals = {rng.randint(5) for _ in range(200)}
    assert vals == {0, 1, 2, 3, 4}
    with pytest.raises(ValueError):
        rng.randint(0)


def test_normals_moments():
    rng = Xoshiro256pp(11)
    g = rng.normals(4000)
    assert abs(g.mean()) < 0.1
    assert abs(g.std() - 1.0) < 0.1


def test_random_unitary_is_unitary():
    rng = Xoshiro256pp(13)
    for dim in (2, 3, 5):
        u = random_unitary_matrix(rng, dim)
        assert np.abs(u.conj().T @ u - np.eye(dim)).max() < 1e-12


def test_random_density_properties():
    rng = Xoshiro256pp(15)
    rho = random_density_matrix(rng, 4)
    assert abs(np.trace(rho) - 1.0) < 1e-12
    assert np.linalg.eigvalsh(rho).min() > -1e-14
    low = random_density_matrix(rng, 4, rank=2)
    assert np.linalg.matrix_rank(low, tol=1e-10) == 2


def test_random_decomposition_reconstructs_density():
    rng = Xoshiro256pp(17)
    rho = random_density_matrix(rng, 3)
    for members in (3, 5):
        parts = random_decomposition(rng, rho, members)
        assert abs(sum(p for p, _ in parts) - 1.0) < 1e-12
        mix = sum(p * np.outer(a, a.conj()) for p, a in parts)
        assert np.abs(mix - rho).max() < 1e-12
    with pytest.raises(ValueError):
        random_decomposition(rng, rho, 2)
