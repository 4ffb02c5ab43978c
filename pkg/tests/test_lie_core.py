import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from randerslie.lie_core import (
    LieAlgebra,
    ad,
    bracket,
    catalog_get,
    jacobi_tensor,
    so3,
    validate_algebra,
)

from .conftest import CATALOG

floats = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def E(n, i, j):
    M = np.zeros((n, n))
    M[i, j] = 1.0
    return M


def comm(a, b):
    return a @ b - b @ a


def test_heisenberg_bracket_matches_matrix_commutator():
    # strictly upper-triangular 3x3 realization: e1=E12, e2=E23, e3=E13
    mats = [E(3, 0, 1), E(3, 1, 2), E(3, 0, 2)]
    alg = catalog_get("heisenberg3")
    basis = np.eye(3)
    for i, j in itertools.product(range(3), repeat=2):
        C = comm(mats[i], mats[j])
        coords = np.array([C[0, 1], C[1, 2], C[0, 2]])
        np.testing.assert_array_equal(bracket(alg, basis[i], basis[j]), coords)
    np.testing.assert_array_equal(bracket(alg, basis[0], basis[1]), [0, 0, 1])


def test_aff1_bracket_matches_matrix_commutator():
    mats = [E(2, 0, 0), E(2, 0, 1)]
    alg = catalog_get("aff1")
    for i, j in itertools.product(range(2), repeat=2):
        C = comm(mats[i], mats[j])
        np.testing.assert_array_equal(bracket(alg, np.eye(2)[i], np.eye(2)[j]), [C[0, 0], C[0, 1]])
    assert alg.dim == 2


@given(arrays(float, 3, elements=floats), arrays(float, 3, elements=floats))
def test_so3_bracket_is_cross_product(u, v):
    np.testing.assert_allclose(bracket(so3(), u, v), np.cross(u, v), atol=1e-9)


def test_so3_cyclic_examples():
    e = np.eye(3)
    alg = catalog_get("so3")
    np.testing.assert_array_equal(bracket(alg, e[0], e[1]), e[2])
    np.testing.assert_array_equal(bracket(alg, e[1], e[2]), e[0])


@pytest.mark.parametrize("name", CATALOG)
def test_catalog_validates_exactly(name):
    rep = validate_algebra(catalog_get(name), 1e-12)
    assert rep.passed
    assert rep.details["antisymmetry_residual"] == 0.0
    assert rep.details["jacobi_residual"] == 0.0


def test_abelian4_is_zero():
    alg = catalog_get("abelian(4)")
    assert alg.dim == 4 and not alg.structure.any()
    assert validate_algebra(alg).passed


def test_heisenberg_has_one_nonzero_bracket_pair():
    alg = catalog_get("heisenberg3")
    pairs = {(i, j) for i, j, k in zip(*np.nonzero(alg.structure)) if i < j}
    assert pairs == {(0, 1)}


def jacobi_bruteforce(c):
    n = c.shape[0]
    worst, where = 0.0, None
    for i, j, k, l in itertools.product(range(n), repeat=4):
        s = sum(c[i, j, m] * c[m, k, l] + c[j, k, m] * c[m, i, l] + c[k, i, m] * c[m, j, l] for m in range(n))
        if abs(s) > worst:
            worst, where = abs(s), (i + 1, j + 1, k + 1, l + 1)
    return worst, where


def test_rescaled_so3_bracket_is_still_lie():
    # [e1,e2]=a e3, [e2,e3]=b e1, [e3,e1]=c e2 satisfies Jacobi for every a, b, c
    c = np.array(so3().structure)
    c[0, 1, 2], c[1, 0, 2] = 0.9, -0.9
    expected, _ = jacobi_bruteforce(c)
    rep = validate_algebra(LieAlgebra("so3-rescaled", 3, c))
    assert expected == 0.0
    assert rep.passed and rep.details["jacobi_residual"] == 0.0


def test_corrupted_so3_fails_jacobi():
    c = np.array(so3().structure)
    c[0, 1, 0], c[1, 0, 0] = 0.9, -0.9
    alg = LieAlgebra("so3-bad", 3, c)
    rep = validate_algebra(alg)
    expected, _ = jacobi_bruteforce(c)
    assert not rep.passed
    assert expected > 0
    assert rep.details["jacobi_residual"] == pytest.approx(expected, abs=1e-15)
    i, j, k, l = rep.details["jacobi_worst_index"]
    # reported quadruple really attains the maximum
    s = abs(jacobi_tensor(alg)[i - 1, j - 1, k - 1, l - 1])
    assert s == pytest.approx(expected)
    assert rep.details["antisymmetry_residual"] == 0.0


def test_antisymmetry_failure_reported():
    c = np.zeros((2, 2, 2))
    c[0, 1, 1] = 1.0
    rep = validate_algebra(LieAlgebra("lopsided", 2, c))
    assert not rep.passed
    assert rep.details["antisymmetry_residual"] == 1.0


@pytest.mark.parametrize("name", CATALOG)
def test_bracket_bilinear_and_alternating(name):
    alg = catalog_get(name)
    rng = np.random.default_rng(1)
    for _ in range(50):
        u, v, w = rng.standard_normal((3, alg.dim))
        a = rng.standard_normal()
        np.testing.assert_allclose(bracket(alg, a * u + w, v), a * bracket(alg, u, v) + bracket(alg, w, v), atol=1e-12)
        np.testing.assert_array_equal(bracket(alg, u, u), np.zeros(alg.dim))


@settings(max_examples=50)
@given(st.sampled_from(CATALOG), st.integers(0, 2**32 - 1))
def test_jacobi_on_random_triples(name, seed):
    alg = catalog_get(name)
    u, v, w = np.random.default_rng(seed).standard_normal((3, alg.dim))
    b = lambda p, q: bracket(alg, p, q)  # noqa: E731
    total = b(u, b(v, w)) + b(v, b(w, u)) + b(w, b(u, v))
    np.testing.assert_allclose(total, 0, atol=1e-12)


def test_ad_matrix_matches_bracket(algebra):
    rng = np.random.default_rng(3)
    u, v = rng.standard_normal((2, algebra.dim))
    np.testing.assert_allclose(ad(algebra, u) @ v, bracket(algebra, u, v), atol=1e-14)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        bracket(catalog_get("so3"), np.ones(2), np.ones(3))


def test_unknown_catalog_name():
    with pytest.raises(LookupError):
        catalog_get("sl2")


def test_json_round_trip(algebra):
    again = LieAlgebra.from_dict(algebra.to_dict())
    assert again.name == algebra.name
    np.testing.assert_array_equal(again.structure, algebra.structure)


def test_loader_antisymmetrizes_and_rejects_lower_entries():
    alg = LieAlgebra.from_dict({"name": "h", "dim": 3, "brackets": [{"i": 1, "j": 2, "k": 3, "c": 1}]})
    assert alg.structure[1, 0, 2] == -1.0
    with pytest.raises(ValueError):
        LieAlgebra.from_dict({"name": "h", "dim": 3, "brackets": [{"i": 2, "j": 1, "k": 3, "c": 1}]})


def test_structure_is_immutable():
    alg = catalog_get("so3")
    with pytest.raises(ValueError):
        alg.structure[0, 1, 2] = 5.0
