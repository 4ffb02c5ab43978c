"""Membership tests for Aut(g), O(g), Aut_X(g) and their infinitesimal intersection.

Linear maps are plain ``(n, n)`` arrays acting on coordinate column vectors,
so ``A[:, i]`` is the image of the i-th basis vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .lie_core import DEFAULT_TOL, LieAlgebra
from .randers import InnerProduct, RandersData, randers_norm

NULLSPACE_RCOND = 1e-10
DET_TOL = 1e-12
TAYLOR_ORDER = 18


class IsometryCheck(NamedTuple):
    ok: bool
    residual: float
    witness: np.ndarray | None


def _square(A, n: int | None = None, what: str = "map") -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{what} must be a square matrix, got shape {A.shape}")
    if n is not None and A.shape[0] != n:
        raise ValueError(f"{what} has size {A.shape[0]}, expected {n}")
    return A


def linear_map_from_dict(record: dict) -> np.ndarray:
    try:
        return _square(record["matrix"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed linear map record: {exc}") from None


# ---------------------------------------------------------------- predicates

def is_automorphism(alg: LieAlgebra, A, tol: float = DEFAULT_TOL, det_tol: float = DET_TOL) -> tuple[bool, float]:
    """A[e_i, e_j] == [A e_i, A e_j] for every basis pair, and A invertible."""
    A = _square(A, alg.dim)
    c = alg.structure
    lhs = np.einsum("kl,ijl->ijk", A, c)
    rhs = np.einsum("ai,bj,abk->ijk", A, A, c)
    residual = float(np.abs(lhs - rhs).max())
    invertible = abs(np.linalg.det(A)) > det_tol
    return bool(invertible and residual < tol), residual


def is_orthogonal(metric: InnerProduct, A, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    A = _square(A, metric.dim)
    G = metric.gram
    residual = float(np.abs(A.T @ G @ A - G).max())
    return residual < tol, residual


def fixes_vector(A, x, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    x = np.asarray(x, dtype=float)
    A = _square(A, x.shape[0])
    residual = float(np.abs(A @ x - x).max())
    return residual < tol, residual


# ---------------------------------------------------------------- nullspaces

@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """Orthonormal (Frobenius) basis of a subspace of n x n matrices."""

    vectors: np.ndarray  # shape (dim, n, n)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    def __iter__(self):
        return iter(self.vectors)

    def __len__(self):
        return self.dim

    def flat(self) -> np.ndarray:
        return self.vectors.reshape(self.dim, -1)

    def combine(self, coeffs) -> np.ndarray:
        return np.tensordot(np.asarray(coeffs, float), self.vectors, axes=1)

    def projection_residual(self, M) -> float:
        """Frobenius distance from M to the span."""
        m = np.asarray(M, dtype=float).ravel()
        if self.dim == 0:
            return float(np.linalg.norm(m))
        B = self.flat()
        return float(np.linalg.norm(m - B.T @ (B @ m)))

    def closure_residual(self) -> float:
        """Largest distance from a commutator of basis elements to the span."""
        worst = 0.0
        for a in range(self.dim):
            for b in range(a + 1, self.dim):
                D1, D2 = self.vectors[a], self.vectors[b]
                worst = max(worst, self.projection_residual(D1 @ D2 - D2 @ D1))
        return worst

    def to_dict(self) -> dict:
        return {"dim": self.dim, "basis": self.vectors.tolist()}


def _operator_matrix(op, n: int) -> np.ndarray:
    """Matrix of a linear map on n x n matrices (columns indexed by row-major D entries)."""
    cols = []
    for idx in range(n * n):
        E = np.zeros(n * n)
        E[idx] = 1.0
        cols.append(np.ravel(op(E.reshape(n, n))))
    return np.stack(cols, axis=1)


def _canonical_basis(B: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Canonical orthonormal basis of row-span(B).

    Projects the standard unit vectors onto the span in order and
    Gram-Schmidts them, so the result does not depend on which orthonormal
    basis the SVD happened to return.
    """
    k, N = B.shape
    if k == 0:
        return B
    P = B.T @ B
    out: list[np.ndarray] = []
    for j in range(N):
        v = P[:, j].copy()
        for _ in range(2):
            for u in out:
                v -= (u @ v) * u
        nv = np.linalg.norm(v)
        if nv > tol:
            v /= nv
            lead = np.flatnonzero(np.abs(v) > tol)[0]
            if v[lead] < 0:
                v = -v
            out.append(v)
        if len(out) == k:
            break
    out = np.array(out)
    out[np.abs(out) < 1e-13] = 0.0
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def nullspace(M: np.ndarray, rcond: float = NULLSPACE_RCOND) -> np.ndarray:
    """Orthonormal rows spanning ker M; singular values below rcond * s_max count as zero."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    N = M.shape[1]
    if M.size == 0:
        return np.eye(N)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(N)
    rank = int(np.sum(s > rcond * s[0]))
    return _canonical_basis(vh[rank:])


def derivation_constraints(alg: LieAlgebra) -> np.ndarray:
    """(n^3, n^2) matrix whose kernel is Der(g)."""
    c = alg.structure

    def op(D):
        # D[e_i,e_j] - [D e_i, e_j] - [e_i, D e_j], component a
        t1 = np.einsum("ijk,ak->ija", c, D)
        t2 = np.einsum("li,lja->ija", D, c)
        t3 = np.einsum("lj,ila->ija", D, c)
        return t1 - t2 - t3

    return _operator_matrix(op, alg.dim)


def skew_constraints(metric: InnerProduct) -> np.ndarray:
    G = metric.gram
    return _operator_matrix(lambda D: G @ D + D.T @ G, metric.dim)


def annihilator_constraints(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return _operator_matrix(lambda D: D @ x, x.shape[0])


def _basis_from_rows(rows: np.ndarray, n: int) -> SubspaceBasis:
    return SubspaceBasis(rows.reshape(-1, n, n))


def derivation_space(alg: LieAlgebra) -> SubspaceBasis:
    return _basis_from_rows(nullspace(derivation_constraints(alg)), alg.dim)


def orthogonal_derivations(alg: LieAlgebra, metric: InnerProduct) -> SubspaceBasis:
    """Der(g) intersected with so(G): generators of the identity component of Aut(g) ∩ O(g)."""
    M = np.vstack([derivation_constraints(alg), skew_constraints(metric)])
    return _basis_from_rows(nullspace(M), alg.dim)


def infinitesimal_K(alg: LieAlgebra, metric: InnerProduct, x) -> SubspaceBasis:
    """Lie algebra of Aut_X(g) ∩ O(g): derivations D with G D + D^T G = 0 and D x = 0."""
    x = np.asarray(x, dtype=float)
    if x.shape != (alg.dim,) or metric.dim != alg.dim:
        raise ValueError("metric, vector and algebra dimensions disagree")
    if np.linalg.eigvalsh(metric.gram).min() <= 0:
        raise ValueError("metric is not positive definite")
    M = np.vstack([derivation_constraints(alg), skew_constraints(metric), annihilator_constraints(x)])
    basis = _basis_from_rows(nullspace(M), alg.dim)
    closure = basis.closure_residual()
    if closure >= 1e-9:
        raise ArithmeticError(f"computed K' algebra is not bracket-closed (residual {closure:.3g})")
    return basis


# ---------------------------------------------------------------- exponential

def exp_map(D, t: float = 1.0) -> np.ndarray:
    """exp(t D) by scaling and squaring around a degree-18 Taylor polynomial."""
    M = t * _square(D, what="generator")
    n = M.shape[0]
    norm = np.linalg.norm(M, 1)
    s = int(np.ceil(np.log2(norm / 0.5))) if norm > 0.5 else 0
    M = M / 2.0**s
    E = np.eye(n)
    term = np.eye(n)
    for k in range(1, TAYLOR_ORDER + 1):
        term = term @ M / k
        E = E + term
    for _ in range(s):
        E = E @ E
    return E


# ---------------------------------------------------------------- Randers isometries

def unit_sphere_samples(metric: InnerProduct, samples: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((samples, metric.dim))
    return z / metric.norm(z)[:, None]


def randers_isometry_linear(
    data: RandersData,
    A,
    samples: int = 200,
    seed: int = 42,
    tol: float = DEFAULT_TOL,
) -> IsometryCheck:
    """Sampled test of F(A y) == F(y) over the G-unit sphere."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    A = _square(A, data.dim)
    rng = np.random.default_rng(seed)
    ys = unit_sphere_samples(data.metric, samples, rng)
    res = np.abs(randers_norm(data, ys @ A.T) - randers_norm(data, ys))
    i = int(res.argmax())
    worst = float(res[i])
    return IsometryCheck(worst < tol, worst, ys[i])


def directed_witness(data: RandersData, A) -> IsometryCheck:
    """Search the directions where F(A y) != F(y) is forced when A x != x.

    For A in O(G), F(A y) - F(y) = <A^{-1} x - x, y>, so candidates are
    x itself, A^{-1}(A x - x) (the maximiser) and A x - x.
    """
    A = _square(A, data.dim)
    x = data.drift
    d = A @ x - x
    candidates = [x, np.linalg.solve(A, d), d]
    best = IsometryCheck(True, 0.0, None)
    for y in candidates:
        ny = float(data.metric.norm(y))
        if ny == 0.0:
            continue
        y = y / ny
        r = abs(randers_norm(data, A @ y) - randers_norm(data, y))
        if best.witness is None or r > best.residual:
            best = IsometryCheck(False, r, y)
    return best


# ---------------------------------------------------------------- sampling

def sign_automorphisms(alg: LieAlgebra, metric: InnerProduct | None = None,
                       tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """Diagonal +-1 matrices lying in Aut(g), and in O(g) when a metric is given."""
    n = alg.dim
    out = []
    for mask in range(2**n):
        S = np.diag([-1.0 if (mask >> i) & 1 else 1.0 for i in range(n)])
        if is_automorphism(alg, S, tol)[0] and (metric is None or is_orthogonal(metric, S, tol)[0]):
            out.append(S)
    return out


def sample_orthogonal_automorphisms(
    alg: LieAlgebra,
    metric: InnerProduct,
    x,
    count: int,
    rng: np.random.Generator,
    scale: float = 1.0,
) -> list[np.ndarray]:
    """Seeded elements of Aut(g) ∩ O(g).

    Even-indexed samples exponentiate a random element of the K' algebra
    composed with a diagonal sign automorphism (one fixing x for the even
    samples, so those stay in Aut_X(g)).
    """
    x = np.asarray(x, dtype=float)
    full = orthogonal_derivations(alg, metric)
    kprime = infinitesimal_K(alg, metric, x)
    signs = sign_automorphisms(alg, metric)
    fixing_signs = [S for S in signs if fixes_vector(S, x)[0]]
    out = []
    for k in range(count):
        basis, pool = (kprime, fixing_signs) if k % 2 == 0 else (full, signs)
        D = basis.combine(scale * rng.standard_normal(basis.dim)) if basis.dim else np.zeros((alg.dim,) * 2)
        S = pool[int(rng.integers(len(pool)))]
        out.append(exp_map(D) @ S)
    return out
