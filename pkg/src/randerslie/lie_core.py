"""Finite-dimensional real Lie algebras given by structure constants.

The tensor ``structure[i, j, k]`` holds c^k_{ij}, so that
``[e_i, e_j] = sum_k structure[i, j, k] e_k`` (indices are 0-based in code,
1-based in the JSON file format).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .reports import Report

DEFAULT_TOL = 1e-9

CATALOG_NAMES = ("abelian(n)", "heisenberg3", "aff1", "so3")

_ABELIAN_RE = re.compile(r"^abelian\((\d+)\)$")


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    name: str
    dim: int
    structure: np.ndarray

    def __post_init__(self):
        c = np.array(self.structure, dtype=float)
        n = int(self.dim)
        if n < 1:
            raise ValueError(f"dimension must be positive, got {n}")
        if c.shape != (n, n, n):
            raise ValueError(f"structure tensor must have shape {(n, n, n)}, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "dim", n)
        object.__setattr__(self, "structure", c)

    def basis(self, i: int) -> np.ndarray:
        e = np.zeros(self.dim)
        e[i] = 1.0
        return e

    def to_dict(self) -> dict:
        brackets = []
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                for k in range(self.dim):
                    c = self.structure[i, j, k]
                    if c != 0.0:
                        brackets.append({"i": i + 1, "j": j + 1, "k": k + 1, "c": float(c)})
        return {"name": self.name, "dim": self.dim, "brackets": brackets}

    @classmethod
    def from_dict(cls, data: dict) -> "LieAlgebra":
        """Load the JSON algebra format; only i<j entries are listed and get antisymmetrized."""
        try:
            name = str(data["name"])
            n = int(data["dim"])
            entries = data.get("brackets", [])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed algebra record: {exc}") from None
        c = np.zeros((n, n, n))
        for entry in entries:
            i, j, k = int(entry["i"]) - 1, int(entry["j"]) - 1, int(entry["k"]) - 1
            if not (0 <= i < j < n and 0 <= k < n):
                raise ValueError(f"bracket entry out of range or not i<j: {entry}")
            c[i, j, k] += float(entry["c"])
            c[j, i, k] -= float(entry["c"])
        return cls(name, n, c)


def _check_vector(alg: LieAlgebra, v, what: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[-1:] != (alg.dim,):
        raise ValueError(f"{what} has shape {v.shape}, algebra {alg.name} has dimension {alg.dim}")
    return v


def bracket(alg: LieAlgebra, u, v) -> np.ndarray:
    """Lie bracket [u, v] in coordinates. Broadcasts over leading axes."""
    u = _check_vector(alg, u, "u")
    v = _check_vector(alg, v, "v")
    return np.einsum("...i,...j,ijk->...k", u, v, alg.structure)


def ad(alg: LieAlgebra, u) -> np.ndarray:
    """Matrix of v -> [u, v]."""
    u = _check_vector(alg, u, "u")
    return np.einsum("i,ijk->kj", u, alg.structure)


def jacobi_tensor(alg: LieAlgebra) -> np.ndarray:
    """J[i, j, k, l]: l-th component of the cyclic Jacobi sum on (e_i, e_j, e_k)."""
    c = alg.structure
    t = np.einsum("ijm,mkl->ijkl", c, c)
    return t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)


def validate_algebra(alg: LieAlgebra, tol: float = DEFAULT_TOL) -> Report:
    if not tol > 0:
        raise ValueError("tol must be positive")
    c = alg.structure
    anti = np.abs(c + c.transpose(1, 0, 2))
    jac = np.abs(jacobi_tensor(alg))
    anti_res = float(anti.max())
    jac_res = float(jac.max())
    details = {
        "algebra": alg.name,
        "antisymmetry_residual": anti_res,
        "jacobi_residual": jac_res,
        "tol": tol,
    }
    if anti_res > 0:
        details["antisymmetry_worst_index"] = [int(a) + 1 for a in np.unravel_index(anti.argmax(), anti.shape)]
    if jac_res > 0:
        details["jacobi_worst_index"] = [int(a) + 1 for a in np.unravel_index(jac.argmax(), jac.shape)]
    passed = anti_res < tol and jac_res < tol
    return Report("validate_algebra", passed, max(anti_res, jac_res), details)


def _from_brackets(name: str, n: int, entries) -> LieAlgebra:
    c = np.zeros((n, n, n))
    for i, j, k, val in entries:
        c[i, j, k] = val
        c[j, i, k] = -val
    return LieAlgebra(name, n, c)


def abelian(n: int) -> LieAlgebra:
    return LieAlgebra(f"abelian({n})", n, np.zeros((n, n, n)))


def heisenberg3() -> LieAlgebra:
    return _from_brackets("heisenberg3", 3, [(0, 1, 2, 1.0)])


def aff1() -> LieAlgebra:
    return _from_brackets("aff1", 2, [(0, 1, 1, 1.0)])


def so3() -> LieAlgebra:
    return _from_brackets("so3", 3, [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)])


def catalog_get(name: str) -> LieAlgebra:
    name = name.strip()
    m = _ABELIAN_RE.match(name)
    if m:
        n = int(m.group(1))
        if n < 1:
            raise LookupError(f"abelian dimension must be positive: {name!r}")
        return abelian(n)
    builders = {"heisenberg3": heisenberg3, "aff1": aff1, "so3": so3}
    if name not in builders:
        raise LookupError(f"unknown algebra {name!r}; catalog: {', '.join(CATALOG_NAMES)}")
    return builders[name]()
