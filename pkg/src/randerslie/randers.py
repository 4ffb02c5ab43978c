"""Left-invariant Randers norms on a Lie algebra.

A Randers norm is built from an inner product ``G`` (Gram matrix) and a
vector ``X`` with ``sqrt(X^T G X) < 1``:

    F(y) = sqrt(y^T G y) + X^T G y

Left translation carries this norm to every tangent space of the group, so
all computations here happen on the algebra itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lie_core import DEFAULT_TOL
from .reports import Report

DEFAULT_FD_STEP = 1e-4


@dataclass(frozen=True, eq=False)
class InnerProduct:
    gram: np.ndarray

    def __post_init__(self):
        g = np.array(self.gram, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"Gram matrix must be square, got shape {g.shape}")
        g.setflags(write=False)
        object.__setattr__(self, "gram", g)

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    def norm(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return np.sqrt(np.einsum("...i,ij,...j->...", v, self.gram, v))

    def inner(self, u, v) -> np.ndarray:
        return np.einsum("...i,ij,...j->...", np.asarray(u, float), self.gram, np.asarray(v, float))

    @classmethod
    def identity(cls, n: int) -> "InnerProduct":
        return cls(np.eye(n))


@dataclass(frozen=True, eq=False)
class RandersData:
    """An inner product together with the drift vector ``X`` (``||X|| < 1``)."""

    metric: InnerProduct
    drift: np.ndarray

    def __post_init__(self):
        if not isinstance(self.metric, InnerProduct):
            object.__setattr__(self, "metric", InnerProduct(self.metric))
        x = np.array(self.drift, dtype=float)
        g = self.metric.gram
        if x.shape != (self.metric.dim,):
            raise ValueError(f"drift has shape {x.shape}, metric has dimension {self.metric.dim}")
        if not np.array_equal(g, g.T):
            raise ValueError("Gram matrix is not symmetric")
        if np.linalg.eigvalsh(g).min() <= 0:
            raise ValueError("Gram matrix is not positive definite")
        if not float(x @ g @ x) < 1.0:
            raise ValueError(f"drift norm {math.sqrt(float(x @ g @ x)):.6g} is not below 1")
        x.setflags(write=False)
        object.__setattr__(self, "drift", x)

    @property
    def dim(self) -> int:
        return self.metric.dim

    @property
    def gram(self) -> np.ndarray:
        return self.metric.gram

    @property
    def drift_norm(self) -> float:
        return float(self.metric.norm(self.drift))

    @property
    def one_form(self) -> np.ndarray:
        """Coefficients b = G X, so that the linear part of F is b . y."""
        return self.gram @ self.drift

    def to_dict(self) -> dict:
        return {"gram": self.gram.tolist(), "X": self.drift.tolist()}


def _check_y(data: RandersData, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape[-1:] != (data.dim,):
        raise ValueError(f"vector has shape {y.shape}, expected trailing dimension {data.dim}")
    return y


def randers_norm(data: RandersData, y) -> float | np.ndarray:
    """F(y) = |y|_G + <X, y>_G. Broadcasts over leading axes of ``y``."""
    y = _check_y(data, y)
    alpha = np.sqrt(np.einsum("...i,ij,...j->...", y, data.gram, y))
    beta = y @ data.one_form
    out = alpha + beta
    return float(out) if out.ndim == 0 else out


def scale_metric(metric0: InnerProduct, x) -> tuple[InnerProduct, int]:
    """Divide the metric by the smallest positive integer N making <x, x>/N < 1."""
    x = np.asarray(x, dtype=float)
    q = float(x @ metric0.gram @ x)
    if q < 1.0:
        return metric0, 1
    n = int(math.floor(q)) + 1
    # floor() of a float can land one short of the integer boundary
    while not q / n < 1.0:
        n += 1
    while n > 1 and q / (n - 1) < 1.0:
        n -= 1
    return InnerProduct(metric0.gram / n), n


def validate_randers(metric: InnerProduct, x, tol: float = DEFAULT_TOL) -> Report:
    if not tol > 0:
        raise ValueError("tol must be positive")
    g = metric.gram
    x = np.asarray(x, dtype=float)
    if x.shape != (metric.dim,):
        raise ValueError(f"X has shape {x.shape}, metric has dimension {metric.dim}")
    symmetric = bool(np.array_equal(g, g.T))
    min_eig = float(np.linalg.eigvalsh((g + g.T) / 2).min())
    q = float(x @ g @ x)
    norm = math.sqrt(q) if q >= 0 else float("nan")
    details = {"norm": norm, "min_eigenvalue": min_eig, "symmetric": symmetric, "tol": tol}
    failures = []
    if not symmetric:
        failures.append("gram not symmetric")
    if not min_eig > tol:
        failures.append("gram not positive definite")
    if not norm < 1.0 - tol:
        failures.append("drift norm not below 1")
        if min_eig > 0 and norm >= 1.0:
            details["suggested_N"] = scale_metric(metric, x)[1]
    details["failures"] = failures
    residual = max(0.0, norm - (1.0 - tol)) if not math.isnan(norm) else float("inf")
    return Report("validate_randers", not failures, residual, details)


def fundamental_tensor(data: RandersData, y) -> np.ndarray:
    """Analytic Hessian of F^2/2 at y != 0.

    With alpha = |y|_G, beta = b . y, l = G y / alpha:

        g = (F / alpha) (G - l l^T) + (l + b)(l + b)^T
    """
    y = _check_y(data, y)
    g = data.gram
    alpha = math.sqrt(float(y @ g @ y))
    if alpha == 0.0:
        raise ValueError("fundamental tensor is undefined at y = 0")
    b = data.one_form
    F = alpha + float(b @ y)
    l = g @ y / alpha
    m = l + b
    out = (F / alpha) * (g - np.outer(l, l)) + np.outer(m, m)
    return (out + out.T) / 2


def central_hessian(f, x, step: float) -> np.ndarray:
    """Second-order central finite-difference Hessian of a scalar function."""
    x = np.asarray(x, dtype=float)
    n = x.size
    E = step * np.eye(n)
    f0 = f(x)
    H = np.empty((n, n))
    for i in range(n):
        H[i, i] = (f(x + E[i]) - 2 * f0 + f(x - E[i])) / step**2
        for j in range(i + 1, n):
            v = (f(x + E[i] + E[j]) - f(x + E[i] - E[j]) - f(x - E[i] + E[j]) + f(x - E[i] - E[j])) / (4 * step**2)
            H[i, j] = H[j, i] = v
    return H


def fundamental_tensor_fd(data: RandersData, y, step: float = DEFAULT_FD_STEP) -> np.ndarray:
    y = _check_y(data, y)
    if not step > 0:
        raise ValueError("step must be positive")
    if not np.any(y):
        raise ValueError("fundamental tensor is undefined at y = 0")
    H = central_hessian(lambda v: 0.5 * randers_norm(data, v) ** 2, y, step)
    return (H + H.T) / 2


def randers_from_dict(record: dict) -> tuple[InnerProduct, np.ndarray]:
    """Parse ``{"gram": [[...]], "X": [...]}`` without validating it."""
    try:
        gram = np.array(record["gram"], dtype=float)
        x = np.array(record.get("X", np.zeros(len(gram))), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed metric record: {exc}") from None
    return InnerProduct(gram), x
