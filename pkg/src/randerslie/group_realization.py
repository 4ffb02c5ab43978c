"""Matrix models of the simply connected catalog groups.

Points are ambient matrices; tangent vectors at a point ``p`` are given in
exponential-chart coordinates, i.e. as velocities of ``log(p(s))``.  The
left trivialization ``Theta(p)`` turns such a velocity into an element of
the Lie algebra, which is where left-invariant objects are evaluated.

Group automorphisms are represented as ``exp o A o log`` for a linear map
``A`` on the algebra.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .lie_core import DEFAULT_TOL, LieAlgebra, abelian, ad, aff1, heisenberg3
from .randers import InnerProduct, RandersData, randers_norm
from .reports import Report
from .symmetry import exp_map, fixes_vector, is_automorphism, is_orthogonal

DEFAULT_STEP = 1e-4
SAMPLE_RADIUS = 1.0

REALIZATION_NAMES = ("abelian(n)", "heisenberg3", "aff1")


def numeric_jacobian(f: Callable, x, step: float = DEFAULT_STEP, richardson: bool = False) -> np.ndarray:
    """Central-difference Jacobian of a vector function; optionally Richardson-extrapolated."""
    x = np.asarray(x, dtype=float)
    n = x.size

    def central(h):
        cols = []
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h))
        return np.stack(cols, axis=-1)

    J = central(step)
    if richardson:
        J = (4 * central(step / 2) - J) / 3
    return J


def _phi1(M: np.ndarray) -> np.ndarray:
    """sum_k M^k / (k+1)!, read off the exponential of a block matrix."""
    n = M.shape[0]
    Z = np.zeros((2 * n, 2 * n))
    Z[:n, :n] = M
    Z[:n, n:] = np.eye(n)
    return exp_map(Z)[:n, n:]


@dataclass(frozen=True, eq=False)
class GroupRealization:
    name: str
    algebra: LieAlgebra
    ambient: int
    hat: Callable[[np.ndarray], np.ndarray]
    vee: Callable[[np.ndarray], np.ndarray]
    exp_rule: Callable[[np.ndarray], np.ndarray]
    log_rule: Callable[[np.ndarray], np.ndarray]
    is_point: Callable[[np.ndarray], bool]
    # exact chart Jacobian of left translation, (g, h) -> (n, n); finite differences otherwise
    dL_rule: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None

    @property
    def dim(self) -> int:
        return self.algebra.dim

    def identity(self) -> np.ndarray:
        return np.eye(self.ambient)

    def exp(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} coordinates, got shape {v.shape}")
        return self.exp_rule(v)

    def log(self, g) -> np.ndarray:
        return self.log_rule(np.asarray(g, dtype=float))

    def multiply(self, g, h) -> np.ndarray:
        return np.asarray(g) @ np.asarray(h)

    def inverse(self, g) -> np.ndarray:
        return np.linalg.inv(g)

    def trivialization(self, p) -> np.ndarray:
        """Theta(p): chart velocity at p -> algebra element p^{-1} dp.

        Equals (1 - exp(-ad u)) / ad u with u = log p, computed from the
        structure constants only.
        """
        u = self.log(p)
        return _phi1(-ad(self.algebra, u))

    def dL_matrix(self, g, h, step: float = DEFAULT_STEP, richardson: bool = True) -> np.ndarray:
        """Chart Jacobian of left translation by g, taken at h."""
        if self.dL_rule is not None:
            return self.dL_rule(g, h)
        return numeric_jacobian(lambda w: self.log(g @ self.exp(w)), self.log(h), step, richardson)

    def dL(self, g, h, v, step: float = DEFAULT_STEP, richardson: bool = True) -> np.ndarray:
        """Push a chart tangent vector at h forward to g h."""
        return self.dL_matrix(g, h, step, richardson) @ np.asarray(v, dtype=float)

    def sample_point(self, rng: np.random.Generator, radius: float = SAMPLE_RADIUS) -> np.ndarray:
        return self.exp(rng.uniform(-radius, radius, self.dim))


def _abelian_realization(n: int) -> GroupRealization:
    def hat(v):
        M = np.zeros((n + 1, n + 1))
        M[:n, n] = v
        return M

    def exp_rule(v):
        return np.eye(n + 1) + hat(v)

    def is_point(g):
        return np.allclose(g[:n, :n], np.eye(n)) and np.allclose(g[n], np.eye(n + 1)[n])

    return GroupRealization(
        f"abelian({n})", abelian(n), n + 1, hat, lambda M: M[:n, n].copy(), exp_rule,
        lambda g: g[:n, n].copy(), is_point, dL_rule=lambda g, h: np.eye(n),
    )


def _heisenberg_realization() -> GroupRealization:
    def hat(v):
        x, y, z = v
        return np.array([[0.0, x, z], [0.0, 0.0, y], [0.0, 0.0, 0.0]])

    def vee(M):
        return np.array([M[0, 1], M[1, 2], M[0, 2]])

    def exp_rule(v):
        x, y, z = v
        return np.array([[1.0, x, z + x * y / 2], [0.0, 1.0, y], [0.0, 0.0, 1.0]])

    def log_rule(g):
        x, y = g[0, 1], g[1, 2]
        return np.array([x, y, g[0, 2] - x * y / 2])

    def is_point(g):
        return g.shape == (3, 3) and np.allclose(np.tril(g), np.eye(3))

    return GroupRealization("heisenberg3", heisenberg3(), 3, hat, vee, exp_rule, log_rule, is_point)


def _expm1_ratio(a: float) -> float:
    """(e^a - 1) / a, continuous at 0."""
    return 1.0 if a == 0.0 else float(np.expm1(a) / a)


def _aff1_realization() -> GroupRealization:
    def hat(v):
        a, b = v
        return np.array([[a, b], [0.0, 0.0]])

    def vee(M):
        return np.array([M[0, 0], M[0, 1]])

    def exp_rule(v):
        a, b = v
        return np.array([[np.exp(a), b * _expm1_ratio(a)], [0.0, 1.0]])

    def log_rule(g):
        a = float(np.log(g[0, 0]))
        return np.array([a, g[0, 1] / _expm1_ratio(a)])

    def is_point(g):
        return g.shape == (2, 2) and g[0, 0] > 0 and g[1, 0] == 0 and g[1, 1] == 1

    return GroupRealization("aff1", aff1(), 2, hat, vee, exp_rule, log_rule, is_point)


_ABELIAN_RE = re.compile(r"^abelian\((\d+)\)$")


def realization_get(name: str) -> GroupRealization:
    name = name.strip()
    m = _ABELIAN_RE.match(name)
    if m and int(m.group(1)) >= 1:
        return _abelian_realization(int(m.group(1)))
    if name == "heisenberg3":
        return _heisenberg_realization()
    if name == "aff1":
        return _aff1_realization()
    if name == "so3":
        raise LookupError("so3 is algebra-level only; no simply connected matrix realization in catalog")
    raise LookupError(f"unknown realization {name!r}; available: {', '.join(REALIZATION_NAMES)}")


def has_realization(name: str) -> bool:
    try:
        realization_get(name)
    except LookupError:
        return False
    return True


# ---------------------------------------------------------------- group maps

@dataclass(frozen=True, eq=False)
class GroupMap:
    """A map of group points; ``matrix`` is set when it was built as exp o A o log."""

    realization: GroupRealization
    rule: Callable[[np.ndarray], np.ndarray]
    matrix: np.ndarray | None = field(default=None)

    def __call__(self, g) -> np.ndarray:
        return self.rule(np.asarray(g, dtype=float))

    @classmethod
    def from_linear(cls, real: GroupRealization, A) -> "GroupMap":
        A = np.asarray(A, dtype=float)
        return cls(real, lambda g: real.exp(A @ real.log(g)), A)

    @classmethod
    def identity(cls, real: GroupRealization) -> "GroupMap":
        return cls(real, lambda g: g, np.eye(real.dim))

    def compose(self, other: "GroupMap") -> "GroupMap":
        """self o other, as a composition of rules."""
        return GroupMap(self.realization, lambda g: self(other(g)))


def differential_at_identity(real: GroupRealization, phi: GroupMap, step: float = DEFAULT_STEP,
                             richardson: bool = False) -> np.ndarray:
    """T(phi) = d(phi)_e, the Jacobian of log o phi o exp at 0."""
    e = real.identity()
    off = float(np.abs(phi(e) - e).max())
    if off > DEFAULT_TOL:
        raise ValueError(f"map does not fix the identity (deviation {off:.3g})")
    return numeric_jacobian(lambda v: real.log(phi(real.exp(v))), np.zeros(real.dim), step, richardson)


def check_translation_commutation(real: GroupRealization, phi: GroupMap, samples: int = 200, seed: int = 42,
                                  tol: float = DEFAULT_TOL) -> Report:
    """phi o L_g == L_phi(g) o phi, i.e. phi(gh) == phi(g) phi(h), on sampled pairs."""
    rng = np.random.default_rng(seed)
    worst, witness = -1.0, None
    for _ in range(samples):
        u, v = rng.uniform(-SAMPLE_RADIUS, SAMPLE_RADIUS, (2, real.dim))
        g, h = real.exp(u), real.exp(v)
        r = float(np.abs(phi(g @ h) - phi(g) @ phi(h)).max())
        if r > worst:
            worst, witness = r, {"g": u, "h": v}
    return Report("translation_commutation", worst < tol, worst,
                  {"realization": real.name, "samples": samples, "seed": seed, "tol": tol, "witness": witness})


def _F_at(real: GroupRealization, data: RandersData, p, w) -> float:
    return randers_norm(data, real.trivialization(p) @ w)


def check_left_invariance_F(real: GroupRealization, data: RandersData, samples: int = 200, seed: int = 42,
                            tol: float = DEFAULT_TOL, step: float = DEFAULT_STEP) -> Report:
    """F(gh, dL_g Y) == F(h, Y) with dL_g from finite differences of the group law."""
    rng = np.random.default_rng(seed)
    worst, witness = -1.0, None
    for _ in range(samples):
        u, v = rng.uniform(-SAMPLE_RADIUS, SAMPLE_RADIUS, (2, real.dim))
        Y = rng.standard_normal(real.dim)
        g, h = real.exp(u), real.exp(v)
        gh = g @ h
        r = abs(_F_at(real, data, gh, real.dL(g, h, Y, step)) - _F_at(real, data, h, Y))
        if r > worst:
            worst, witness = r, {"g": u, "h": v, "Y": Y}
    return Report("left_invariance_F", worst < tol, worst,
                  {"realization": real.name, "samples": samples, "seed": seed, "tol": tol, "witness": witness})


# ---------------------------------------------------------------- vector fields

VectorField = Callable[[np.ndarray], np.ndarray]


def chart_constant_field(real: GroupRealization, value) -> VectorField:
    value = np.asarray(value, dtype=float)
    return lambda p: value.copy()


def left_invariant_field(real: GroupRealization, xe) -> VectorField:
    """X(p) = dL_p X_e, written in chart coordinates."""
    xe = np.asarray(xe, dtype=float)
    return lambda p: np.linalg.solve(real.trivialization(p), xe)


def polynomial_field(real: GroupRealization, terms) -> VectorField:
    """Chart-coordinate polynomial field.

    ``terms`` is a list of ``{"component": k, "coeff": c, "powers": [...]}``
    (component 1-based, one power per chart coordinate).
    """
    parsed = []
    for t in terms:
        k = int(t["component"]) - 1
        powers = np.asarray(t.get("powers", [0] * real.dim), dtype=int)
        if not 0 <= k < real.dim or powers.shape != (real.dim,):
            raise ValueError(f"bad polynomial term {t}")
        parsed.append((k, float(t["coeff"]), powers))

    def fieldfn(p):
        u = real.log(p)
        out = np.zeros(real.dim)
        for k, c, powers in parsed:
            out[k] += c * np.prod(u**powers)
        return out

    return fieldfn


def field_from_spec(real: GroupRealization, spec: dict, default_x=None) -> VectorField:
    """Builtin fields by name: chart_constant, left_invariant, custom_polynomial."""
    kind = spec.get("kind")
    if kind == "chart_constant":
        return chart_constant_field(real, spec.get("value", default_x))
    if kind == "left_invariant":
        return left_invariant_field(real, spec.get("value", default_x))
    if kind == "custom_polynomial":
        return polynomial_field(real, spec["terms"])
    raise ValueError(f"unknown field kind {kind!r}; expected chart_constant, left_invariant, custom_polynomial")


def check_forced_left_invariance_X(real: GroupRealization, metric: InnerProduct, field: VectorField,
                                   samples: int = 200, seed: int = 42, tol: float = DEFAULT_TOL,
                                   step: float = DEFAULT_STEP) -> Report:
    """Per sampled pair (g, h): (a) F built from the field is dL_g-invariant, (b) the field is.

    The report passes when (a) and (b) agree on every pair.
    """
    rng = np.random.default_rng(seed)
    G = metric.gram
    max_norm = 0.0

    def F_at(p, w, X_alg):
        y = real.trivialization(p) @ w
        return float(np.sqrt(y @ G @ y) + X_alg @ G @ y)

    flags_a, flags_b = [], []
    worst_a = worst_b = 0.0
    violation = None
    for _ in range(samples):
        u, v = rng.uniform(-SAMPLE_RADIUS, SAMPLE_RADIUS, (2, real.dim))
        g, h = real.exp(u), real.exp(v)
        gh = g @ h
        Xh_alg = real.trivialization(h) @ field(h)
        Xgh_alg = real.trivialization(gh) @ field(gh)
        max_norm = max(max_norm, float(metric.norm(Xh_alg)), float(metric.norm(Xgh_alg)))

        J = real.dL_matrix(g, h, step)
        res_b = float(np.abs(field(gh) - J @ field(h)).max())

        d = Xgh_alg - Xh_alg
        Ys = [rng.standard_normal(real.dim)]
        nd = float(metric.norm(d))
        if nd > 0:
            Ys.append(np.linalg.solve(real.trivialization(h), d / nd))
        res_a = max(abs(F_at(gh, J @ Y, Xgh_alg) - F_at(h, Y, Xh_alg)) for Y in Ys)

        a_ok, b_ok = res_a < tol, res_b < tol
        flags_a.append(a_ok)
        flags_b.append(b_ok)
        worst_a, worst_b = max(worst_a, res_a), max(worst_b, res_b)
        if a_ok != b_ok and violation is None:
            violation = {"g": u, "h": v, "residual_F": res_a, "residual_X": res_b}
    if max_norm >= 1.0:
        raise ValueError(f"field reaches norm {max_norm:.3g} >= 1 on the sampled points")
    mismatches = sum(a != b for a, b in zip(flags_a, flags_b))
    details = {
        "realization": real.name,
        "F_left_invariant": all(flags_a),
        "X_left_invariant": all(flags_b),
        "residual_F": worst_a,
        "residual_X": worst_b,
        "mismatches": mismatches,
        "max_field_norm": max_norm,
        "samples": samples,
        "seed": seed,
        "tol": tol,
        "witness": violation,
    }
    return Report("forced_left_invariance_X", mismatches == 0, worst_a, details)


def check_automorphism_isometry(real: GroupRealization, data: RandersData, A, samples: int = 200, seed: int = 42,
                                tol: float = DEFAULT_TOL, step: float = DEFAULT_STEP,
                                check_preconditions: bool = True) -> Report:
    """phi = exp o A o log preserves F: F(phi(g), d(phi)_g Y) == F(g, Y)."""
    A = np.asarray(A, dtype=float)
    if check_preconditions:
        for label, (ok, r) in (
            ("is_automorphism", is_automorphism(real.algebra, A, tol)),
            ("is_orthogonal", is_orthogonal(data.metric, A, tol)),
            ("fixes_vector", fixes_vector(A, data.drift, tol)),
        ):
            if not ok:
                raise ValueError(f"precondition {label} failed (residual {r:.3g})")
    phi = GroupMap.from_linear(real, A)
    rng = np.random.default_rng(seed)
    x = data.drift
    worst, witness = -1.0, None
    for _ in range(samples):
        u = rng.uniform(-SAMPLE_RADIUS, SAMPLE_RADIUS, real.dim)
        g = real.exp(u)
        J = numeric_jacobian(lambda w: real.log(phi(real.exp(w))), u, step, richardson=True)
        theta = real.trivialization(g)
        Ys = [rng.standard_normal(real.dim)]
        for d in (x, np.linalg.solve(A, A @ x - x)):
            if np.any(d):
                Ys.append(np.linalg.solve(theta, d / data.metric.norm(d)))
        pg = phi(g)
        for Y in Ys:
            r = abs(_F_at(real, data, pg, J @ Y) - _F_at(real, data, g, Y))
            if r > worst:
                worst, witness = r, {"g": u, "Y": Y}
    return Report("automorphism_isometry", worst < tol, worst,
                  {"realization": real.name, "samples": samples, "seed": seed, "tol": tol, "witness": witness})
