"""Seeded property checks for left-invariant Randers metrics, aggregated into a report.

Each property id maps to a function taking a resolved :class:`Context` and
returning a :class:`Outcome`.  Properties are independent, so :func:`run`
may execute them on a thread pool; records are keyed by label and emitted
in configuration order.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import group_realization as gr
from .lie_core import DEFAULT_TOL, LieAlgebra, catalog_get, validate_algebra
from .randers import (
    InnerProduct,
    RandersData,
    fundamental_tensor,
    fundamental_tensor_fd,
    randers_norm,
    scale_metric,
    validate_randers,
)
from .reports import jsonable
from .symmetry import (
    derivation_space,
    directed_witness,
    exp_map,
    fixes_vector,
    infinitesimal_K,
    is_automorphism,
    is_orthogonal,
    randers_isometry_linear,
    sample_orthogonal_automorphisms,
    sign_automorphisms,
    unit_sphere_samples,
)

# pinned tolerances for checks against numerical oracles
FD_TOL = 1e-6
PREDICATE_TOL = 1e-8
GROUP_TOL = 1e-7
TMAP_TOL = 1e-7
WITNESS_GAP = 1e-6

HOMOG_LAMBDAS = (0.5, 2.0, 10.0)
AUTISO_TIMES = (0.1, -0.1, 1.0, -1.0, 5.0, -5.0)

PROPERTY_IDS = (
    "P-HOMOG",
    "P-HESSPD",
    "P-LEFTINV",
    "P-ISO-FWD",
    "P-ISO-BWD",
    "P-EQ-ISO",
    "P-XLEFTINV",
    "P-AUTISO",
    "P-T-MAP",
    "P-SCALING",
)


@dataclass
class PropertyConfig:
    id: str
    algebra: str | dict = "heisenberg3"
    gram: list | None = None
    drift: list | None = None
    samples: int = 200
    seed: int = 42
    tol: float = DEFAULT_TOL
    params: dict = field(default_factory=dict)
    label: str | None = None

    def key(self) -> str:
        if self.label:
            return self.label
        name = self.algebra if isinstance(self.algebra, str) else self.algebra.get("name", "custom")
        return f"{self.id}[{name}]"

    def to_dict(self) -> dict:
        return jsonable({
            "id": self.id, "algebra": self.algebra, "gram": self.gram, "X": self.drift,
            "samples": self.samples, "seed": self.seed, "tol": self.tol,
            "params": self.params, "label": self.label,
        })

    @classmethod
    def from_dict(cls, d: dict) -> "PropertyConfig":
        if not isinstance(d, dict) or "id" not in d:
            raise ValueError(f"property config must be an object with an 'id': {d!r}")
        return cls(
            id=d["id"], algebra=d.get("algebra", "heisenberg3"), gram=d.get("gram"), drift=d.get("X"),
            samples=d.get("samples", 200), seed=d.get("seed", 42), tol=d.get("tol", DEFAULT_TOL),
            params=d.get("params", {}), label=d.get("label"),
        )


@dataclass
class Context:
    config: PropertyConfig
    alg: LieAlgebra
    metric: InnerProduct
    x: np.ndarray
    realization: gr.GroupRealization | None

    @property
    def data(self) -> RandersData:
        return RandersData(self.metric, self.x)

    @property
    def samples(self) -> int:
        return self.config.samples

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def tol(self) -> float:
        return self.config.tol

    def rng(self, salt: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])


class Outcome(NamedTuple):
    passed: bool | None
    residual: float
    witness: dict | None
    details: dict


@dataclass
class PropertyRecord:
    id: str
    label: str
    algebra: str
    passed: bool | None
    residual: float
    witness: dict | None
    samples: int
    seed: int
    wall_time: float
    details: dict

    def to_dict(self) -> dict:
        return jsonable({
            "id": self.id, "label": self.label, "algebra": self.algebra, "pass": self.passed,
            "residual": float(self.residual), "witness": self.witness, "samples": self.samples,
            "seed": self.seed, "wall_time": self.wall_time, "details": self.details,
        })


@dataclass
class VerificationReport:
    records: list[PropertyRecord]

    @property
    def passed(self) -> bool:
        return all(r.passed is not False for r in self.records)

    def __getitem__(self, label: str) -> PropertyRecord:
        for r in self.records:
            if r.label == label or (r.id == label and sum(q.id == label for q in self.records) == 1):
                return r
        raise KeyError(label)

    def to_dict(self) -> dict:
        return {"pass": self.passed, "records": [r.to_dict() for r in self.records]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_text(self) -> str:
        rows = [("label", "result", "residual", "samples", "seed", "time[s]")]
        for r in self.records:
            status = "SKIP" if r.passed is None else ("PASS" if r.passed else "FAIL")
            rows.append((r.label, status, f"{r.residual:.3e}", str(r.samples), str(r.seed), f"{r.wall_time:.2f}"))
        widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        n_fail = sum(r.passed is False for r in self.records)
        lines.append(f"{len(self.records)} properties, {n_fail} failed")
        return "\n".join(lines)


# ---------------------------------------------------------------- resolution

def resolve_algebra(spec: str | dict | LieAlgebra) -> LieAlgebra:
    if isinstance(spec, LieAlgebra):
        return spec
    if isinstance(spec, str):
        return catalog_get(spec)
    return LieAlgebra.from_dict(spec)


def build_context(cfg: PropertyConfig) -> Context:
    """Resolve and validate a config; raises ValueError on any invalid input."""
    if cfg.id not in PROPERTY_IDS:
        raise ValueError(f"unknown property id {cfg.id!r}; valid ids: {', '.join(PROPERTY_IDS)}")
    if not isinstance(cfg.samples, int) or cfg.samples < 1:
        raise ValueError(f"{cfg.key()}: samples must be a positive integer")
    if not cfg.tol > 0:
        raise ValueError(f"{cfg.key()}: tol must be positive")
    try:
        alg = resolve_algebra(cfg.algebra)
    except LookupError as exc:
        raise ValueError(str(exc)) from None
    if not validate_algebra(alg):
        raise ValueError(f"{cfg.key()}: algebra {alg.name} fails validation")
    n = alg.dim
    metric = InnerProduct(np.eye(n) if cfg.gram is None else cfg.gram)
    x = np.zeros(n) if cfg.drift is None else np.asarray(cfg.drift, dtype=float)
    if metric.dim != n or x.shape != (n,):
        raise ValueError(f"{cfg.key()}: metric/X dimensions do not match algebra dimension {n}")
    if cfg.id != "P-SCALING":
        report = validate_randers(metric, x)
        if not report:
            raise ValueError(f"{cfg.key()}: invalid Randers data ({', '.join(report.details['failures'])})")
    real = gr.realization_get(alg.name) if gr.has_realization(alg.name) and isinstance(cfg.algebra, str) else None
    return Context(cfg, alg, metric, x, real)


def _skipped(ctx: Context, why: str) -> Outcome:
    return Outcome(None, 0.0, None, {"skipped": why})


# ---------------------------------------------------------------- properties

def prop_homog(ctx: Context) -> Outcome:
    data = ctx.data
    ys = unit_sphere_samples(ctx.metric, ctx.samples, ctx.rng())
    ys = ys * ctx.rng(1).uniform(0.1, 3.0, ctx.samples)[:, None]
    worst, witness = 0.0, None
    for lam in HOMOG_LAMBDAS:
        lhs = randers_norm(data, lam * ys)
        rhs = lam * randers_norm(data, ys)
        rel = np.abs(lhs - rhs) / np.abs(rhs)
        i = int(rel.argmax())
        if witness is None or rel[i] > worst:
            worst, witness = float(rel[i]), {"y": ys[i], "lambda": lam}
    return Outcome(worst < ctx.tol, worst, witness, {"lambdas": list(HOMOG_LAMBDAS), "relative": True})


def prop_hesspd(ctx: Context) -> Outcome:
    data = ctx.data
    step = ctx.config.params.get("step", 1e-4)
    ys = unit_sphere_samples(ctx.metric, ctx.samples, ctx.rng())
    worst, witness, min_eig, max_asym = 0.0, None, np.inf, 0.0
    for y in ys:
        g = fundamental_tensor(data, y)
        diff = float(np.abs(g - fundamental_tensor_fd(data, y, step)).max())
        min_eig = min(min_eig, float(np.linalg.eigvalsh(g).min()))
        max_asym = max(max_asym, float(np.abs(g - g.T).max()))
        if witness is None or diff > worst:
            worst, witness = diff, {"y": y, "step": step}
    passed = worst < FD_TOL and min_eig > 0 and max_asym == 0.0
    return Outcome(passed, worst, witness, {"fd_tol": FD_TOL, "min_eigenvalue": min_eig, "max_asymmetry": max_asym})


def prop_leftinv(ctx: Context) -> Outcome:
    if ctx.realization is None:
        return _skipped(ctx, "algebra-level only; no realization")
    rep = gr.check_left_invariance_F(ctx.realization, ctx.data, ctx.samples, ctx.seed, ctx.tol)
    return Outcome(rep.passed, rep.residual, rep.witness, {"check": rep.check})


def _iso_samples(ctx: Context) -> list[np.ndarray]:
    count = int(ctx.config.params.get("maps", max(50, min(ctx.samples, 100))))
    return sample_orthogonal_automorphisms(ctx.alg, ctx.metric, ctx.x, count, ctx.rng(7))


def _injected_maps(ctx: Context) -> list[np.ndarray]:
    return [np.asarray(m["matrix"] if isinstance(m, dict) else m, dtype=float)
            for m in ctx.config.params.get("inject", [])]


def prop_iso_fwd(ctx: Context) -> Outcome:
    data = ctx.data
    maps = [A for A in _iso_samples(ctx) + _injected_maps(ctx) if fixes_vector(A, ctx.x, ctx.tol)[0]]
    worst, witness = 0.0, None
    for k, A in enumerate(maps):
        chk = randers_isometry_linear(data, A, ctx.samples, ctx.seed + k, ctx.tol)
        if witness is None or chk.residual > worst:
            worst, witness = chk.residual, {"A": A, "y": chk.witness}
    return Outcome(worst < ctx.tol, worst, witness, {"maps_fixing_x": len(maps)})


def prop_iso_bwd(ctx: Context) -> Outcome:
    """A in O(G) with A x != x must move F somewhere; residual is the weakest witness found."""
    data = ctx.data
    maps = _iso_samples(ctx) + _injected_maps(ctx)
    violating = [A for A in maps if not fixes_vector(A, ctx.x, ctx.tol)[0]]
    injected_not_orthogonal = [k for k, A in enumerate(_injected_maps(ctx)) if not is_orthogonal(ctx.metric, A)[0]]
    if injected_not_orthogonal:
        raise ValueError(f"injected maps {injected_not_orthogonal} are not G-orthogonal")
    if not violating:
        return Outcome(True, 0.0, None, {"violating_maps": 0, "note": "no sampled map moves X"})
    weakest, witness = np.inf, None
    for A in violating:
        w = directed_witness(data, A)
        if w.residual < weakest:
            weakest, witness = w.residual, {"A": A, "y": w.witness}
    return Outcome(weakest > WITNESS_GAP, weakest, witness,
                   {"violating_maps": len(violating), "required_gap": WITNESS_GAP})


def prop_eq_iso(ctx: Context) -> Outcome:
    """On sampled orthogonal automorphisms: fixes X <=> F-isometry."""
    data = ctx.data
    worst, witness, mismatches = 0.0, None, []
    n_fix = 0
    for k, A in enumerate(_iso_samples(ctx)):
        fixed = fixes_vector(A, ctx.x, ctx.tol)[0]
        chk = randers_isometry_linear(data, A, ctx.samples, ctx.seed + k, ctx.tol)
        directed = directed_witness(data, A)
        invariant = chk.ok and directed.residual < ctx.tol
        if fixed:
            n_fix += 1
            if witness is None or chk.residual > worst:
                worst, witness = chk.residual, {"A": A, "y": chk.witness}
        if fixed != invariant:
            mismatches.append({"A": A, "fixes": fixed, "invariant": invariant})
    if mismatches:
        witness = mismatches[0]
    return Outcome(not mismatches, worst, witness, {"maps_fixing_x": n_fix, "mismatches": len(mismatches)})


def default_chart_field(alg_dim: int) -> np.ndarray:
    v = np.zeros(alg_dim)
    v[0] = 0.2
    return v


def prop_xleftinv(ctx: Context) -> Outcome:
    real = ctx.realization
    if real is None:
        return _skipped(ctx, "algebra-level only; no realization")
    specs = ctx.config.params.get("fields") or [
        {"kind": "left_invariant", "value": ctx.x},
        {"kind": "chart_constant", "value": default_chart_field(ctx.alg.dim)},
    ]
    runs, worst, witness, ok = [], 0.0, None, True
    for spec in specs:
        rep = gr.check_forced_left_invariance_X(real, ctx.metric, gr.field_from_spec(real, spec, ctx.x),
                                                ctx.samples, ctx.seed, ctx.tol)
        runs.append({"field": spec, "F_left_invariant": rep.details["F_left_invariant"],
                     "X_left_invariant": rep.details["X_left_invariant"], "mismatches": rep.details["mismatches"]})
        if spec["kind"] == "left_invariant" and not (rep.details["F_left_invariant"] and rep.details["X_left_invariant"]):
            ok = False
        ok = ok and bool(rep.passed)
        if rep.details["mismatches"] > worst:
            worst, witness = float(rep.details["mismatches"]), rep.witness
    return Outcome(ok, worst, witness, {"fields": runs, "residual_meaning": "mismatched samples"})


def prop_autiso(ctx: Context) -> Outcome:
    data = ctx.data
    K = infinitesimal_K(ctx.alg, ctx.metric, ctx.x)
    gens = list(K.vectors) if K.dim else [np.zeros((ctx.alg.dim,) * 2)]
    worst, witness, failures = 0.0, None, []
    group_samples = int(ctx.config.params.get("group_samples", min(ctx.samples, 50)))
    for i, D in enumerate(gens):
        for t in AUTISO_TIMES:
            A = exp_map(D, t)
            preds = {
                "is_automorphism": is_automorphism(ctx.alg, A, PREDICATE_TOL),
                "is_orthogonal": is_orthogonal(ctx.metric, A, PREDICATE_TOL),
                "fixes_vector": fixes_vector(A, ctx.x, PREDICATE_TOL),
            }
            lin = randers_isometry_linear(data, A, ctx.samples, ctx.seed, ctx.tol)
            res = max([r for _, r in preds.values()] + [lin.residual])
            ok = all(p for p, _ in preds.values()) and lin.ok
            w = {"generator": i, "t": t, "D": D, "y": lin.witness}
            if ctx.realization is not None:
                rep = gr.check_automorphism_isometry(ctx.realization, data, A, group_samples, ctx.seed, GROUP_TOL,
                                                     check_preconditions=False)
                ok = ok and bool(rep.passed)
                if rep.residual > res:
                    res, w = rep.residual, {"generator": i, "t": t, "D": D, **rep.witness}
            if not ok:
                failures.append({"generator": i, "t": t})
            if witness is None or res > worst:
                worst, witness = res, w
    details = {"K_dim": K.dim, "times": list(AUTISO_TIMES), "predicate_tol": PREDICATE_TOL,
               "group_tol": GROUP_TOL, "group_level": ctx.realization is not None, "failures": failures}
    return Outcome(not failures, worst, witness, details)


def sample_automorphisms(alg: LieAlgebra, count: int, rng: np.random.Generator, scale: float = 0.5) -> list[np.ndarray]:
    """exp of random derivations composed with diagonal sign automorphisms."""
    der = derivation_space(alg)
    signs = sign_automorphisms(alg)
    return [exp_map(der.combine(scale * rng.standard_normal(der.dim))) @ signs[int(rng.integers(len(signs)))]
            for _ in range(count)]


def prop_tmap(ctx: Context) -> Outcome:
    real = ctx.realization
    if real is None:
        return _skipped(ctx, "algebra-level only; no realization")
    pairs = int(ctx.config.params.get("pairs", 20))
    step = float(ctx.config.params.get("step", 1e-4))
    rng = ctx.rng(11)
    autos = sample_automorphisms(ctx.alg, 2 * pairs, rng)
    worst_rec = worst_fun = 0.0
    witness = None
    for k in range(pairs):
        A, B = autos[2 * k], autos[2 * k + 1]
        phiA, phiB = gr.GroupMap.from_linear(real, A), gr.GroupMap.from_linear(real, B)
        TA = gr.differential_at_identity(real, phiA, step)
        TB = gr.differential_at_identity(real, phiB, step)
        TAB = gr.differential_at_identity(real, phiA.compose(phiB), step)
        rec = float(max(np.abs(TA - A).max(), np.abs(TB - B).max()))
        fun = float(np.abs(TAB - TA @ TB).max())
        if witness is None or max(rec, fun) > max(worst_rec, worst_fun):
            witness = {"A": A, "B": B}
        worst_rec, worst_fun = max(worst_rec, rec), max(worst_fun, fun)

    # K' elements stay in K' after a round trip through the group
    K = infinitesimal_K(ctx.alg, ctx.metric, ctx.x)
    kprime_ok = True
    worst_pred = 0.0
    for _ in range(pairs if K.dim else 0):
        A = exp_map(K.combine(rng.standard_normal(K.dim)))
        T = gr.differential_at_identity(real, gr.GroupMap.from_linear(real, A), step)
        checks = (is_automorphism(ctx.alg, T, PREDICATE_TOL), is_orthogonal(ctx.metric, T, PREDICATE_TOL),
                  fixes_vector(T, ctx.x, PREDICATE_TOL))
        kprime_ok = kprime_ok and all(ok for ok, _ in checks)
        worst_pred = max([worst_pred] + [r for _, r in checks])
    residual = max(worst_rec, worst_fun)
    passed = residual < TMAP_TOL and kprime_ok
    return Outcome(passed, residual, witness, {
        "pairs": pairs, "step": step, "recovery_residual": worst_rec, "functoriality_residual": worst_fun,
        "kprime_predicate_residual": worst_pred, "tmap_tol": TMAP_TOL,
    })


def random_spd(n: int, rng: np.random.Generator, low: float = 0.5, high: float = 2.0) -> np.ndarray:
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    G = Q @ np.diag(rng.uniform(low, high, n)) @ Q.T
    return (G + G.T) / 2


def _scaling_case(gram: np.ndarray, x: np.ndarray) -> tuple[bool, int, float]:
    metric0 = InnerProduct(gram)
    metric, N = scale_metric(metric0, x)
    q = float(x @ gram @ x)
    minimal = N == 1 or not q / (N - 1) < 1.0
    ok = minimal and bool(validate_randers(metric, x)) and q / N < 1.0
    return ok, N, q / N


def prop_scaling(ctx: Context) -> Outcome:
    sweep = int(ctx.config.params.get("sweep", 100))
    rng = ctx.rng(13)
    n = ctx.alg.dim
    own_ok, own_N, own_q = _scaling_case(ctx.metric.gram, ctx.x)
    failures = [] if own_ok else [{"gram": ctx.metric.gram, "x": ctx.x, "N": own_N}]
    worst = own_q
    for _ in range(sweep):
        G0 = random_spd(n, rng)
        x = rng.standard_normal(n)
        target = rng.uniform(0.1, 25.0)
        x *= np.sqrt(target / (x @ G0 @ x))
        ok, N, scaled = _scaling_case(G0, x)
        worst = max(worst, scaled)
        if not ok:
            failures.append({"gram": G0, "x": x, "N": N})
    witness = failures[0] if failures else {"gram": ctx.metric.gram, "x": ctx.x, "N": own_N}
    return Outcome(not failures, float(len(failures)), witness,
                   {"N": own_N, "scaled_norm_sq": own_q, "sweep": sweep, "largest_scaled_norm_sq": worst,
                    "residual_meaning": "cases where N is not minimal or the scaled data is invalid"})


PROPERTIES: dict[str, Callable[[Context], Outcome]] = {
    "P-HOMOG": prop_homog,
    "P-HESSPD": prop_hesspd,
    "P-LEFTINV": prop_leftinv,
    "P-ISO-FWD": prop_iso_fwd,
    "P-ISO-BWD": prop_iso_bwd,
    "P-EQ-ISO": prop_eq_iso,
    "P-XLEFTINV": prop_xleftinv,
    "P-AUTISO": prop_autiso,
    "P-T-MAP": prop_tmap,
    "P-SCALING": prop_scaling,
}


# ---------------------------------------------------------------- suites

def default_suite(algebra: str | dict = "heisenberg3", gram=None, drift=None, samples: int = 200, seed: int = 42,
                  tol: float = DEFAULT_TOL, suffix: str = "") -> list[PropertyConfig]:
    """One config per registered property, sharing the same data."""
    if isinstance(algebra, str):
        n = catalog_get(algebra).dim
    else:
        n = resolve_algebra(algebra).dim
    gram = np.eye(n).tolist() if gram is None else jsonable(gram)
    drift = [0.0] * n if drift is None else jsonable(drift)
    name = algebra if isinstance(algebra, str) else algebra.get("name", "custom")
    return [
        PropertyConfig(pid, algebra, gram, drift, samples, seed, tol, label=f"{pid}[{name}{suffix}]")
        for pid in PROPERTY_IDS
    ]


def catalog_suite(samples: int = 200, seed: int = 42, tol: float = DEFAULT_TOL) -> list[PropertyConfig]:
    """Every property on every catalog algebra, plus an X = 0 regression run."""
    configs = []
    for name, x in (("heisenberg3", [0, 0, 0.5]), ("so3", [0, 0, 0.5]), ("aff1", [0, 0.5]),
                    ("abelian(3)", [0, 0, 0.5])):
        configs += default_suite(name, None, x, samples, seed, tol)
    configs += default_suite("heisenberg3", None, None, samples, seed, tol, suffix=",X=0")
    return configs


def _run_one(ctx: Context) -> PropertyRecord:
    cfg = ctx.config
    start = time.perf_counter()
    out = PROPERTIES[cfg.id](ctx)
    elapsed = time.perf_counter() - start
    return PropertyRecord(
        cfg.id, cfg.key(), ctx.alg.name, out.passed, float(out.residual), jsonable(out.witness),
        cfg.samples, cfg.seed, elapsed, jsonable(out.details),
    )


def run(configs: list[PropertyConfig], max_workers: int = 1) -> VerificationReport:
    """Validate every config, then execute each property once."""
    contexts = [build_context(c) for c in configs]
    labels = [c.key() for c in configs]
    dupes = sorted({lab for lab in labels if labels.count(lab) > 1})
    if dupes:
        raise ValueError(f"duplicate property labels: {', '.join(dupes)}")
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            by_label = dict(zip(labels, pool.map(_run_one, contexts)))
    else:
        by_label = {lab: _run_one(ctx) for lab, ctx in zip(labels, contexts)}
    return VerificationReport([by_label[lab] for lab in labels])
