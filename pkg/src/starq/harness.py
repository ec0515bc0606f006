"""Scenario runner: suites of checks, convergence studies, JSON/CSV reports."""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .grid import GridSpec, SeminormIndex, l2_norm, sample
from .intertwiner import (
    _threads,
    apply_T,
    apply_T_inv,
    invariance_residual,
    invariant_product,
    moyal_invariance_residual,
    trace_defect,
)
from .lie import (
    E,
    F,
    H,
    IDENTITY,
    AlgebraElement,
    GroupElement,
    bch,
    bracket,
    group_exp,
    group_inv,
    group_log,
    group_mul,
)
from .moyal import DeformationProfile, covariance_residual, moyal_product
from .orbit import coadjoint_act, gaussian_panel, moment, OrbitPoint, poisson
from .star_exp import (
    bch_residual,
    multiplier_apply,
    ode_residual,
    pushed_exp_apply,
    star_exp,
)

__all__ = [
    "SUITES",
    "TAGS",
    "UsageError",
    "ScenarioConfig",
    "Record",
    "Report",
    "load_config",
    "run_scenario",
    "convergence_study",
    "compare_golden",
]

SUITES = ("group", "orbit", "covariance", "product", "trace", "invariance", "star-exp", "bch", "all")

# identity tag -> short description; the README index lists the same tags
TAGS = {
    "group-law": "associativity, unit and inverse of the group law",
    "exp-log": "exponential and logarithm are mutually inverse",
    "bch-closed-form": "closed-form BCH equals log(exp X exp Y)",
    "lie-bracket": "bracket antisymmetry and Jacobi identity",
    "moment-map": "{lambda_X, lambda_Y} = lambda_[X,Y]",
    "coadjoint-action": "the orbit action is a left action",
    "covariance": "[lambda_X, lambda_Y]_* = -i theta lambda_[X,Y]",
    "intertwiner": "invariant product = T((T^-1 f) *0 (T^-1 h))",
    "tracial-identity": "int f * h = int f h for the tracial profile",
    "invariance": "(g^* f) * (g^* h) = g^*(f * h)",
    "moyal-control": "Moyal product is not invariant (control)",
    "star-exp-ode": "d/dt E(tX) = (i/theta) lambda_X * E(tX)",
    "star-exp-unit": "E(0) acts as the identity multiplier",
    "pushed-exponential": "closed-form E_P(tX) equals the pushed Moyal exponential",
    "multiplier-seminorm": "E(tX) * f stays Schwartz-bounded",
    "bch-star": "E(BCH(X,Y)) = E(X) * E(Y) as multipliers",
    "semiclassical": "f * h - f h = O(theta), commutator/(-i theta) -> Poisson bracket",
}

DEFAULT_TOLERANCES = {
    "group": 1e-12,
    "orbit": 1e-10,
    "covariance": 1e-6,
    "product": 1e-4,
    "trace": 1e-4,
    "trace-control": 1e-2,
    "invariance": 1e-3,
    "moyal-control": 1e-3,
    "star-exp": 0.2,
    "star-exp-unit": 1e-10,
    "pushed-exponential": 1e-3,
    "multiplier-seminorm": 1e-2,
    "bch": 1e-2,
    "bch-commuting": 1e-3,
    "semiclassical": 1.0,
}


class UsageError(ValueError):
    """Malformed configuration or command-line input."""


@dataclass(frozen=True)
class ScenarioConfig:
    grid: GridSpec = GridSpec()
    theta_list: tuple[float, ...] = (0.5,)
    profile: str = "tracial"
    profile_table: Optional[tuple[tuple[float, float], ...]] = None
    suite: str = "all"
    tolerances: dict = field(default_factory=dict)
    seed: int = 1
    random_cases: int = 200

    def __post_init__(self) -> None:
        if not self.theta_list:
            raise UsageError("theta list must not be empty")
        if any(not (t > 0 and math.isfinite(t)) for t in self.theta_list):
            raise UsageError(f"theta values must be positive, got {list(self.theta_list)}")
        if self.suite not in SUITES:
            raise UsageError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        if self.profile not in ("tracial", "unit", "table"):
            raise UsageError(f"unknown profile {self.profile!r}")
        if self.profile == "table" and not self.profile_table:
            raise UsageError("profile = table needs a [profile] table entry")

    def tol(self, key: str) -> float:
        return float(self.tolerances.get(key, DEFAULT_TOLERANCES[key]))

    def make_profile(self, theta: float) -> DeformationProfile:
        if self.profile == "tracial":
            return DeformationProfile.tracial_profile(theta)
        if self.profile == "unit":
            return DeformationProfile.unit_profile(theta)
        ts, ps = zip(*sorted(self.profile_table))
        ts, logp = np.array(ts), np.log(np.array(ps))
        return DeformationProfile(theta, lambda t: np.interp(t, ts, logp), "table")


@dataclass
class Record:
    name: str
    tag: str
    inputs: dict
    value: float
    tolerance: float
    passed: bool
    runtime_s: float = 0.0
    comparison: str = "le"

    @property
    def digest(self) -> str:
        blob = json.dumps(self.inputs, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["inputs_digest"] = self.digest
        return d


@dataclass
class Report:
    suite: str
    seed: int
    records: list[Record] = field(default_factory=list)
    timestamp: str = ""
    kind: str = "run"

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def to_dict(self) -> dict:
        return {
            "schema": "starq-report/1",
            "kind": self.kind,
            "suite": self.suite,
            "seed": self.seed,
            "timestamp": self.timestamp,
            "passed": self.passed,
            "records": [r.to_dict() for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_jsonable)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "tag", "inputs_digest", "value", "tolerance", "comparison", "passed", "runtime_s"])
        for r in self.records:
            w.writerow([r.name, r.tag, r.digest, repr(r.value), repr(r.tolerance), r.comparison,
                        r.passed, f"{r.runtime_s:.3f}"])
        return buf.getvalue()

    def write(self, out_dir) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        pj, pc = out / "report.json", out / "report.csv"
        pj.write_text(self.to_json() + "\n")
        pc.write_text(self.to_csv())
        return pj, pc


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x).__name__}")


def canonical(report: dict) -> dict:
    """Report dict without the wall-clock fields (timestamp, runtimes)."""
    out = {k: v for k, v in report.items() if k != "timestamp"}
    out["records"] = [{k: v for k, v in r.items() if k != "runtime_s"} for r in report["records"]]
    return out


# ---------------------------------------------------------------- config


def _line_of(text: str, section: str, key: Optional[str] = None) -> int:
    cur = None
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            cur = s[1:-1].strip()
            if key is None and cur == section:
                return n
        elif cur == section and key is not None and s.split("=", 1)[0].strip() == key:
            return n
    return 0


def _parse_floats(raw: str) -> tuple[float, ...]:
    return tuple(float(x) for x in raw.replace(",", " ").split())


def parse_grid(raw: str) -> tuple[int, int]:
    try:
        na, nl = (int(x) for x in raw.lower().split("x"))
    except ValueError:
        raise UsageError(f"grid must look like NxM, got {raw!r}") from None
    return na, nl


def load_config(text: str, source: str = "<config>") -> ScenarioConfig:
    """Parse the INI-style scenario file.

    ``[scenario]`` holds ``suite``, ``theta``, ``profile``, ``seed``, ``grid``
    (``NxM``), ``a_window``, ``l_window`` and ``random_cases``; ``[tolerances]``
    overrides per-check tolerances; ``[profile]`` holds ``table = t:P, ...``.
    """
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text, source=source)
    except configparser.Error as e:
        raise UsageError(f"{source}: {e}") from None
    if not cp.has_section("scenario"):
        raise UsageError(f"{source}: missing [scenario] section")
    sc = cp["scenario"]
    known = {"suite", "theta", "profile", "seed", "grid", "a_window", "l_window", "random_cases"}

    def bad(key: str, msg: str, section: str = "scenario") -> UsageError:
        return UsageError(f"{source}:{_line_of(text, section, key)}: [{section}] {key}: {msg}")

    for key in sc:
        if key not in known:
            raise bad(key, "unknown field")
    kw: dict = {}
    try:
        if "suite" in sc:
            kw["suite"] = sc["suite"].strip()
        if "theta" in sc:
            kw["theta_list"] = _parse_floats(sc["theta"])
        if "profile" in sc:
            kw["profile"] = sc["profile"].strip()
    except ValueError as e:
        raise bad("theta", str(e)) from None
    for key, conv in (("seed", int), ("random_cases", int)):
        if key in sc:
            try:
                kw[key] = conv(sc[key])
            except ValueError:
                raise bad(key, f"expected an integer, got {sc[key]!r}") from None
    ga = {}
    try:
        if "grid" in sc:
            ga["n_a"], ga["n_l"] = parse_grid(sc["grid"])
        for key in ("a_window", "l_window"):
            if key in sc:
                ga[key] = float(sc[key])
        kw["grid"] = GridSpec(**ga)
    except (ValueError, UsageError) as e:
        key = "grid" if "grid" in sc else "a_window"
        raise bad(key, str(e)) from None
    if cp.has_section("tolerances"):
        tols = {}
        for key, raw in cp["tolerances"].items():
            if key not in DEFAULT_TOLERANCES:
                raise bad(key, "unknown tolerance", "tolerances")
            try:
                tols[key] = float(raw)
            except ValueError:
                raise bad(key, f"expected a number, got {raw!r}", "tolerances") from None
        kw["tolerances"] = tols
    if cp.has_section("profile") and "table" in cp["profile"]:
        try:
            pairs = tuple(tuple(float(v) for v in item.split(":"))
                          for item in cp["profile"]["table"].replace("\n", ",").split(",") if item.strip())
            if any(len(p) != 2 or p[1] <= 0 for p in pairs):
                raise ValueError("entries must be t:P with P > 0")
        except ValueError as e:
            raise bad("table", str(e), "profile") from None
        kw["profile_table"] = pairs
    try:
        return ScenarioConfig(**kw)
    except UsageError as e:
        key = "theta" if "theta" in str(e) else "suite" if "suite" in str(e) else "profile"
        raise bad(key, str(e)) from None


# ---------------------------------------------------------------- checks

Check = Callable[[], Record]


def _rel(x, y) -> float:
    return float(np.linalg.norm(np.ravel(x) - np.ravel(y)) / max(np.linalg.norm(np.ravel(y)), 1e-300))


def _rand_alg(rng, scale=1.0) -> AlgebraElement:
    v = rng.uniform(-scale, scale, 3)
    # include near-singular alpha
    if rng.uniform() < 0.3:
        v[0] = 10.0 ** rng.uniform(-6, -2) * rng.choice([-1, 1])
    return AlgebraElement(*v)


def _rand_group(rng) -> GroupElement:
    return GroupElement(*rng.uniform(-1, 1, 3))


def _g_tuple(g: GroupElement) -> np.ndarray:
    return np.array([g.a, g.l, g.m])


def _group_checks(cfg: ScenarioConfig) -> list[Check]:
    n, tol = cfg.random_cases, cfg.tol("group")

    def worst(fn) -> float:
        rng = np.random.default_rng(cfg.seed)
        return max(fn(rng) for _ in range(n))

    def rec(name, tag, fn):
        def run():
            v = worst(fn)
            return Record(name, tag, {"seed": cfg.seed, "cases": n}, v, tol, v <= tol)
        return run

    def assoc(rng):
        g1, g2, g3 = (_rand_group(rng) for _ in range(3))
        return _rel(_g_tuple((g1 * g2) * g3), _g_tuple(g1 * (g2 * g3)))

    def unit(rng):
        g = _rand_group(rng)
        return max(_rel(_g_tuple(g * IDENTITY), _g_tuple(g)), _rel(_g_tuple(IDENTITY * g), _g_tuple(g)))

    def inverse(rng):
        g = _rand_group(rng)
        return float(np.linalg.norm(_g_tuple(group_mul(g, group_inv(g)))))

    def log_exp(rng):
        X = _rand_alg(rng)
        return _rel(group_log(group_exp(X)).as_tuple(), X.as_tuple())

    def exp_log(rng):
        g = _rand_group(rng)
        return _rel(_g_tuple(group_exp(group_log(g))), _g_tuple(g))

    def bch_check(rng):
        X, Y = _rand_alg(rng), _rand_alg(rng)
        return _rel(bch(X, Y).as_tuple(), group_log(group_exp(X) * group_exp(Y)).as_tuple())

    def jacobi(rng):
        X, Y, Z = (_rand_alg(rng) for _ in range(3))
        j = (bracket(X, bracket(Y, Z)) + bracket(Y, bracket(Z, X)) + bracket(Z, bracket(X, Y)))
        anti = bracket(X, Y) + bracket(Y, X)
        return float(max(j.norm(), anti.norm()))

    return [
        rec("group.associativity", "group-law", assoc),
        rec("group.unit", "group-law", unit),
        rec("group.inverse", "group-law", inverse),
        rec("group.log_exp", "exp-log", log_exp),
        rec("group.exp_log", "exp-log", exp_log),
        rec("group.bch", "bch-closed-form", bch_check),
        rec("group.jacobi", "lie-bracket", jacobi),
    ]


def _orbit_checks(cfg: ScenarioConfig) -> list[Check]:
    tol = cfg.tol("orbit")
    n = cfg.random_cases

    def hom():
        from .orbit import moment_field
        rng = np.random.default_rng(cfg.seed)
        worst = 0.0
        for _ in range(n):
            X, Y = _rand_alg(rng), _rand_alg(rng)
            p = OrbitPoint(*rng.uniform(-1.5, 1.5, 2))
            lhs = poisson(moment_field(X), moment_field(Y), p)
            rhs = moment(bracket(X, Y), p)
            worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1.0))
        return Record("orbit.moment_homomorphism", "moment-map", {"seed": cfg.seed, "cases": n},
                      float(worst), tol, worst <= tol)

    def action():
        rng = np.random.default_rng(cfg.seed + 1)
        worst = 0.0
        for _ in range(n):
            g1, g2 = _rand_group(rng), _rand_group(rng)
            p = OrbitPoint(*rng.uniform(-1.5, 1.5, 2))
            lhs = coadjoint_act(g1 * g2, p)
            rhs = coadjoint_act(g1, coadjoint_act(g2, p))
            worst = max(worst, _rel([lhs.a, lhs.l], [rhs.a, rhs.l]))
        return Record("orbit.left_action", "coadjoint-action", {"seed": cfg.seed, "cases": n},
                      float(worst), tol, worst <= tol)

    return [hom, action]


_BASIS = (("H", H), ("E", E), ("F", F))


def _covariance_checks(cfg: ScenarioConfig) -> list[Check]:
    f = sample(gaussian_panel()[0], cfg.grid)
    tol = cfg.tol("covariance")
    checks = []
    for th in cfg.theta_list:
        for nx, X in _BASIS:
            for ny, Y in _BASIS:
                def run(th=th, X=X, Y=Y, nx=nx, ny=ny):
                    v = covariance_residual(X, Y, f, th)
                    return Record(f"covariance.{nx}{ny}", "covariance",
                                  {"theta": th, "X": nx, "Y": ny}, v, tol, v <= tol)
                checks.append(run)
    return checks


def _wide(grid: GridSpec) -> GridSpec:
    return GridSpec(grid.a_window, 2 * grid.l_window, grid.n_a, 2 * grid.n_l)


def intertwiner_consistency(f, h, prof: DeformationProfile, grid: GridSpec) -> float:
    """Relative l2 gap between the direct kernel and T((T^-1 f) *0 (T^-1 h)).

    The reference is computed on an l-window twice as wide (same spacing) so
    that its warped phases are resolved up to the edge of the test window.
    """
    w = _wide(grid)
    q = grid.n_l // 2
    fw, hw = sample(f, w), sample(h, w)
    ref = apply_T(prof, moyal_product(apply_T_inv(prof, fw), apply_T_inv(prof, hw), prof.theta))
    ref = ref.values[:, q: q + grid.n_l]
    got = invariant_product(sample(f, grid), sample(h, grid), prof).values
    return _rel(got, ref)


def _product_checks(cfg: ScenarioConfig) -> list[Check]:
    pan = gaussian_panel()
    tol = cfg.tol("product")
    checks = []
    for th in cfg.theta_list:
        for i, j in ((0, 1), (2, 3)):
            def run(th=th, i=i, j=j):
                v = intertwiner_consistency(pan[i], pan[j], cfg.make_profile(th), cfg.grid)
                return Record(f"product.panel{i}{j}", "intertwiner",
                              {"theta": th, "pair": [i, j], "profile": cfg.profile}, v, tol, v <= tol)
            checks.append(run)
    return checks


def _trace_checks(cfg: ScenarioConfig) -> list[Check]:
    pan = gaussian_panel()
    checks = []
    for th in cfg.theta_list:
        def tracial(th=th):
            v = float(trace_defect(pan[0], pan[1], DeformationProfile.tracial_profile(th), cfg.grid))
            t = cfg.tol("trace")
            return Record("trace.tracial", "tracial-identity", {"theta": th}, v, t, v <= t)

        def unit(th=th):
            v = float(trace_defect(pan[0], pan[1], DeformationProfile.unit_profile(th), cfg.grid))
            t = cfg.tol("trace-control")
            return Record("trace.unit_control", "tracial-identity", {"theta": th}, v, t, v > t, comparison="gt")
        checks += [tracial, unit]
    return checks


INVARIANCE_ELEMENTS = (
    GroupElement(0.3, 0.5, -0.2),
    GroupElement(-0.4, 0.2, 0.3),
    GroupElement(0.5, 0.1, 0.2),
    GroupElement(-0.2, 0.0, 0.5),
    GroupElement(0.2, -0.3, -0.4),
)


def _test_points(seed: int, n: int = 8) -> list[OrbitPoint]:
    rng = np.random.default_rng(seed)
    return [OrbitPoint(a, l) for a, l in zip(rng.uniform(-0.6, 0.6, n), rng.uniform(-1.5, 1.5, n))]


def _invariance_checks(cfg: ScenarioConfig) -> list[Check]:
    pan = gaussian_panel()
    pts = _test_points(cfg.seed)
    checks = []
    for th in cfg.theta_list:
        for k, g in enumerate(INVARIANCE_ELEMENTS):
            def inv(th=th, g=g, k=k):
                v = invariance_residual(g, pan[0], pan[1], cfg.make_profile(th), pts, cfg.grid)
                t = cfg.tol("invariance")
                return Record(f"invariance.g{k}", "invariance",
                              {"theta": th, "g": [g.a, g.l, g.m], "profile": cfg.profile}, v, t, v <= t)

            def ctrl(th=th, g=g, k=k):
                v = moyal_invariance_residual(g, pan[0], pan[1], th, pts)
                t = cfg.tol("moyal-control")
                return Record(f"invariance.moyal_control.g{k}", "moyal-control",
                              {"theta": th, "g": [g.a, g.l, g.m]}, v, t, v > t, comparison="gt")
            checks += [inv, ctrl]
    return checks


def _star_exp_checks(cfg: ScenarioConfig) -> list[Check]:
    pan = gaussian_panel()
    grid = cfg.grid
    checks = []
    for th in cfg.theta_list:
        for nx, X in _BASIS:
            def ode(th=th, X=X, nx=nx):
                r = ode_residual(X, 0.5, th, grid=grid)
                t = cfg.tol("star-exp")
                v = r.order
                return Record(f"star_exp.ode_order.{nx}", "star-exp-ode",
                              {"theta": th, "X": nx, "t": 0.5, "dt": 1e-3}, v, t, abs(v - 2.0) <= t,
                              comparison="abs(v-2)<=tol")
            checks.append(ode)

        def unit(th=th):
            f = sample(pan[0], grid)
            v = _rel(multiplier_apply(star_exp(H, 0.0, cfg.make_profile(th)), f).values, f.values)
            t = cfg.tol("star-exp-unit")
            return Record("star_exp.unit", "star-exp-unit", {"theta": th}, v, t, v <= t)

        def pushed(th=th):
            prof = cfg.make_profile(th)
            X = AlgebraElement(0.3, 0.2, -0.1)
            w = _wide(grid)
            q = grid.n_l // 2
            ref = pushed_exp_apply(X, 0.7, prof, sample(pan[0], w)).values[:, q: q + grid.n_l]
            got = multiplier_apply(star_exp(X, 0.7, prof), sample(pan[0], grid)).values
            v = _rel(got, ref)
            t = cfg.tol("pushed-exponential")
            return Record("star_exp.pushed", "pushed-exponential",
                          {"theta": th, "X": X.as_tuple(), "t": 0.7, "profile": cfg.profile}, v, t, v <= t)

        def seminorm(th=th):
            v = seminorm_window_drift(0.5 * H, cfg.make_profile(th), grid.n_l, grid.l_window)
            t = cfg.tol("multiplier-seminorm")
            return Record("star_exp.seminorm_drift", "multiplier-seminorm",
                          {"theta": th, "X": "0.5H", "windows": [3, 4, 5]}, v, t, v <= t)
        checks += [unit, pushed, seminorm]
    return checks


SEMINORM_INDICES = tuple(SeminormIndex(k, p, q, n)
                         for k in range(3) for p in range(3) for q in range(3) for n in range(3)
                         if k + p + q + n <= 2)


def seminorm_scans(X: AlgebraElement, prof: DeformationProfile, windows=(3.0, 4.0, 5.0),
                   n_a: int = 512, n_l: int = 256, l_window: float = 12.0) -> np.ndarray:
    """[window, index] table of panel-wide seminorms of E(X) * f."""

    Ex = star_exp(X, 1.0, prof)
    rows = []
    for A in windows:
        g = GridSpec(A, l_window, n_a, n_l)
        fam = [sample(f, g) for f in gaussian_panel()]
        outs = [multiplier_apply(Ex, f) for f in fam]
        from .grid import schwartz_seminorm
        rows.append([max(schwartz_seminorm(o, i) for o in outs) for i in SEMINORM_INDICES])
    return np.array(rows)


def seminorm_window_drift(X, prof, n_l=256, l_window=12.0) -> float:
    """Largest relative change of any scanned seminorm between consecutive windows."""
    tab = seminorm_scans(X, prof, n_l=n_l, l_window=l_window)
    if not np.all(np.isfinite(tab)):
        return math.inf
    return float(np.max(np.abs(np.diff(tab, axis=0)) / tab[:-1]))


def _bch_checks(cfg: ScenarioConfig) -> list[Check]:
    f = sample(gaussian_panel()[1], cfg.grid)
    checks = []
    for th in cfg.theta_list:
        def rand(th=th):
            rng = np.random.default_rng(cfg.seed)
            prof = cfg.make_profile(th)
            worst = 0.0
            for _ in range(20):
                X, Y = (AlgebraElement(*(v * rng.uniform(0, 0.5) / np.linalg.norm(v)))
                        for v in (rng.normal(size=3), rng.normal(size=3)))
                worst = max(worst, bch_residual(X, Y, prof, f))
            t = cfg.tol("bch")
            return Record("bch.random_pairs", "bch-star", {"theta": th, "seed": cfg.seed, "pairs": 20},
                          worst, t, worst <= t)

        def comm(th=th):
            prof = cfg.make_profile(th)
            v = max(bch_residual(0.3 * X, 0.4 * X, prof, f) for _, X in _BASIS)
            t = cfg.tol("bch-commuting")
            return Record("bch.commuting", "bch-star", {"theta": th}, v, t, v <= t)
        checks += [rand, comm]
    return checks


_SUITE_BUILDERS = {
    "group": _group_checks,
    "orbit": _orbit_checks,
    "covariance": _covariance_checks,
    "product": _product_checks,
    "trace": _trace_checks,
    "invariance": _invariance_checks,
    "star-exp": _star_exp_checks,
    "bch": _bch_checks,
}


def _timed(check: Check) -> Record:
    t0 = time.perf_counter()
    rec = check()
    rec.runtime_s = time.perf_counter() - t0
    rec.value = float(rec.value)
    return rec


def _run_checks(checks: list[Check]) -> list[Record]:
    with ThreadPoolExecutor(_threads()) as pool:
        return list(pool.map(_timed, checks))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run_scenario(cfg: ScenarioConfig) -> Report:
    names = [s for s in SUITES if s != "all"] if cfg.suite == "all" else [cfg.suite]
    checks: list[Check] = []
    for s in names:
        checks += _SUITE_BUILDERS[s](cfg)
    return Report(cfg.suite, cfg.seed, _run_checks(checks), _now())


# ---------------------------------------------------------------- convergence


def _orders(values) -> list[float]:
    return [math.log2(values[k] / values[k + 1]) for k in range(len(values) - 1)]


def semiclassical_series(f, h, thetas, grid: GridSpec) -> tuple[list[float], list[float]]:
    """||f *_theta h - f h|| (tracial profile) and the relative Poisson-limit error per theta."""
    F, Hf = sample(f, grid), sample(h, grid)
    A, L = grid.mesh()
    pb = poisson(f, h, (A, L))
    fh = F.values * Hf.values
    diffs, pberr = [], []
    for th in thetas:
        prod = invariant_product(F, Hf, DeformationProfile.tracial_profile(th)).values
        diffs.append(l2_norm(prod - fh, grid))
        comm = (moyal_product(F, Hf, th).values - moyal_product(Hf, F, th).values) / (-1j * th)
        pberr.append(l2_norm(comm - pb, grid) / l2_norm(pb, grid))
    return diffs, pberr


def convergence_study(cfg: ScenarioConfig, levels: int) -> Report:
    """Richardson-style order estimates over ``levels`` refinements.

    ``star-exp`` halves dt in the ODE residual; ``product``/``trace``/``invariance``
    halve theta in the semiclassical study; ``all`` runs both.  Other suites
    have no refinement parameter and are rejected.
    """
    if levels < 2:
        raise UsageError(f"convergence study needs at least 2 levels, got {levels}")
    want_ode = cfg.suite in ("star-exp", "all")
    want_sc = cfg.suite in ("product", "trace", "invariance", "all")
    if not (want_ode or want_sc):
        raise UsageError(f"suite {cfg.suite!r} has no convergence study")
    checks: list[Check] = []
    th0 = cfg.theta_list[0]
    if want_ode:
        for nx, X in _BASIS:
            def ode(X=X, nx=nx):
                dts = [1e-3 / 2**k for k in range(levels)]
                from .star_exp import ode_residual as odr
                res = [odr(X, 0.5, th0, dt, grid=cfg.grid).residual for dt in dts]
                orders = _orders(res)
                v = orders[-1]
                t = cfg.tol("star-exp")
                return Record(f"converge.ode.{nx}", "star-exp-ode",
                              {"theta": th0, "dt": dts, "residuals": res, "orders": orders},
                              v, t, abs(v - 2.0) <= t, comparison="abs(v-2)<=tol")
            checks.append(ode)
    if want_sc:
        def sc():
            pan = gaussian_panel()
            thetas = [0.4 / 2**k for k in range(levels)]
            diffs, pberr = semiclassical_series(pan[0], pan[1], thetas, cfg.grid)
            orders = _orders(diffs)
            v = min(orders)
            t = cfg.tol("semiclassical")
            return Record("converge.semiclassical", "semiclassical",
                          {"thetas": thetas, "diffs": diffs, "orders": orders,
                           "poisson_errors": pberr, "poisson_orders": _orders(pberr)},
                          v, t, v >= t and pberr[-1] < pberr[0], comparison="ge")
        checks.append(sc)
    return Report(cfg.suite, cfg.seed, _run_checks(checks), _now(), kind="converge")


# ---------------------------------------------------------------- golden


def compare_golden(report: dict, golden: dict, rtol: float = 1e-6, atol: float = 1e-12) -> list[str]:
    """Differences between a report and a stored one; empty when they agree.

    Records are matched by (name, inputs digest).  ``value`` is compared with
    ``rtol``/``atol``; ``tag``, ``tolerance`` and ``passed`` must match exactly.
    """
    diffs = []
    ref = {(r["name"], r["inputs_digest"]): r for r in golden.get("records", [])}
    cur = {(r["name"], r["inputs_digest"]): r for r in report["records"]}
    for key in sorted(set(ref) - set(cur)):
        diffs.append(f"missing record {key[0]} ({key[1]})")
    for key in sorted(set(cur) - set(ref)):
        diffs.append(f"extra record {key[0]} ({key[1]})")
    for key in sorted(set(ref) & set(cur)):
        a, b = cur[key], ref[key]
        for fld in ("tag", "tolerance", "passed"):
            if a[fld] != b[fld]:
                diffs.append(f"{key[0]}: {fld} {a[fld]!r} != golden {b[fld]!r}")
        va, vb = float(a["value"]), float(b["value"])
        if not (math.isclose(va, vb, rel_tol=rtol, abs_tol=atol) or (math.isinf(va) and va == vb)):
            diffs.append(f"{key[0]}: value {va!r} != golden {vb!r}")
    return diffs
