"""Configuration-driven parameter sweeps and regime charts.

Config files are INI-style (``configparser``) with a ``[sweep]`` header
carrying ``schema_version``.  Every ``[problem]`` or ``[problem.<label>]``
section expands into one simulation per q value; the shared ``[grid]``,
``[sim]``, ``[testfn]`` and ``[output]`` blocks may be overridden per
problem by keys of the same name inside the problem section.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from fraclap.exponents import ExponentParams, Regime, q_star, q_star_star
from fraclap.grid import Descriptor, make_grid, sample
from fraclap.simulate import Classification, PDEParams, SimControls, run
from fraclap.testfn import CutoffSpec, scaling_study

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INVALID, EXIT_DIVERGED = 0, 2, 3

ROW_FIELDS = (
    "label", "index", "p", "q", "beta", "N", "gamma", "initial", "predicted_regime", "exploratory",
    "outcome", "t_blowup", "final_sup", "steps", "slope_I", "slope_lower",
)


class ConfigError(ValueError):
    """Validation failure naming the offending field and the violated constraint."""

    def __init__(self, where: str, constraint: str):
        super().__init__(f"{where}: {constraint}")
        self.where, self.constraint = where, constraint


@dataclass(frozen=True)
class ProblemBlock:
    label: str
    N: int
    beta: float
    p: float
    q_values: tuple[float, ...]
    initial: str
    gamma: float | None = None
    epsilon: float | None = None
    n: int = 512
    L: float = 40.0
    sim: SimControls | None = None


@dataclass(frozen=True)
class SweepConfig:
    problems: tuple[ProblemBlock, ...]
    sim: SimControls
    simulate: bool = True
    T_list: tuple[float, ...] = ()
    B_list: tuple[float, ...] = (1.0,)
    ell: int | None = None
    eta: int | None = None
    directory: str = "sweep-out"
    formats: tuple[str, ...] = ("csv", "json", "dat")
    seed: int = 0
    threads: int = 1


@dataclass
class SweepRow:
    label: str
    index: int
    p: float
    q: float
    beta: float
    N: int
    gamma: float | None
    initial: str
    predicted_regime: str
    exploratory: bool
    outcome: str = ""
    t_blowup: float | None = None
    final_sup: float | None = None
    steps: int | None = None
    slope_I: float | None = None
    slope_lower: float | None = None
    diverged: bool = False
    diagnostics: dict = field(default_factory=dict)

    def csv_row(self) -> list[str]:
        out = []
        for name in ROW_FIELDS:
            v = getattr(self, name)
            if v is None:
                out.append("")
            elif isinstance(v, bool):
                out.append("true" if v else "false")
            elif isinstance(v, float):
                out.append(repr(v))
            else:
                out.append(str(v))
        return out


# {{{ parsing and validation


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _q_range(text: str, where: str) -> tuple[float, ...]:
    lo, hi, stepq = _floats(text)
    if not stepq > 0 or hi < lo:
        raise ConfigError(where, "q_range needs lo <= hi and a positive step")
    count = int(math.floor((hi - lo) / stepq + 1e-9)) + 1
    return tuple(round(lo + i * stepq, 12) for i in range(count))


def _get(sec, key, conv, default=None, where=""):
    if key not in sec or not sec[key].strip():
        return default
    try:
        return conv(sec[key])
    except ValueError as exc:
        raise ConfigError(f"{where}.{key}", f"cannot parse {sec[key]!r} ({exc})") from None


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


_SIM_KEYS = {"t_max": float, "cfl": float, "dt_min": float, "blowup_threshold": float,
             "dealias": _bool, "record_stride": int}
_SIM_DEFAULTS = {"t_max": 100.0, "cfl": 0.4, "dt_min": 1e-10, "blowup_threshold": 1e6,
                 "dealias": True, "record_stride": 1}


def _controls(base, local, where: str) -> SimControls:
    """SimControls from the shared [sim] block with per-problem keys taking precedence."""
    kw = {}
    for key, conv in _SIM_KEYS.items():
        sec, w = (local, where) if key in local else (base, "sim")
        kw[key] = _get(sec, key, conv, _SIM_DEFAULTS[key], w)
    try:
        return SimControls(**kw)
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None


def parse_config(text: str, overrides: dict | None = None) -> SweepConfig:
    """Parse and fully validate a sweep config; raises ConfigError before any work starts."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("config", f"unreadable ({exc.__class__.__name__})") from None
    overrides = overrides or {}

    if "sweep" not in cp:
        raise ConfigError("sweep", "missing [sweep] section")
    head = cp["sweep"]
    version = _get(head, "schema_version", int, None, "sweep")
    if version != SCHEMA_VERSION:
        raise ConfigError("sweep.schema_version", f"must be {SCHEMA_VERSION}, got {version}")
    seed = overrides.get("seed") if overrides.get("seed") is not None else _get(head, "seed", int, 0, "sweep")
    tasks = [t.strip() for t in head.get("tasks", "simulate").split(",") if t.strip()]
    for t in tasks:
        if t not in ("simulate", "testfn"):
            raise ConfigError("sweep.tasks", f"unknown task {t!r} (simulate, testfn)")

    grid = cp["grid"] if "grid" in cp else {}
    sim = cp["sim"] if "sim" in cp else {}
    tf = cp["testfn"] if "testfn" in cp else {}
    outb = cp["output"] if "output" in cp else {}

    controls = _controls(sim, {}, "sim")

    problems = []
    for name in cp.sections():
        if name != "problem" and not name.startswith("problem."):
            continue
        sec = cp[name]
        label = name.partition(".")[2] or "main"
        N = _get(sec, "N", int, None, name)
        beta = _get(sec, "beta", float, None, name)
        p = _get(sec, "p", float, None, name)
        for key, val in (("N", N), ("beta", beta), ("p", p)):
            if val is None:
                raise ConfigError(f"{name}.{key}", "required")
        if "q_list" in sec and sec["q_list"].strip():
            qs = _get(sec, "q_list", _floats, None, name)
        elif "q_range" in sec:
            qs = _q_range(sec["q_range"], f"{name}.q_range")
        else:
            raise ConfigError(f"{name}.q_list", "give q_list or q_range")
        gamma = _get(sec, "gamma", float, None, name)
        epsilon = _get(sec, "epsilon", float, None, name)
        if N not in (1, 2):
            raise ConfigError(f"{name}.N", "N must be 1 or 2")
        if not 0 < beta < 2:
            raise ConfigError(f"{name}.beta", "0 < beta < 2")
        if not p > 0:
            raise ConfigError(f"{name}.p", "p > 0")
        if gamma is not None and not 0 < gamma < N:
            raise ConfigError(f"{name}.gamma", f"Theorem 2 requires 0<γ<N (gamma={gamma}, N={N})")
        if epsilon is not None and not epsilon > 0:
            raise ConfigError(f"{name}.epsilon", "epsilon > 0")
        if not qs:
            raise ConfigError(f"{name}.q_list", "empty q list")
        initial = sec.get("initial", "gaussian:1,1").strip()
        if initial in ("algdecay", "algebraic_decay"):
            if gamma is None:
                raise ConfigError(f"{name}.initial", "algdecay data needs gamma")
            initial = str(Descriptor("algebraic_decay", (epsilon or 1.0, gamma)))
        try:
            desc = Descriptor.parse(initial)
        except ValueError as exc:
            raise ConfigError(f"{name}.initial", str(exc)) from None
        n = _get(sec, "n", int, None, name) or _get(grid, "n", int, 512, "grid")
        L = _get(sec, "L", float, None, name) or _get(grid, "L", float, 40.0, "grid")
        try:
            g = make_grid(N, n, L)
            sample(desc, g)
        except ValueError as exc:
            raise ConfigError(f"{name}.grid", str(exc)) from None
        local = _controls(sim, sec, name) if any(k in sec for k in _SIM_KEYS) else None
        problems.append(ProblemBlock(label, N, beta, p, tuple(qs), str(desc), gamma, epsilon, n, L, local))
    if not problems:
        raise ConfigError("problem", "at least one [problem] section is required")

    T_list = _get(tf, "T_list", _floats, (), "testfn")
    B_list = _get(tf, "B_list", _floats, (1.0,), "testfn")
    if "testfn" in tasks:
        if len(T_list) < 4 or max(T_list) / min(T_list) < 4 or min(T_list) <= 1:
            raise ConfigError("testfn.T_list", "needs >= 4 values > 1 spanning >= 2 octaves")
        if any(b < 1 for b in B_list):
            raise ConfigError("testfn.B_list", "B >= 1")
    formats = tuple(f.strip() for f in outb.get("formats", "csv,json,dat").split(",") if f.strip())
    directory = overrides.get("out") or outb.get("directory", "sweep-out")
    threads = overrides.get("threads") or 1
    return SweepConfig(
        problems=tuple(problems),
        sim=controls,
        simulate="simulate" in tasks,
        T_list=tuple(T_list) if "testfn" in tasks else (),
        B_list=tuple(B_list),
        ell=_get(tf, "ell", int, None, "testfn"),
        eta=_get(tf, "eta", int, None, "testfn"),
        directory=directory,
        formats=formats,
        seed=int(seed),
        threads=max(1, int(threads)),
    )


# }}}


# {{{ execution


def plan(cfg: SweepConfig) -> list[tuple[ProblemBlock, int, float]]:
    """Deterministic run order; q <= 1 combinations are skipped with a log line."""
    jobs = []
    for prob in cfg.problems:
        for i, q in enumerate(prob.q_values):
            if not q > 1:
                log.warning("skipping %s q=%s: the source term needs q > 1", prob.label, q)
                continue
            jobs.append((prob, i, float(q)))
    return jobs


def _execute(cfg: SweepConfig, prob: ProblemBlock, index: int, q: float) -> SweepRow:
    params = PDEParams(prob.p, q, prob.beta, prob.N, prob.gamma)
    regime = params.predicted_regime()
    row = SweepRow(prob.label, index, prob.p, q, prob.beta, prob.N, prob.gamma, prob.initial,
                   regime.value, not regime.predicts_nonexistence)
    if cfg.simulate:
        grid = make_grid(prob.N, prob.n, prob.L)
        out = run(sample(prob.initial, grid), params, prob.sim or cfg.sim)
        row.outcome = out.classification.value
        row.t_blowup = out.t_blowup
        row.final_sup = out.final_sup
        row.steps = out.steps
        row.diverged = out.diverged
        row.diagnostics = out.to_dict()
    if cfg.T_list:
        if q > prob.p:
            ep = ExponentParams(prob.p, q, prob.beta, prob.N, prob.gamma, prob.epsilon)
            cutoff = None
            if cfg.ell or cfg.eta:
                cutoff = CutoffSpec(cfg.ell or 4, cfg.eta or 4)
            _, fit = scaling_study(ep, cfg.T_list, (1.0,), cutoff)
            row.slope_I = fit.fitted_slopes.get("I")
            row.slope_lower = fit.fitted_slopes.get("lower_bound")
        else:
            log.warning("no test-function scaling for %s q=%s: needs q > p", prob.label, q)
    return row


def _run_name(row_or_prob, index: int, q: float) -> str:
    label = row_or_prob.label
    return f"{label}-{index:03d}-q{q:g}"


def _worker(args) -> SweepRow:
    cfg, prob, index, q, rundir = args
    row = _execute(cfg, prob, index, q)
    if rundir is not None:
        path = Path(rundir) / f"{_run_name(prob, index, q)}.json"
        path.write_text(json.dumps(_row_record(row), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return row


def _row_record(row: SweepRow) -> dict:
    rec = asdict(row)
    return rec


def execute(cfg: SweepConfig, rundir: Path | None = None) -> list[SweepRow]:
    jobs = [(cfg, prob, i, q, rundir) for prob, i, q in plan(cfg)]
    if cfg.threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(cfg.threads) as ex:
            return list(ex.map(_worker, jobs))
    return [_worker(j) for j in jobs]


def rows_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROW_FIELDS)
    for r in rows:
        w.writerow(r.csv_row())
    return buf.getvalue()


def run_config(path, overrides: dict | None = None) -> tuple[int, Path | None]:
    """Execute a sweep config. Returns (exit code, artifact directory)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        log.error("unreadable config %s: %s", path, exc)
        return EXIT_INVALID, None
    try:
        cfg = parse_config(text, overrides)
    except ConfigError as exc:
        log.error("invalid config: %s", exc)
        return EXIT_INVALID, None
    return run_sweep(cfg)


def run_sweep(cfg: SweepConfig) -> tuple[int, Path]:
    out = Path(cfg.directory)
    rundir = out / "runs"
    rundir.mkdir(parents=True, exist_ok=True)
    rows = execute(cfg, rundir if "json" in cfg.formats else None)
    summary = chart(rows)
    if "csv" in cfg.formats:
        (out / "rows.csv").write_text(rows_csv(rows), encoding="utf-8")
    if "dat" in cfg.formats:
        data, markers = chart_data(rows)
        (out / "chart.dat").write_text(data, encoding="utf-8")
        (out / "chart_markers.dat").write_text(markers, encoding="utf-8")
    summary["generated_at"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    summary["seed"] = cfg.seed
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    code = EXIT_DIVERGED if any(r.diverged for r in rows) else EXIT_OK
    return code, out


# }}}


# {{{ charting


def _agrees(row) -> bool | None:
    """True/False for a decided row under a nonexistence prediction, None otherwise."""
    outcome = _field(row, "outcome")
    regime = Regime(_field(row, "predicted_regime"))
    if outcome not in (Classification.BLOWUP.value, Classification.DECAY.value):
        return None
    if not regime.predicts_nonexistence:
        return None
    return outcome == Classification.BLOWUP.value


def _field(row, name):
    return row[name] if isinstance(row, dict) else getattr(row, name)


def chart(rows) -> dict:
    """Agreement between predicted nonexistence regimes and observed blow-up."""
    if not rows:
        raise ValueError("cannot chart an empty sweep")
    verdicts = [_agrees(r) for r in rows]
    decided = [v for v in verdicts if v is not None]
    disagreements = [
        {"label": _field(r, "label"), "q": _field(r, "q"), "predicted_regime": _field(r, "predicted_regime"),
         "outcome": _field(r, "outcome"), "final_sup": _field(r, "final_sup")}
        for r, v in zip(rows, verdicts) if v is False
    ]
    exploratory = [
        {"label": _field(r, "label"), "q": _field(r, "q"), "outcome": _field(r, "outcome")}
        for r in rows if not Regime(_field(r, "predicted_regime")).predicts_nonexistence
    ]
    return {
        "rows": len(rows),
        "decided": len(decided),
        "agreeing": sum(decided),
        "agreement": (sum(decided) / len(decided)) if decided else "not-applicable",
        "disagreements": disagreements,
        "exploratory": exploratory,
    }


_CODES = {"blowup": 1, "undecided": 0, "decay": -1, "": 0}


def chart_data(rows) -> tuple[str, str]:
    """Gnuplot-ready columns (q, outcome code, predicted code, t_blowup) and q*/q** marker lines."""
    lines = ["# q outcome(1=blowup,0=undecided,-1=decay) predicted(1=nonexistence,0=outside) t_blowup label"]
    markers = ["# vertical markers: x y (blocks separated by blank lines)"]
    seen = set()
    for r in rows:
        regime = Regime(_field(r, "predicted_regime"))
        tb = _field(r, "t_blowup")
        lines.append(
            f"{_field(r, 'q')!r} {_CODES[_field(r, 'outcome')]} {int(regime.predicts_nonexistence)} "
            f"{'nan' if tb is None else repr(tb)} {_field(r, 'label')}"
        )
        p, b, N, gam = _field(r, "p"), _field(r, "beta"), _field(r, "N"), _field(r, "gamma")
        for name, val in (("q_star", q_star(p, b, N)), ("q_star_star", q_star_star(p, b, gam) if gam else None)):
            if val is None or (name, val) in seen:
                continue
            seen.add((name, val))
            markers.append(f"# {name}\n{val!r} -1\n{val!r} 1\n")
    return "\n".join(lines) + "\n", "\n".join(markers) + "\n"


# }}}
