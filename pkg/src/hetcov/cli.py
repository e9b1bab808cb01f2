"""Command-line front end.

Scenario files are JSON::

    {
      "density_unit": "per_km2",
      "noise": 0.0,
      "open_tiers": [
        {"density": 1, "power": 25, "pathloss_exp": 3,
         "fading": {"kind": "exponential", "params": {"mean": 1}},
         "threshold_db": 1, "bias_db": 0}
      ],
      "closed_tiers": [
        {"density": 2, "power": 1, "pathloss_exp": 4,
         "fading": {"kind": "lognormal_db", "params": {"sigma_db": 6}}}
      ]
    }

Internally lengths are in km, so ``per_m2`` densities are multiplied by 1e6.
Without noise only density ratios matter.  Thresholds and biases are given
in dB and stored linearly.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import re
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import analytic
from .mcsim import SimConfig, model_key, report_from_snapshots, simulate
from .model import (
    ANALYTIC,
    CLOSED,
    CONSTANT,
    EXPONENTIAL,
    LOGNORMAL_DB,
    MONTECARLO,
    OPEN,
    ConnectivityModel,
    CoverageReport,
    FadingDistribution,
    HetNetScenario,
    TierConfig,
    average_power_biases,
    db_to_linear,
    linear_to_db,
    validate_scenario,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

DENSITY_UNITS = {"per_km2": 1.0, "per_m2": 1e6}
FADING_PARAMS = {EXPONENTIAL: "mean", LOGNORMAL_DB: "sigma_db", CONSTANT: "value"}
OPEN_KEYS = {"density", "power", "pathloss_exp", "fading", "threshold_db", "bias_db"}
CLOSED_KEYS = {"density", "power", "pathloss_exp", "fading"}
TOP_KEYS = {"density_unit", "noise", "open_tiers", "closed_tiers"}
MODEL_NAMES = ("maxsinr", "nearest", "mirp", "mbrp")
ENGINES = ("auto", "analytic", "montecarlo", "both")


class InputError(Exception):
    def __init__(self, message: str, key: str = ""):
        super().__init__(message)
        self.key = key


class UnavailableError(InputError):
    """No analytic formula for the requested model/scenario."""


# ----------------------------------------------------------------- scenario documents

def _number(obj: Dict[str, Any], name: str, where: str, default=None) -> float:
    if name not in obj:
        if default is None:
            raise InputError(f"missing required key {name!r}", f"{where}.{name}".lstrip("."))
        return default
    v = obj[name]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise InputError(f"{name!r} must be a finite number", f"{where}.{name}".lstrip("."))
    return float(v)


def _check_keys(obj: Any, allowed: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise InputError("expected a JSON object", where)
    for k in obj:
        if k not in allowed:
            raise InputError(f"unknown key {k!r}", f"{where}.{k}".lstrip("."))


def _parse_fading(obj: Any, where: str) -> FadingDistribution:
    _check_keys(obj, {"kind", "params"}, where)
    kind = obj.get("kind")
    if kind not in FADING_PARAMS:
        raise InputError(f"fading kind must be one of {sorted(FADING_PARAMS)}", f"{where}.kind")
    params = obj.get("params", {})
    pname = FADING_PARAMS[kind]
    _check_keys(params, {pname}, f"{where}.params")
    default = 0.0 if kind == LOGNORMAL_DB else 1.0
    value = _number(params, pname, f"{where}.params", default)
    try:
        return FadingDistribution(kind, value)
    except ValueError as e:
        raise InputError(str(e), f"{where}.params.{pname}") from None


def _parse_tier(obj: Any, where: str, is_open: bool, unit: float) -> TierConfig:
    _check_keys(obj, OPEN_KEYS if is_open else CLOSED_KEYS, where)
    if "fading" not in obj:
        raise InputError("missing required key 'fading'", f"{where}.fading")
    kw = dict(
        density=_number(obj, "density", where) * unit,
        power=_number(obj, "power", where),
        pathloss_exp=_number(obj, "pathloss_exp", where),
        fading=_parse_fading(obj["fading"], f"{where}.fading"),
    )
    if is_open:
        kw["sinr_threshold"] = db_to_linear(_number(obj, "threshold_db", where, 0.0))
        kw["bias"] = db_to_linear(_number(obj, "bias_db", where, 0.0))
    else:
        kw["access"] = CLOSED
    return TierConfig(**kw)


def parse_document(doc: Any) -> HetNetScenario:
    """Validate a decoded scenario document and build the scenario."""
    _check_keys(doc, TOP_KEYS, "")
    unit_name = doc.get("density_unit")
    if unit_name not in DENSITY_UNITS:
        raise InputError(f"density_unit must be one of {sorted(DENSITY_UNITS)}", "density_unit")
    unit = DENSITY_UNITS[unit_name]
    tiers = {}
    for name, is_open in (("open_tiers", True), ("closed_tiers", False)):
        lst = doc.get(name, [])
        if not isinstance(lst, list):
            raise InputError("expected a list", name)
        tiers[name] = [_parse_tier(t, f"{name}[{i}]", is_open, unit) for i, t in enumerate(lst)]
    sc = HetNetScenario(tiers["open_tiers"], tiers["closed_tiers"], _number(doc, "noise", "", 0.0))
    problems = validate_scenario(sc)
    if problems:
        raise InputError("; ".join(problems), "scenario")
    return sc


def load_document(path: str) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InputError(f"cannot read scenario file: {e.strerror}", "file") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"malformed JSON at line {e.lineno} column {e.colno}: {e.msg}", "json") from None


def load_scenario(path: str) -> HetNetScenario:
    return parse_document(load_document(path))


def _fading_doc(f: FadingDistribution) -> Dict[str, Any]:
    return {"kind": f.kind, "params": {FADING_PARAMS[f.kind]: f.param}}


def _exact_db(x: float) -> float:
    """dB value whose conversion lands closest to ``x`` (exactly, when possible)."""
    d = linear_to_db(x)
    cand = [d]
    up = down = d
    for _ in range(16):
        up, down = math.nextafter(up, math.inf), math.nextafter(down, -math.inf)
        cand += [up, down]
    return min(cand, key=lambda c: abs(db_to_linear(c) - x))


def scenario_to_document(sc: HetNetScenario) -> Dict[str, Any]:
    """Inverse of ``parse_document`` (densities written per km^2)."""
    def tier(t: TierConfig, is_open: bool) -> Dict[str, Any]:
        d = {"density": t.density, "power": t.power, "pathloss_exp": t.pathloss_exp,
             "fading": _fading_doc(t.fading)}
        if is_open:
            d["threshold_db"] = _exact_db(t.sinr_threshold)
            d["bias_db"] = _exact_db(t.bias)
        return d

    return {
        "density_unit": "per_km2",
        "noise": sc.noise,
        "open_tiers": [tier(t, True) for t in sc.open_tiers],
        "closed_tiers": [tier(t, False) for t in sc.closed_tiers],
    }


_PATH_PART = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\[(\d+)\])?$")


def set_path(doc: Dict[str, Any], path: str, value: float) -> Dict[str, Any]:
    """Copy of ``doc`` with the value at a dotted path such as
    ``open_tiers[0].threshold_db`` replaced."""
    out = copy.deepcopy(doc)
    node: Any = out
    parts = path.split(".")
    for i, part in enumerate(parts):
        m = _PATH_PART.match(part)
        if not m or not isinstance(node, dict):
            raise InputError(f"cannot resolve parameter path {path!r}", "sweep.parameter")
        name, idx = m.group(1), m.group(2)
        last = i == len(parts) - 1
        if idx is not None:
            lst = node.get(name)
            if not isinstance(lst, list) or int(idx) >= len(lst):
                raise InputError(f"cannot resolve parameter path {path!r}", "sweep.parameter")
            if last:
                lst[int(idx)] = value
            else:
                node = lst[int(idx)]
        elif last:
            node[name] = value
        else:
            if name not in node:
                node[name] = {}
            node = node[name]
    return out


# ----------------------------------------------------------------- evaluation

@dataclass(frozen=True)
class Options:
    trials: int = 100_000
    seed: int = 0
    disk_radius: float = 1.0
    omega_max: float = analytic.DEFAULT_QUAD.omega_max
    tolerance: float = analytic.DEFAULT_QUAD.radial_rel_tol

    def quad(self) -> analytic.QuadratureSpec:
        return analytic.QuadratureSpec(omega_max=self.omega_max, radial_rel_tol=self.tolerance)

    def sim(self) -> SimConfig:
        return SimConfig(trials=self.trials, disk_radius=self.disk_radius, seed=self.seed)


def build_model(name: str, sc: HetNetScenario) -> ConnectivityModel:
    if name == "mbrp":
        return ConnectivityModel.mbrp([t.bias for t in sc.open_tiers])
    return ConnectivityModel(name)


def analytic_available(sc: HetNetScenario, model: ConnectivityModel, fast_only: bool = False) -> bool:
    v = model.variant
    ge1 = all(t.sinr_threshold >= 1 for t in sc.open_tiers)
    all_exp = all(t.fading.kind == EXPONENTIAL for t in sc.all_tiers())
    if v == ConnectivityModel.MIRP:
        return True
    if v == ConnectivityModel.MBRP:
        return all_exp
    if v == ConnectivityModel.MAXSINR:
        return True if not fast_only else ge1 or len({t.sinr_threshold for t in sc.open_tiers}) == 1
    # nearest-BS: a single open tier behaves like MBRP, otherwise only the slow path
    if fast_only:
        return sc.K == 1 and all_exp
    return True


def analytic_report(sc: HetNetScenario, model: ConnectivityModel, quad) -> CoverageReport:
    v = model.variant
    if v == ConnectivityModel.MIRP:
        return analytic.coverage_mirp(sc, quad)
    if v == ConnectivityModel.MBRP:
        if not analytic_available(sc, model):
            raise UnavailableError("no analytic MBRP formula for non-exponential fading; use montecarlo", "engine")
        return analytic.coverage_mbrp_exp(sc, model.biases, quad)
    if v == ConnectivityModel.MAXSINR:
        if all(t.sinr_threshold >= 1 for t in sc.open_tiers):
            return analytic.coverage_beta_ge1(sc, quad)
        if len({t.sinr_threshold for t in sc.open_tiers}) == 1:
            return analytic.coverage_mirp(sc, quad)
        return analytic.coverage_general(sc, model, quad)
    if analytic_available(sc, model, fast_only=True):
        return analytic.coverage_mbrp_exp(sc, average_power_biases(sc), quad)
    return analytic.coverage_general(sc, model, quad)


def resolve_engines(engine: str, sc: HetNetScenario, model: ConnectivityModel) -> List[str]:
    if engine == "both":
        return [ANALYTIC, MONTECARLO]
    if engine == "auto":
        return [ANALYTIC if analytic_available(sc, model, fast_only=True) else MONTECARLO]
    return [engine]


def evaluate(sc: HetNetScenario, model: ConnectivityModel, engine: str, opts: Options) -> CoverageReport:
    if engine == ANALYTIC:
        return analytic_report(sc, model, opts.quad())
    return report_from_snapshots(sc, simulate(sc, [model], opts.sim()), model)


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else repr(float(x))


def header(k: int, with_param: bool = False) -> List[str]:
    cols = ["parameter", "value"] if with_param else []
    cols += ["model", "engine", "probability", "stderr", "trials"]
    cols += [f"tier{i + 1}_serving" for i in range(k)]
    return cols + ["conditional_rate_bits"]


def row(model: str, engine: str, rep: CoverageReport, k: int) -> List[str]:
    tiers = list(rep.tier_serving_prob) + [None] * (k - len(rep.tier_serving_prob))
    return [model, engine, _fmt(rep.probability), _fmt(rep.stderr), str(rep.trials)] + [
        _fmt(t) for t in tiers[:k]
    ] + [_fmt(rep.conditional_rate)]


def write_csv(rows: Sequence[Sequence[str]], stream) -> None:
    w = csv.writer(stream, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    w.writerows(rows)


# ----------------------------------------------------------------- commands

def cmd_coverage(args, out) -> int:
    sc = load_scenario(args.scenario)
    opts = _options(args)
    rows = [header(sc.K)]
    for name in _models(args.model):
        model = build_model(name, sc)
        for eng in resolve_engines(args.engine, sc, model):
            rows.append(row(name, eng, evaluate(sc, model, eng, opts), sc.K))
    _emit(rows, args.out, out)
    return EXIT_OK


def _sweep_point(job):
    doc, param, value, models, engine, opts = job
    sc = parse_document(set_path(doc, param, value))
    out = []
    for name in models:
        model = build_model(name, sc)
        for eng in resolve_engines(engine, sc, model):
            out.append([param, _fmt(value)] + row(name, eng, evaluate(sc, model, eng, opts), sc.K))
    return out


def sweep_values(start: float, stop: float, steps: int) -> List[float]:
    if steps < 2:
        raise InputError("steps must be at least 2", "sweep.steps")
    return [start + (stop - start) * i / (steps - 1) for i in range(steps)]


def run_sweep(doc, param: str, values: Sequence[float], models: Sequence[str], engine: str,
              opts: Options, jobs: int = 1) -> List[List[str]]:
    """Rows for every sweep point, ordered by sweep index."""
    sc = parse_document(set_path(doc, param, values[0]))
    work = [(doc, param, v, list(models), engine, opts) for v in values]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(work))) as pool:
            chunks = list(pool.map(_sweep_point, work))
    else:
        chunks = [_sweep_point(w) for w in work]
    rows = [header(sc.K, with_param=True)]
    for c in chunks:
        rows.extend(c)
    return rows


def cmd_sweep(args, out) -> int:
    doc = load_document(args.scenario)
    parse_document(doc)
    values = sweep_values(args.start, args.stop, args.steps)
    rows = run_sweep(doc, args.parameter, values, _models(args.model), args.engine, _options(args), args.jobs)
    _emit(rows, args.out, out)
    if args.svg:
        _atomic_write(args.svg, render_svg(rows))
    return EXIT_OK


def compare_rows(sc: HetNetScenario, models: Sequence[str], opts: Options) -> List[List[str]]:
    """Side-by-side coverage table followed by ordering checks.

    All models are evaluated on the same simulated snapshots, so the
    max-SINR/nearest nesting is checked snapshot by snapshot.
    """
    ge1 = all(t.sinr_threshold >= 1 for t in sc.open_tiers)
    common_beta = len({t.sinr_threshold for t in sc.open_tiers}) == 1
    allm = {name: build_model(name, sc) for name in models}
    for need in ("maxsinr", "nearest"):
        allm.setdefault(need, ConnectivityModel(need))
    if ge1 or common_beta:
        allm.setdefault("mirp", ConnectivityModel.mirp())
    if ge1:
        allm["mbrp_avg"] = ConnectivityModel.mbrp(average_power_biases(sc))
    res = simulate(sc, list(allm.values()), opts.sim())
    mc = {n: report_from_snapshots(sc, res, m) for n, m in allm.items()}
    an = {n: analytic_report(sc, m, opts.quad())
          for n, m in allm.items() if analytic_available(sc, m, fast_only=True)}

    rows = [["kind", "name", "analytic", "analytic_stderr", "montecarlo", "montecarlo_stderr", "verdict"]]
    for n in allm:
        a = an.get(n)
        rows.append(["model", n, _fmt(a.probability if a else None), _fmt(a.stderr if a else None),
                     _fmt(mc[n].probability), _fmt(mc[n].stderr), ""])

    cov = {n: res.covered[model_key(m)] for n, m in allm.items()}
    viol = int((cov["nearest"] & ~cov["maxsinr"]).sum())
    rows.append(["check", "maxsinr>=nearest", "", "", str(viol), "", "PASS" if viol == 0 else "FAIL"])

    def agree(a: str, b: str) -> List[str]:
        pa, pb = mc[a], mc[b]
        diff = abs(pa.probability - pb.probability)
        tol = 3 * math.hypot(pa.stderr, pb.stderr) + 1e-12
        return ["check", f"{a}=={b}", "", "", _fmt(diff), _fmt(tol), "PASS" if diff <= tol else "FAIL"]

    if "mirp" in mc:
        rows.append(agree("maxsinr", "mirp"))
    if "mbrp_avg" in mc:
        rows.append(agree("nearest", "mbrp_avg"))
    if sc.L > 0:
        beta = sc.open_tiers[0].sinr_threshold
        opened = HetNetScenario(
            sc.open_tiers + tuple(t.replace(access=OPEN, sinr_threshold=beta) for t in sc.closed_tiers),
            (), sc.noise)
        m = ConnectivityModel.max_sinr()
        o = report_from_snapshots(opened, simulate(opened, [m], opts.sim()), m)
        closed = mc["maxsinr"]
        ok = o.probability >= closed.probability - 3 * math.hypot(o.stderr, closed.stderr)
        rows.append(["check", "open_access>=closed_access", "", "", _fmt(o.probability),
                     _fmt(closed.probability), "PASS" if ok else "FAIL"])
    return rows


def cmd_compare(args, out) -> int:
    sc = load_scenario(args.scenario)
    names = _models(args.model) if args.model else list(MODEL_NAMES)
    _emit(compare_rows(sc, names, _options(args)), args.out, out)
    return EXIT_OK


# ----------------------------------------------------------------- output helpers

def _atomic_write(path: str, text: str) -> None:
    """Write via a temporary file so failures never leave partial output."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".hetcov-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(rows, path: Optional[str], out) -> None:
    buf = io.StringIO()
    write_csv(rows, buf)
    if path:
        _atomic_write(path, buf.getvalue())
    else:
        out.write(buf.getvalue())


def render_svg(rows: Sequence[Sequence[str]], width: int = 640, height: int = 420) -> str:
    """Line plot of probability against the swept value, one curve per model/engine."""
    head = list(rows[0])
    iv, im, ie, ip = (head.index(c) for c in ("value", "model", "engine", "probability"))
    curves: Dict[Tuple[str, str], List[Tuple[float, float]]] = {}
    for r in rows[1:]:
        curves.setdefault((r[im], r[ie]), []).append((float(r[iv]), float(r[ip])))
    xs = [x for c in curves.values() for x, _ in c]
    x0, x1 = min(xs), max(xs)
    if x1 == x0:
        x1 = x0 + 1
    ml, mr, mt, mb = 60, 150, 20, 50
    pw, ph = width - ml - mr, height - mt - mb

    def px(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y):
        return mt + (1 - y) * ph

    colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for i in range(6):
        y = i / 5
        out.append(f'<text x="{ml - 8}" y="{py(y) + 4:.1f}" text-anchor="end">{y:.1f}</text>')
        xv = x0 + (x1 - x0) * i / 5
        out.append(f'<text x="{px(xv):.1f}" y="{mt + ph + 18}" text-anchor="middle">{xv:.3g}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 8}" text-anchor="middle">{_xml(rows[1][0])}</text>')
    out.append(f'<text x="14" y="{mt + ph / 2}" transform="rotate(-90 14 {mt + ph / 2})" '
               f'text-anchor="middle">coverage probability</text>')
    for j, ((m, e), pts) in enumerate(curves.items()):
        c = colours[j % len(colours)]
        poly = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{poly}"/>')
        ly = mt + 14 + 18 * j
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly - 4}" x2="{ml + pw + 30}" y2="{ly - 4}" stroke="{c}"/>')
        out.append(f'<text x="{ml + pw + 36}" y="{ly}">{_xml(m)} ({_xml(e)})</text>')
    out.append("</svg>\n")
    return "\n".join(out)


def _xml(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


# ----------------------------------------------------------------- argument handling

def _models(spec: Optional[Sequence[str]]) -> List[str]:
    names: List[str] = []
    for chunk in spec or ["mirp"]:
        for n in chunk.split(","):
            n = n.strip().lower()
            if n not in MODEL_NAMES:
                raise InputError(f"unknown model {n!r}; choose from {', '.join(MODEL_NAMES)}", "model")
            if n not in names:
                names.append(n)
    return names


def _options(args) -> Options:
    if args.trials < 1:
        raise InputError("trials must be positive", "trials")
    if not args.disk_radius > 0:
        raise InputError("disk radius must be positive", "disk-radius")
    if not args.omega_max > 0:
        raise InputError("omega-max must be positive", "omega-max")
    if not (0 < args.tolerance <= 1e-2):
        raise InputError("tolerance must lie in (0, 1e-2]", "tolerance")
    return Options(args.trials, args.seed, args.disk_radius, args.omega_max, args.tolerance)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message, "arguments")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hetcov", description="Coverage probability of heterogeneous Poisson cellular networks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, engine=True):
        sp.add_argument("scenario", help="scenario JSON file")
        sp.add_argument("--model", action="append",
                        help="maxsinr, nearest, mirp or mbrp; repeat or comma-separate")
        if engine:
            sp.add_argument("--engine", choices=ENGINES, default="auto")
        sp.add_argument("--trials", type=int, default=100_000)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--disk-radius", type=float, default=1.0,
                        help="initial simulation disk radius (grown automatically)")
        sp.add_argument("--omega-max", type=float, default=analytic.DEFAULT_QUAD.omega_max)
        sp.add_argument("--tolerance", type=float, default=analytic.DEFAULT_QUAD.radial_rel_tol,
                        help="relative quadrature tolerance")
        sp.add_argument("--out", help="write CSV here instead of standard output")

    common(sub.add_parser("coverage", help="evaluate one scenario"))
    sw = sub.add_parser("sweep", help="sweep one scenario parameter")
    common(sw)
    sw.add_argument("--parameter", required=True, help="e.g. open_tiers[0].threshold_db")
    sw.add_argument("--from", dest="start", type=float, required=True)
    sw.add_argument("--to", dest="stop", type=float, required=True)
    sw.add_argument("--steps", type=int, required=True)
    sw.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                    help="sweep points evaluated in parallel")
    sw.add_argument("--svg", help="also write an SVG plot of the sweep")
    common(sub.add_parser("compare", help="compare models and check their ordering"), engine=False)
    return p


def _fail(err, code: int, kind: str, key: str = "") -> int:
    msg = " ".join(str(err).split())
    sys.stderr.write(json.dumps({"error": kind, "exit": code, "key": key, "message": msg}) + "\n")
    return code


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        handler = {"coverage": cmd_coverage, "sweep": cmd_sweep, "compare": cmd_compare}[args.command]
        return handler(args, out)
    except InputError as e:
        return _fail(e, EXIT_INPUT, "input", e.key)
    except analytic.NonConvergenceError as e:
        return _fail(e, EXIT_NUMERIC, "nonconvergence")
    except (ValueError, ZeroDivisionError) as e:
        return _fail(e, EXIT_INPUT, "input")
    except (ArithmeticError, FloatingPointError) as e:
        return _fail(e, EXIT_NUMERIC, "numeric")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
