"""Batch front-end.

Usage::

    slext <command> [--config cfg.json] [--out path] [--format csv|json]
                    [--seed N] [--rank-tol X] [--grid-n N]

Commands: ``weyl-eval``, ``multiplicity``, ``spectrum-interval``,
``resolvent-check``, ``triplet-sum``, ``schrodinger-demo``, ``verify-all``.

The config is one JSON document.  Complex numbers are ``[re, im]`` pairs
(plain numbers are read as real), matrices are row-major nested lists.
Recognized keys::

    potential     {"diagonal": [...]} | {"matrix": [[...]]}
                  | {"schrodinger1d": {"q": [...], "length": L}}
    realization   {"kind": "dirichlet|neumann|krein"}
                  | {"matrix": [[...]], "triplet": "base|regularized"}
    t_grid        [t, ...] | {"start": a, "stop": b, "n": N}
    z             [z, ...]
    x_grid        {"h": h, "L": L}
    interval      {"bc": "DD|NN", "n": N, "count": K}   (h = pi / N)
    blocks        [potential, ...]                       (triplet-sum)
    tolerances    {"rank_tol", "herglotz_tol", "resolvent_tol", "interval_tol", "regularization_tol"}
    output        {"format": "csv|json", "path": "..."}

Exit status: 0 ok, 2 config error, 3 numerical-check failure, 4 solver failure.
Multiplicity CSV columns are ``t, rank, exceptional, realization, rank_tol``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigParse, SlextError
from .params import ExtensionParameter, Realization, Triplet

COMMANDS = (
    "weyl-eval",
    "multiplicity",
    "spectrum-interval",
    "resolvent-check",
    "triplet-sum",
    "schrodinger-demo",
    "verify-all",
)

DEFAULT_TOLERANCES = {
    "rank_tol": 1e-8,
    "herglotz_tol": 1e-10,
    "resolvent_tol": 1e-3,
    "interval_tol": 1e-2,
    "regularization_tol": 1e-10,
}

MULTIPLICITY_COLUMNS = ["t", "rank", "exceptional", "realization", "rank_tol"]


@dataclass
class Report:
    """What a command produces: a flat table plus a summary and a failure count."""

    command: str
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)
    failed: int = 0

    def to_json(self) -> str:
        doc = {
            "command": self.command,
            "failed_checks": self.failed,
            "summary": self.summary,
            "columns": self.columns,
            "rows": self.rows,
        }
        return json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_csv_cell(v) for v in row])
        return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _csv_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


# ---------------------------------------------------------------- config parsing

def _number(v, what="value") -> complex:
    if isinstance(v, bool):
        raise ConfigParse(f"{what}: expected a number, got a boolean")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in v):
        return complex(v[0], v[1])
    raise ConfigParse(f"{what}: expected a number or [re, im], got {v!r}")


def _real(v, what="value") -> float:
    c = _number(v, what)
    if c.imag != 0:
        raise ConfigParse(f"{what}: expected a real number")
    return c.real


def _matrix(v, what="matrix") -> np.ndarray:
    if not isinstance(v, list) or not v or not all(isinstance(r, list) for r in v):
        raise ConfigParse(f"{what}: expected a non-empty row-major list of rows")
    n = len(v)
    if any(len(r) != n for r in v):
        raise ConfigParse(f"{what}: expected a square matrix")
    return np.array([[_number(x, what) for x in row] for row in v], dtype=complex)


def _positive(v, what) -> float:
    x = _real(v, what)
    if not x > 0:
        raise ConfigParse(f"{what} must be positive")
    return x


def parse_potential(section):
    from .spectral import SpectralMeasure, from_schrodinger_1d, spectral_measure_from_matrix

    if not isinstance(section, dict) or len(section) != 1:
        raise ConfigParse("potential: expected exactly one of 'diagonal', 'matrix', 'schrodinger1d'")
    (kind, body), = section.items()
    if kind == "diagonal":
        if not isinstance(body, list) or not body:
            raise ConfigParse("potential.diagonal: expected a non-empty list")
        return SpectralMeasure.diagonal([_real(x, "potential.diagonal") for x in body])
    if kind == "matrix":
        return spectral_measure_from_matrix(_matrix(body, "potential.matrix"))
    if kind == "schrodinger1d":
        if not isinstance(body, dict) or "q" not in body or "length" not in body:
            raise ConfigParse("potential.schrodinger1d: expected {'q': [...], 'length': L}")
        q = [_real(x, "potential.schrodinger1d.q") for x in body["q"]]
        return from_schrodinger_1d(q, _positive(body["length"], "potential.schrodinger1d.length"))
    raise ConfigParse(f"potential: unknown kind {kind!r}")


def parse_realization(section, m):
    from .realizations import canonical_parameter

    if section is None:
        return ExtensionParameter.dirichlet()
    if not isinstance(section, dict):
        raise ConfigParse("realization: expected an object")
    try:
        triplet = Triplet(section.get("triplet", "base"))
    except ValueError as exc:
        raise ConfigParse(f"realization.triplet: {exc}") from exc
    if "kind" in section:
        try:
            kind = Realization(section["kind"])
        except ValueError as exc:
            raise ConfigParse(f"realization.kind: {exc}") from exc
        if kind is Realization.ROBIN:
            raise ConfigParse("realization: give a robin parameter as 'matrix'")
        return canonical_parameter(m, kind, triplet)
    if "matrix" in section:
        B = _matrix(section["matrix"], "realization.matrix")
        if B.shape != (m.dim, m.dim):
            raise ConfigParse(f"realization.matrix must be {m.dim}x{m.dim}")
        return ExtensionParameter.from_matrix(B, triplet)
    raise ConfigParse("realization: expected 'kind' or 'matrix'")


def parse_t_grid(section, grid_n=None) -> np.ndarray:
    if isinstance(section, list):
        if not section:
            raise ConfigParse("t_grid is empty")
        ts = np.array([_real(t, "t_grid") for t in section])
        if np.any(np.diff(ts) < 0):
            raise ConfigParse("t_grid must be sorted")
        return ts
    if isinstance(section, dict):
        try:
            a, b = _real(section["start"], "t_grid.start"), _real(section["stop"], "t_grid.stop")
            n = int(grid_n if grid_n is not None else section["n"])
        except KeyError as exc:
            raise ConfigParse(f"t_grid: missing {exc}") from exc
        if n < 1 or b < a:
            raise ConfigParse("t_grid: need n >= 1 and stop >= start")
        return np.linspace(a, b, n)
    raise ConfigParse("t_grid: expected a list or {start, stop, n}")


def parse_tolerances(section, rank_tol=None) -> dict:
    tols = dict(DEFAULT_TOLERANCES)
    if section is not None:
        if not isinstance(section, dict):
            raise ConfigParse("tolerances: expected an object")
        for k, v in section.items():
            if k not in tols:
                raise ConfigParse(f"tolerances: unknown key {k!r}")
            tols[k] = _positive(v, f"tolerances.{k}")
    if rank_tol is not None:
        if not rank_tol > 0:
            raise ConfigParse("--rank-tol must be positive")
        tols["rank_tol"] = float(rank_tol)
    return tols


def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigParse(f"cannot read config: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"invalid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigParse("config must be a JSON object")
    return cfg


def _require(cfg, key):
    if key not in cfg:
        raise ConfigParse(f"config is missing {key!r}")
    return cfg[key]


def _realization_label(p: ExtensionParameter) -> str:
    return "dirichlet" if p.is_dirichlet else (p.label or "robin")


# ---------------------------------------------------------------- commands

def cmd_weyl_eval(cfg, args) -> Report:
    from .weyl import weyl_of_extension

    m = parse_potential(_require(cfg, "potential"))
    p = parse_realization(cfg.get("realization"), m)
    tols = parse_tolerances(cfg.get("tolerances"), args.rank_tol)
    zs = [_number(z, "z") for z in _require(cfg, "z")]
    if not zs:
        raise ConfigParse("z is empty")
    rows, failed = [], 0
    for z in zs:
        s = weyl_of_extension(m, p, z)
        lo = s.min_imag_eig()
        bad = z.imag > 0 and lo < -tols["herglotz_tol"]
        failed += bad
        rows.append([z.real, z.imag, _realization_label(p), p.triplet.value, lo,
                     json.dumps(np.round(s.value, 15), default=_jsonable)])
    return Report("weyl-eval", ["z_re", "z_im", "realization", "triplet", "min_imag_eig", "value"], rows,
                  {"herglotz_tol": tols["herglotz_tol"], "dim": m.dim}, failed)


def cmd_multiplicity(cfg, args) -> Report:
    from .multiplicity import compare_tables, counting_table, multiplicity_table

    m = parse_potential(_require(cfg, "potential"))
    p = parse_realization(cfg.get("realization"), m)
    tols = parse_tolerances(cfg.get("tolerances"), args.rank_tol)
    ts = parse_t_grid(_require(cfg, "t_grid"), args.grid_n)
    tab = multiplicity_table(m, p, ts, tols["rank_tol"])
    ref = multiplicity_table(m, ExtensionParameter.dirichlet(), ts, tols["rank_tol"])
    ok = ~tab.exceptional
    counting_mismatch = int(np.sum(ref.ranks[ok] != counting_table(m, ts)[ok]))
    verdict = compare_tables(ref, tab)
    failed = counting_mismatch + (0 if verdict.a_leq_b() else 1)
    rows = [[t, r, e, tab.realization, tab.rank_tol] for t, r, e in tab.rows()]
    return Report("multiplicity", MULTIPLICITY_COLUMNS, rows,
                  {"verdict_vs_dirichlet": verdict.value, "counting_mismatches": counting_mismatch,
                   "exceptional_points": int(tab.exceptional.sum()), "grid_points": int(ts.size)}, failed)


def cmd_spectrum_interval(cfg, args) -> Report:
    from .oracle import discretize_interval, interval_spectrum_formula, spectrum

    m = parse_potential(_require(cfg, "potential"))
    section = cfg.get("interval", {})
    bc = str(section.get("bc", "DD")).upper()
    if bc not in ("DD", "NN"):
        raise ConfigParse("interval.bc must be 'DD' or 'NN'")
    n = int(args.grid_n if args.grid_n is not None else section.get("n", 400))
    count = int(section.get("count", 20))
    if n < 20 or count < 1:
        raise ConfigParse("interval: need n >= 20 and count >= 1")
    tols = parse_tolerances(cfg.get("tolerances"), args.rank_tol)
    d = discretize_interval(m, bc, np.pi / n)
    oracle = spectrum(d, count)
    formula = interval_spectrum_formula(m, bc, count)
    err = np.abs(oracle - formula)
    rows = [[k + 1, f, o, e] for k, (f, o, e) in enumerate(zip(formula, oracle, err))]
    failed = int(np.sum(err > tols["interval_tol"]))
    return Report("spectrum-interval", ["index", "formula", "oracle", "abs_error"], rows,
                  {"bc": bc, "h": np.pi / n, "max_error": float(err.max()),
                   "interval_tol": tols["interval_tol"]}, failed)


def _test_function(kind, dim):
    if kind == "box":
        return lambda x: np.repeat(np.where(x < 1, 1.0, np.where(x == 1, 0.5, 0.0))[:, None], dim, axis=1)
    if kind == "smooth":
        return lambda x: np.repeat((np.exp(-x) * (1 + x * x))[:, None], dim, axis=1)
    raise ConfigParse(f"unknown test function {kind!r}; use 'box' or 'smooth'")


def cmd_resolvent_check(cfg, args) -> Report:
    from .oracle import discretize_halfline, oracle_resolvent_apply
    from .realizations import GridFunction, dirichlet_resolvent_apply, krein_resolvent_apply

    m = parse_potential(_require(cfg, "potential"))
    p = parse_realization(cfg.get("realization"), m)
    tols = parse_tolerances(cfg.get("tolerances"), args.rank_tol)
    xg = cfg.get("x_grid", {})
    h = _positive(xg.get("h", 1 / 200), "x_grid.h")
    L = _positive(xg.get("L", 30.0), "x_grid.L")
    func = _test_function(cfg.get("f", "smooth"), m.dim)
    zs = [_number(z, "z") for z in cfg.get("z", [-1.0, [1.0, 1.0]])]

    def error(z, step):
        f = GridFunction.sample(func, L, step, m.dim)
        g = dirichlet_resolvent_apply(m, z, f) if p.is_dirichlet else krein_resolvent_apply(m, p, z, f)
        o = oracle_resolvent_apply(discretize_halfline(m, p, L, step), z, f)
        return (g - o).l2_norm() / o.l2_norm()

    rows, failed = [], 0
    for z in zs:
        e1, e2 = error(z, h), error(z, h / 2)
        failed += e1 > tols["resolvent_tol"]
        rows.append([z.real, z.imag, e1, e2, e1 / e2])
    return Report("resolvent-check", ["z_re", "z_im", "rel_l2_h", "rel_l2_h_half", "ratio"], rows,
                  {"h": h, "L": L, "realization": _realization_label(p),
                   "resolvent_tol": tols["resolvent_tol"]}, failed)


def cmd_triplet_sum(cfg, args) -> Report:
    from .triplets import BlockModel, direct_sum_weyl

    blocks = _require(cfg, "blocks")
    if not isinstance(blocks, list) or not blocks:
        raise ConfigParse("blocks: expected a non-empty list of potentials")
    tols = parse_tolerances(cfg.get("tolerances"), args.rank_tol)
    bm = BlockModel.from_blocks([parse_potential(b) for b in blocks])
    M = direct_sum_weyl(bm, 1j)
    rows = []
    for n, sl in enumerate(bm.block_slices()):
        blk = M[sl, sl]
        rows.append([n, blk.shape[0], float(np.linalg.norm(blk - 1j * np.eye(blk.shape[0]), ord=2))])
    total = float(np.linalg.norm(M - 1j * np.eye(bm.dim), ord=2))
    failed = int(total > tols["regularization_tol"]) + sum(r[2] > tols["regularization_tol"] for r in rows)
    return Report("triplet-sum", ["block", "dim", "norm_M_i_minus_iI"], rows,
                  {"norm_M_i_minus_iI": total, "dim": bm.dim, "regularization_tol": tols["regularization_tol"]},
                  failed)


def cmd_schrodinger_demo(cfg, args) -> Report:
    from .multiplicity import ac_band, compare_tables, multiplicity_table, Verdict
    from .realizations import canonical_parameter

    section = cfg.get("potential", {"schrodinger1d": {"q": [0.0] * 50, "length": float(np.pi)}})
    m = parse_potential(section)
    tols = parse_tolerances(cfg.get("tolerances"), args.rank_tol)
    t0 = ac_band(m).intervals[0][0]
    default = {"start": 0.0, "stop": float(m.eigenvalues[min(4, m.dim - 1)]) + 1.0, "n": 100}
    ts = parse_t_grid(cfg.get("t_grid", default), args.grid_n)
    tabs = {k: multiplicity_table(m, canonical_parameter(m, k), ts, tols["rank_tol"])
            for k in ("dirichlet", "neumann", "krein")}
    verdicts = {k: compare_tables(tabs["dirichlet"], tabs[k]).value for k in ("neumann", "krein")}
    failed = sum(v != Verdict.EQUAL.value for v in verdicts.values())
    rows = []
    for k in ("dirichlet", "neumann", "krein"):
        rows.extend([t, r, e, k, tabs[k].rank_tol] for t, r, e in tabs[k].rows())
    return Report("schrodinger-demo", MULTIPLICITY_COLUMNS, rows,
                  {"t0": t0, "dim": m.dim, "verdicts_vs_dirichlet": verdicts}, failed)


def cmd_verify_all(cfg, args) -> Report:
    from .acceptance import DEFAULT_SEED, run_all

    seed = args.seed if args.seed is not None else DEFAULT_SEED
    results = run_all(seed)
    rows = [[r.number, r.name, r.passed, r.measured, r.tolerance] for r in results]
    return Report("verify-all", ["criterion", "name", "passed", "measured", "tolerance"], rows,
                  {"seed": seed, "details": {str(r.number): r.details for r in results}},
                  sum(not r.passed for r in results))


HANDLERS = {
    "weyl-eval": cmd_weyl_eval,
    "multiplicity": cmd_multiplicity,
    "spectrum-interval": cmd_spectrum_interval,
    "resolvent-check": cmd_resolvent_check,
    "triplet-sum": cmd_triplet_sum,
    "schrodinger-demo": cmd_schrodinger_demo,
    "verify-all": cmd_verify_all,
}


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slext", description="Half-line extension theory checks and sweeps.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--out", help="output path (default: config output.path or stdout)")
    ap.add_argument("--format", choices=("csv", "json"), help="output format (default json)")
    ap.add_argument("--seed", type=int, help="random seed for verify-all")
    ap.add_argument("--rank-tol", type=float, dest="rank_tol", help="relative rank tolerance")
    ap.add_argument("--grid-n", type=int, dest="grid_n", help="override grid point count")
    return ap


def _error_document(exc: SlextError) -> str:
    return json.dumps({"error": {"type": type(exc).__name__, "code": exc.code, "message": str(exc)}},
                      sort_keys=True) + "\n"


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        if args.seed is not None and args.seed < 0:
            raise ConfigParse("--seed must be non-negative")
        if args.grid_n is not None and args.grid_n < 1:
            raise ConfigParse("--grid-n must be positive")
        cfg = load_config(args.config)
        out_cfg = cfg.get("output", {})
        fmt = args.format or out_cfg.get("format", "json")
        if fmt not in ("csv", "json"):
            raise ConfigParse("output.format must be 'csv' or 'json'")
        report = HANDLERS[args.command](cfg, args)
    except SlextError as exc:
        stderr.write(_error_document(exc))
        return exc.exit_status
    except (KeyError, TypeError, ValueError) as exc:
        stderr.write(_error_document(ConfigParse(str(exc))))
        return ConfigParse.exit_status
    text = report.to_csv() if fmt == "csv" else report.to_json()
    path = args.out or out_cfg.get("path")
    if path:
        Path(path).write_text(text)
    else:
        stdout.write(text)
    return 0 if report.failed == 0 else 3


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
