"""Command-line experiment runner.

Verbs::

    sfl-pohozaev run <config.toml> [--seed N] [--output-dir DIR]
    sfl-pohozaev explain <report.json>
    sfl-pohozaev matrices <config.toml> [--output-dir DIR]

``run`` writes ``report.json`` and ``report.md`` (plus CSV matrices when the
config asks for them) and exits 0 iff every selected suite passes, 1 on a
suite failure and 2 on configuration or I/O errors. The environment variable
``SFL_OUTPUT_DIR`` overrides the configured output directory; an explicit
``--output-dir`` wins over both.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import platform
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy

from .config import ConfigError, ExperimentConfig, load_config
from .eigenbasis import (EigenSolverError, QuadratureError, make_basis, rotate_degenerate_groups,
                         star_shape_margin)
from .pohozaev import (bochner_transform, bochner_transform_check, cross_check, identity_residual, psd_certify,
                       q1_matrix, qs_direct, qs_schur, transition_factorization_check, transition_matrix)
from .semilinear import (Nonlinearity, ProbePreconditionError, critical_exponent, criticality,
                         nonexistence_probe, power_pohozaev_coefficient, solve_nontrivial)
from .sfl import ConvergenceError, SpectralFunction, eigen_power, subordination_check

log = logging.getLogger("sfl_pohozaev")

OUTPUT_ENV = "SFL_OUTPUT_DIR"
NUMERICAL_ERRORS = (QuadratureError, EigenSolverError, ConvergenceError, np.linalg.LinAlgError,
                    ArithmeticError)

try:
    from importlib.metadata import version as _dist_version
    VERSION = _dist_version("artifact")
except Exception:  # not installed
    VERSION = "0+unknown"


# ----------------------------------------------------------------------------
# result records


def check(name, value, limit, passed=None, *, compare="<=", **extra) -> dict:
    """One graded quantity. ``compare`` is ``"<="``, ``">="`` or ``"=="``."""
    if passed is None:
        if compare == "<=":
            passed = bool(value <= limit)
        elif compare == ">=":
            passed = bool(value >= limit)
        else:
            passed = bool(value == limit)
    return {"check": name, **extra, "value": value, "limit": limit, "compare": compare,
            "passed": bool(passed)}


def _score(item) -> float:
    # how close an item is to its limit; > 1 means failure for <= and negative-limit >= checks
    if not item["passed"]:
        return math.inf
    if item.get("graded") is False:
        return -math.inf
    v, lim = item["value"], item["limit"]
    if not isinstance(v, (int, float)) or not isinstance(lim, (int, float)) or lim == 0:
        return 0.0
    return v / lim


def suite_record(name: str, items: list, seconds: float) -> dict:
    passed = all(it["passed"] for it in items)
    worst = max(items, key=_score) if items else None
    return {"suite": name, "verdict": "PASS" if passed else "FAIL", "passed": passed,
            "worst": worst, "failures": [it for it in items if not it["passed"]],
            "items": items, "_seconds": seconds}


def _random_coeffs(rng, n):
    return rng.standard_normal(n) / np.arange(1, n + 1) ** 2


def _orders_with_limit(cfg: ExperimentConfig):
    return list(cfg.s_values) + ([1.0] if cfg.classical_limit else [])


class _Bases:
    """Bases built on demand and shared across suites of one run."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self._cache = {}

    def get(self, name: str, n: int | None = None):
        entry = self.cfg.domain(name)
        n = entry.n if n is None else n
        key = (name, n)
        if key not in self._cache:
            self._cache[key] = make_basis(entry.domain, n)
        return self._cache[key]

    def describe(self) -> dict:
        return {f"{name}:n={n}": {"fingerprint": b.fingerprint, "n": b.n, "kind": b.domain.kind,
                                  "eigenvalues": b.eigenvalues.tolist()}
                for (name, n), b in sorted(self._cache.items())}


# ----------------------------------------------------------------------------
# suites


def suite_identity(cfg: ExperimentConfig, bases: _Bases) -> list:
    tol = cfg.tolerances
    items = []
    for di, entry in enumerate(cfg.domains):
        name = entry.name
        try:
            b = bases.get(name)
            M = b.moment_matrix
            q1 = q1_matrix(b, rtol=np.inf)
        except NUMERICAL_ERRORS as exc:
            items.append(check("basis", None, None, False, domain=name, error=str(exc)))
            continue
        N, lam = b.dim, b.eigenvalues
        items.append(check("moment_diagonal", float(np.max(np.abs(np.diag(M) + N / 2))),
                           tol["moment_diagonal"], domain=name, n=b.n))
        items.append(check("boundary_volume_cross_check", cross_check(b, q1.entries),
                           tol["cross_check"], domain=name, n=b.n))
        if b.is_grid:
            items.append(check("q1_diagonal", float(np.max(np.abs(np.diag(q1.entries) - lam) / lam)),
                               tol["q1_diagonal"], domain=name, n=b.n, diagonal_source="lambda",
                               boundary_diagonal_deviation=float(np.max(np.abs(q1.boundary_diagonal - lam) / lam))))
        else:
            items.append(check("q1_diagonal", float(np.max(np.abs(q1.boundary_diagonal - lam) / lam)),
                               tol["q1_diagonal"], domain=name, n=b.n, diagonal_source="boundary"))
        if b.domain.kind == "interval" and b.n > 1:
            d = b.domain
            L, c = d.b - d.a, d.star_center
            k = np.arange(1, b.n + 1)
            sign = (-1.0) ** (k[:, None] + k[None, :])
            exact = (np.pi / L) ** 2 / L * np.outer(k, k) * ((d.b - c) * sign + (c - d.a))
            items.append(check("q1_closed_form", float(np.max(np.abs(q1.entries - exact))),
                               tol["q1_closed_form"], domain=name, n=b.n))
            m12 = 4.0 / 3.0 if (c == d.a) else None
            if m12 is not None:
                items.append(check("moment_m12", abs(float(M[0, 1]) - m12), tol["interval_m12"],
                                   domain=name, n=b.n, m12=float(M[0, 1])))
        rng = np.random.default_rng([cfg.seed, 1, di])
        samples = [_random_coeffs(rng, b.n) for _ in range(cfg.samples)]
        limit = tol["identity_grid"] if b.is_grid else tol["identity"]
        for s in _orders_with_limit(cfg):
            P = transition_matrix(lam, s)
            Qs = qs_schur(q1, P)
            res = max(identity_residual(SpectralFunction(b, c), s, Qs) for c in samples)
            items.append(check("identity_residual", res, limit, domain=name, s=s, n=b.n,
                               samples=cfg.samples))
            if s == 1.0:
                items.append(check("classical_schur", float(np.max(np.abs(Qs - q1.entries))),
                                   tol["classical"], domain=name, n=b.n))
                direct = np.array([qs_direct(SpectralFunction.unit(b, k + 1), 1.0) for k in range(b.n)])
                # relative error equals |M_kk + N/2|, so it is graded at the quadrature tolerance
                items.append(check("classical_direct", float(np.max(np.abs(direct - lam) / lam)),
                                   tol["moment_diagonal"], domain=name, n=b.n))
    return items


def suite_psd(cfg: ExperimentConfig, bases: _Bases) -> list:
    tol = cfg.tolerances["psd"]
    items = []
    for entry in cfg.domains:
        name = entry.name
        sizes = sorted(set(cfg.psd_sizes or [entry.n]))
        try:
            b = bases.get(name, max(max(sizes), entry.n))
            margin = star_shape_margin(b)
        except NUMERICAL_ERRORS as exc:
            items.append(check("basis", None, None, False, domain=name, error=str(exc)))
            continue
        # off star-shaped domains nothing is asserted: certificates are recorded ungraded
        star = margin >= -1e-12
        items.append(check("star_shaped", margin, 0.0, True, compare=">=", domain=name, graded=False))
        info = {} if star else {"graded": False, "note": "finding only: domain is not star-shaped about its center"}
        try:
            q1 = q1_matrix(b)
        except QuadratureError as exc:
            items.append(check("q1", None, None, False, domain=name, error=str(exc)))
            continue
        # the n-term matrices are the leading principal blocks of the largest one
        for m in sizes:
            cert = psd_certify(q1.entries[:m, :m], tol, f"Q1[{name},n={m}]")
            items.append(check("psd_q1", cert.min_eigenvalue, cert.threshold, cert.psd or not star, compare=">=",
                               domain=name, n=m, certificate=cert.to_dict(), **info))
        for s in _orders_with_limit(cfg):
            P = transition_matrix(b.eigenvalues, s)
            Qs = qs_schur(q1, P)
            for m in sizes:
                for label, mat in (("psd_qs", Qs), ("psd_p", P.entries)):
                    cert = psd_certify(mat[:m, :m], tol, f"{label[4:].upper()}[{name},s={s!r},n={m}]")
                    ok = cert.psd or (label == "psd_qs" and not star)
                    items.append(check(label, cert.min_eigenvalue, cert.threshold, ok, compare=">=",
                                       domain=name, s=s, n=m, certificate=cert.to_dict(),
                                       **(info if label == "psd_qs" else {})))
    return items


def suite_bochner(cfg: ExperimentConfig, bases: _Bases) -> list:
    tol = cfg.tolerances
    items = []
    xi = np.asarray(cfg.bochner_xi, dtype=float)
    for s in cfg.bochner_s:
        try:
            err = bochner_transform_check(s, xi, tol["bochner"])
        except QuadratureError as exc:
            items.append(check("bochner_transform", None, tol["bochner"], False, s=s, error=str(exc)))
            continue
        items.append(check("bochner_transform", err, tol["bochner"], s=s, grid_points=len(xi)))
    spot = float(bochner_transform(0.0, 0.5)[0])
    items.append(check("bochner_spot_pi", abs(spot - math.pi), tol["bochner_spot"], s=0.5, xi=0.0, value_at=spot))
    for entry in cfg.domains:
        try:
            b = bases.get(entry.name)
        except NUMERICAL_ERRORS as exc:
            items.append(check("basis", None, None, False, domain=entry.name, error=str(exc)))
            continue
        for s in cfg.s_values:
            err = transition_factorization_check(transition_matrix(b.eigenvalues, s))
            items.append(check("transition_factorization", err, tol["factorization"],
                               domain=entry.name, s=s, n=b.n))
    return items


def suite_degenerate(cfg: ExperimentConfig, bases: _Bases) -> list:
    tol = cfg.tolerances
    items = []
    for di, entry in enumerate(cfg.domains):
        name = entry.name
        try:
            b = bases.get(name)
            q1 = q1_matrix(b, rtol=np.inf)
        except NUMERICAL_ERRORS as exc:
            items.append(check("basis", None, None, False, domain=name, error=str(exc)))
            continue
        groups = b.degenerate_groups()
        if not groups:
            items.append(check("repeated_eigenvalues", 0, 0, True, compare="==", domain=name, n=b.n,
                               note="no repeated eigenvalues in the span"))
            continue
        for idx in groups:
            block = q1.entries[np.ix_(idx, idx)]
            off = float(np.max(np.abs(block - np.diag(np.diag(block)))))
            labels = [b.labels[i] for i in idx]
            items.append(check("q1_within_group", off, tol["degenerate"], domain=name,
                               indices=[int(i) + 1 for i in idx], labels=[str(x) for x in labels]))
            for s in cfg.s_values:
                Qs = qs_schur(q1, transition_matrix(b.eigenvalues, s))
                blk = Qs[np.ix_(idx, idx)]
                items.append(check("qs_within_group", float(np.max(np.abs(blk - np.diag(np.diag(blk))))),
                                   tol["degenerate"], domain=name, s=s, indices=[int(i) + 1 for i in idx]))
        rng = np.random.default_rng([cfg.seed, 4, di])
        u = _random_coeffs(rng, b.n)
        for s in cfg.s_values:
            base_val = float(u @ qs_schur(q1, transition_matrix(b.eigenvalues, s)) @ u)
            worst = 0.0
            for _ in range(cfg.rotations):
                rb, T = rotate_degenerate_groups(b, rng)
                rq = q1_matrix(rb, rtol=np.inf)
                v = T.T @ u
                val = float(v @ qs_schur(rq, transition_matrix(rb.eigenvalues, s)) @ v)
                worst = max(worst, abs(val - base_val) / (1.0 + abs(base_val)))
            items.append(check("rotation_invariance", worst, tol["rotation"], domain=name, s=s,
                               rotations=cfg.rotations))
    return items


def suite_subordination(cfg: ExperimentConfig, bases: _Bases) -> list:
    tol = cfg.tolerances["subordination"]
    items = []
    for entry in cfg.domains:
        try:
            b = bases.get(entry.name)
        except NUMERICAL_ERRORS as exc:
            items.append(check("basis", None, None, False, domain=entry.name, error=str(exc)))
            continue
        lam = b.eigenvalues[: cfg.subordination_count]
        for s in cfg.subordination_s:
            try:
                vals = np.array([subordination_check(x, s) for x in lam])
            except ConvergenceError as exc:
                items.append(check("subordination", exc.estimate, tol, False, domain=entry.name, s=s,
                                   error=str(exc)))
                continue
            err = float(np.max(np.abs(vals - eigen_power(lam, s))))
            items.append(check("subordination", err, tol, domain=entry.name, s=s, count=len(lam)))
    return items


def suite_semilinear(cfg: ExperimentConfig, bases: _Bases) -> list:
    tol = cfg.tolerances
    spec = cfg.semilinear
    items = []
    b = bases.get(spec.domain, spec.n)
    nl = Nonlinearity.power(spec.p)
    rep = solve_nontrivial(b, spec.s, nl, tol=tol["newton"])
    info = dict(domain=spec.domain, s=spec.s, p=spec.p, n=b.n, classification=rep.classification,
                newton_iters=rep.newton_iters, sup_norm=rep.sup_norm, coeff_norm=rep.solution.norm(),
                tail_ratio=rep.solution.tail_ratio(),
                message=rep.message)
    items.append(check("nontrivial_solution", rep.residual_norm, tol["semilinear_residual"],
                       rep.converged and not rep.trivial and rep.residual_norm <= tol["semilinear_residual"],
                       **info))
    items.append(check("pohozaev_functional", rep.pohozaev_value, -tol["pohozaev_floor"], compare=">=",
                       domain=spec.domain, s=spec.s, p=spec.p, n=b.n))
    # exact anchors
    N = b.dim
    crit = critical_exponent(N, spec.s)
    if crit is not None:
        cls = criticality(N, spec.s, crit)
        items.append(check("criticality_at_critical_exponent", cls, "critical", compare="==", N=N, s=spec.s,
                           p=str(crit)))
    probe_p = cfg.probe.p if cfg.probe is not None else 5.0
    exact = power_pohozaev_coefficient(N, spec.s, probe_p)
    floating = (2 * spec.s - N) / 2 + N / (probe_p + 1)
    items.append(check("pohozaev_coefficient", abs(floating - float(exact)), tol["coefficient"], N=N,
                       s=spec.s, p=probe_p, exact=str(exact), floating=floating))
    return items


def suite_probe(cfg: ExperimentConfig, bases: _Bases) -> list:
    tol = cfg.tolerances
    spec = cfg.probe
    b = bases.get(spec.domain, spec.n)
    nl = Nonlinearity.power(spec.p)
    try:
        rep = nonexistence_probe(b, spec.s, nl, seed=cfg.seed, tol=tol["newton"],
                                 pohozaev_rtol=tol["probe_pohozaev"])
    except ProbePreconditionError as exc:
        return [check("probe_precondition", None, None, False, domain=spec.domain, s=spec.s, p=spec.p,
                      error=str(exc))]
    body = rep.to_dict()
    return [check("probe_verdict", rep.verdict, "clean", compare="==", domain=spec.domain, s=spec.s,
                  p=spec.p, n=b.n, report=body)]


SUITE_FUNCS = {
    "identity": suite_identity,
    "psd": suite_psd,
    "bochner": suite_bochner,
    "degenerate": suite_degenerate,
    "subordination": suite_subordination,
    "semilinear": suite_semilinear,
    "probe": suite_probe,
}


# ----------------------------------------------------------------------------
# report assembly


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def run_suites(cfg: ExperimentConfig) -> dict:
    """Execute the selected suites in order and assemble the report.

    Everything except the ``runtime`` section is a deterministic function of
    the configuration and seed.
    """
    bases = _Bases(cfg)
    results, timing = [], {}
    started = time.time()
    for name in cfg.suites:
        t0 = time.perf_counter()
        try:
            items = SUITE_FUNCS[name](cfg, bases)
        except NUMERICAL_ERRORS as exc:
            log.exception("suite %s failed", name)
            items = [check("suite_error", None, None, False, error=f"{type(exc).__name__}: {exc}")]
        rec = suite_record(name, items, time.perf_counter() - t0)
        timing[name] = rec.pop("_seconds")
        results.append(rec)
        log.info("%s: %s", name, rec["verdict"])
    report = {
        "config": cfg.echo(),
        "versions": {"sfl_pohozaev": VERSION, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "bases": bases.describe(),
        "summary": {"passed": all(r["passed"] for r in results), "suites": len(results),
                    "failed": [r["suite"] for r in results if not r["passed"]]},
        "suites": results,
        "runtime": {"started_unix": started, "wall_clock_seconds": timing,
                    "total_seconds": time.time() - started},
    }
    return _jsonable(report)


def strip_runtime(report: dict) -> dict:
    """Report without its wall-clock section; equal across reruns."""
    return {k: v for k, v in report.items() if k != "runtime"}


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.3e}"
    return "-" if v is None else str(v)


def _item_where(item) -> str:
    keys = [k for k in ("domain", "s", "n", "indices") if k in item]
    return ", ".join(f"{k}={item[k]}" for k in keys)


def summary_lines(report: dict) -> list:
    """Markdown summary built only from fields of ``report``."""
    suites = report.get("suites", [])
    out = ["# SFL Pohozaev verification report", ""]
    if not suites:
        out.append("WARNING: no suites selected")
        return out
    summ = report["summary"]
    out.append(f"Overall: **{'PASS' if summ['passed'] else 'FAIL'}** ({summ['suites']} suites)")
    out += ["", "| suite | verdict | worst check | where | value | limit |", "|---|---|---|---|---|---|"]
    for r in suites:
        w = r.get("worst") or {}
        out.append(f"| {r['suite']} | {r['verdict']} | {w.get('check', '-')} | {_item_where(w)} "
                   f"| {_fmt(w.get('value'))} | {w.get('compare', '')} {_fmt(w.get('limit'))} |")
    for r in suites:
        if r["passed"]:
            continue
        out += ["", f"## Failures in {r['suite']}", ""]
        for it in r["failures"]:
            line = f"- {it['check']} ({_item_where(it)}): value {_fmt(it.get('value'))}, " \
                   f"limit {it.get('compare')} {_fmt(it.get('limit'))}"
            if "error" in it:
                line += f"; error: {it['error']}"
            out.append(line)
            cert = it.get("certificate") or {}
            if "witness" in cert:
                wv = ", ".join(f"{x:.6g}" for x in cert["witness"])
                out.append(f"  - witness for {cert['matrix_id']}: [{wv}]")
                out.append(f"  - quadratic value x^T M x = {cert['witness_value']:.6e}")
            rep = it.get("report") or {}
            for run in rep.get("runs", []):
                out.append(f"  - guess {run['guess']}: {run['outcome']}, residual {_fmt(run['residual'])}, "
                           f"pohozaev {_fmt(run['pohozaev_value'])}")
    findings = [it for r in suites for it in r.get("items", [])
                if it.get("graded") is False and (it.get("certificate") or {}).get("verdict") == "indefinite"]
    if findings:
        out += ["", "## Ungraded findings", ""]
        for it in findings:
            cert = it["certificate"]
            out.append(f"- {cert['matrix_id']} is indefinite: min eigenvalue {_fmt(cert['min_eig'])} "
                       f"({it.get('note', 'not graded')})")
    return out


def write_report(report: dict, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    (out_dir / "report.md").write_text("\n".join(summary_lines(report)) + "\n")


# ----------------------------------------------------------------------------
# CSV matrices


def write_matrix_csv(path: Path, M: np.ndarray) -> None:
    """RFC-4180 CSV; header ``row,phi_1..phi_n``, values with 17 significant digits."""
    M = np.asarray(M, dtype=float)
    n = M.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["row"] + [f"phi_{k}" for k in range(1, n + 1)])
        for j, row in enumerate(M, start=1):
            w.writerow([f"phi_{j}"] + [format(float(x), ".17g") for x in row])


def dump_matrices(cfg: ExperimentConfig, out_dir: Path, bases: _Bases | None = None) -> list:
    """Write Q1, P and Q^(s) CSVs for every domain and order; returns the manifest."""
    bases = bases or _Bases(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = []
    for entry in cfg.domains:
        b = bases.get(entry.name)
        q1 = q1_matrix(b, rtol=np.inf)
        fname = f"q1_{entry.name}.csv"
        write_matrix_csv(out_dir / fname, q1.entries)
        manifest.append({"file": fname, "matrix": "Q1", "domain": entry.name, "basis": b.fingerprint,
                         "n": b.n, "s": None})
        for s in _orders_with_limit(cfg):
            P = transition_matrix(b.eigenvalues, s)
            for tag, mat in (("p", P.entries), ("qs", qs_schur(q1, P))):
                fname = f"{tag}_{entry.name}_s{s!r}.csv"
                write_matrix_csv(out_dir / fname, mat)
                manifest.append({"file": fname, "matrix": "P" if tag == "p" else "Qs", "domain": entry.name,
                                 "basis": b.fingerprint, "n": b.n, "s": s})
    with open(out_dir / "matrices.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest


# ----------------------------------------------------------------------------
# verbs


def _resolve_output(cfg: ExperimentConfig, flag) -> Path:
    if flag:
        return Path(flag)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env)
    return cfg.output_dir


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    out = _resolve_output(cfg, args.output_dir)
    if not cfg.suites:
        print("warning: no suites selected", file=sys.stderr)
    report = run_suites(cfg)
    try:
        write_report(report, out)
        if cfg.write_matrices:
            dump_matrices(cfg, out / "matrices")
    except OSError as exc:
        raise ConfigError(f"cannot write to {out}: {exc.strerror}") from exc
    for r in report["suites"]:
        print(f"{r['suite']:<14} {r['verdict']}")
        for it in r["failures"]:
            print(f"    failed: {it['check']} ({_item_where(it)}) value={_fmt(it.get('value'))}")
    print(f"report written to {out / 'report.json'}")
    return 0 if report["summary"]["passed"] else 1


def cmd_explain(args) -> int:
    try:
        report = json.loads(Path(args.report).read_text())
        suites = report["suites"]
        if not isinstance(suites, list) or not all("suite" in r and "verdict" in r for r in suites):
            raise KeyError("suites")
    except OSError as exc:
        raise ConfigError(f"cannot read {args.report}: {exc.strerror}") from exc
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"malformed report {args.report}: {exc}") from exc
    if not suites:
        print("warning: no suites selected")
        return 0
    print("\n".join(summary_lines(report)))
    return 0 if all(r["passed"] for r in suites) else 1


def cmd_matrices(args) -> int:
    cfg = load_config(args.config)
    out = _resolve_output(cfg, args.output_dir)
    try:
        manifest = dump_matrices(cfg, out)
    except OSError as exc:
        raise ConfigError(f"cannot write to {out}: {exc.strerror}") from exc
    print(f"wrote {len(manifest)} matrices to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sfl-pohozaev", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)
    p = sub.add_parser("run", help="run the verification suites of a config")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--output-dir", default=None)
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("explain", help="summarize a report.json")
    p.add_argument("report")
    p.set_defaults(func=cmd_explain)
    p = sub.add_parser("matrices", help="dump Q1, P and Q^(s) as CSV")
    p.add_argument("config")
    p.add_argument("--output-dir", default=None)
    p.set_defaults(func=cmd_matrices)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
