"""Command-line front end producing reproducible JSON/CSV reports.

Commands
--------
classify          classify a profile on the sample grid, check psi identities
invert-check      closed-form inverse vs. direct inversion at random sites
connection-check  closed-form connection vs. the Koszul oracle, torsion and
                  metric compatibility
curvature-scan    sectional-curvature sampling with verdict
flatness          the flat / not-flat classifier

Exit codes: 0 all checks passed, 1 some check failed, 2 configuration error.
Reports are JSON (sorted keys, UTF-8) or CSV; identical config + seed gives a
byte-identical report except for the ``timestamp`` field.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .bundle import TangentPoint, assemble_block, inverse_block
from .connection import CONNECTION_KINDS, bundle_connection, koszul_connection
from .curvature import constant_curvature_scan, flatness_check
from .errors import ConfigError, GnaturalError
from .manifold import MANIFOLD_NAMES, make_manifold
from .profile import (Classification, PRESET_NAMES, classify, default_grid,
                      load_profile, preset, profile_to_dict,
                      psi_identity_residuals)

#: pass/fail thresholds used by the CLI checks
INVERSE_TOL = 1e-9
CONNECTION_TOL = 1e-5
PSI_IDENTITY_TOL = 1e-10

COMMANDS = ("classify", "invert-check", "connection-check", "curvature-scan", "flatness")


@dataclass
class RunConfig:
    command: str
    profile: str
    manifold: str
    seed: int = 0
    samples: int = 50
    t_max: float = 10.0
    out: Optional[str] = None
    format: str = "json"

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.samples < 1:
            raise ConfigError("--samples must be >= 1")
        if self.t_max <= 0:
            raise ConfigError("--t-max must be > 0")
        if self.manifold not in MANIFOLD_NAMES:
            raise ConfigError(
                f"unknown manifold {self.manifold!r}; choose one of {MANIFOLD_NAMES}")
        if self.format not in ("json", "csv"):
            raise ConfigError("--format must be json or csv")
        if self.format == "csv" and self.command != "curvature-scan":
            raise ConfigError("csv output is only available for curvature-scan")

    def resolve_profile(self):
        if self.profile in PRESET_NAMES:
            return preset(self.profile)
        path = Path(self.profile)
        if not path.exists():
            raise ConfigError(
                f"profile {self.profile!r} is neither a preset {PRESET_NAMES} "
                "nor a readable file")
        try:
            return load_profile(path)
        except GnaturalError as exc:
            raise ConfigError(f"could not load profile {self.profile!r}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gnatural",
        description="checks and scans for bundle metrics built from profiles",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--profile", required=True,
                        help="preset name or path to a profile JSON document")
    parser.add_argument("--manifold", default="flat2",
                        help=f"built-in manifold name, one of {MANIFOLD_NAMES}")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--samples", type=int, default=50,
                        help="number of random sites/configurations")
    parser.add_argument("--t-max", type=float, default=10.0, dest="t_max",
                        help="upper end of the profile sample grid")
    parser.add_argument("--out", default=None, help="report path (stdout when omitted)")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _check(name, residual, tol):
    return {"name": name, "residual": float(residual), "tolerance": float(tol),
            "passed": bool(residual <= tol)}


def _rel(a, b):
    return float(np.abs(a - b).max() / max(1.0, float(np.abs(b).max())))


def _random_site(rng, M, max_radius=3.0) -> TangentPoint:
    lo, hi = M.sample_box
    x = rng.uniform(lo, hi)
    g = M.metric_at(x)
    w = rng.standard_normal(M.dim)
    w /= np.sqrt(float(w @ g @ w))
    return TangentPoint.at(M, x, rng.uniform(0.0, max_radius) * w)


def _run_classify(cfg, p, M):
    grid = default_grid(cfg.t_max)
    cls = classify(p, grid)
    checks = []
    if cls is not Classification.DEGENERATE:
        worst = max(float(np.abs(psi_identity_residuals(p, t)).max()) for t in grid)
        checks.append(_check("psi_identities", worst, PSI_IDENTITY_TOL))
    report = {
        "classification": cls.value,
        "grid": {"t_min": 0.0, "t_max": cfg.t_max, "n": int(grid.size)},
        "checks": checks,
    }
    return all(c["passed"] for c in checks), report


def _run_invert_check(cfg, p, M):
    rng = np.random.default_rng(cfg.seed)
    eye = np.eye(2 * M.dim)
    worst, worst_site = 0.0, None
    for _ in range(cfg.samples):
        site = _random_site(rng, M)
        prod = assemble_block(p, site).full() @ inverse_block(p, site).full()
        res = float(np.abs(prod - eye).max())
        if res > worst:
            worst, worst_site = res, site
    checks = [_check("inverse_identity", worst, INVERSE_TOL)]
    report = {
        "checks": checks,
        "max_residual": worst,
        "worst_site": {"x": worst_site.x.tolist(), "u": worst_site.u.tolist(),
                       "t": worst_site.t},
    }
    return all(c["passed"] for c in checks), report


def _run_connection_check(cfg, p, M):
    rng = np.random.default_rng(cfg.seed)
    r_oracle = r_torsion = 0.0
    for _ in range(cfg.samples):
        site = _random_site(rng, M, max_radius=2.0)
        X = rng.standard_normal(M.dim)
        Y = rng.standard_normal(M.dim)
        kind = CONNECTION_KINDS[rng.integers(len(CONNECTION_KINDS))]
        closed = bundle_connection(p, M, site, kind, X, Y).as_array()
        oracle = koszul_connection(p, M, site, kind, X, Y).as_array()
        r_oracle = max(r_oracle, _rel(closed, oracle))
        # torsion of the mixed pair: nabla_{X^h} Y^v - nabla_{Y^v} X^h = (nabla_X Y)^v
        d_mixed = (bundle_connection(p, M, site, "hv", X, Y)
                   - bundle_connection(p, M, site, "vh", Y, X))
        gamma_xy = np.einsum("ljk,j,k->l", M.christoffel_at(site.x), X, Y)
        r_torsion = max(r_torsion, float(np.abs(d_mixed.h).max()),
                        float(np.abs(d_mixed.v - gamma_xy).max()))
    checks = [
        _check("closed_vs_koszul", r_oracle, CONNECTION_TOL),
        _check("torsion_free", r_torsion, CONNECTION_TOL),
    ]
    return all(c["passed"] for c in checks), {"checks": checks}


def _run_curvature_scan(cfg, p, M):
    scan = constant_curvature_scan(p, M, n_sites=max(4, cfg.samples), seed=cfg.seed)
    return scan.verdict == "flat", {"scan": scan.to_dict()}


def _run_flatness(cfg, p, M):
    rep = flatness_check(p, M, t_samples=default_grid(cfg.t_max), seed=cfg.seed)
    return rep.flat, {"flatness": rep.to_dict(),
                      "verdict": "flat" if rep.flat else "not_flat"}


_RUNNERS = {
    "classify": _run_classify,
    "invert-check": _run_invert_check,
    "connection-check": _run_connection_check,
    "curvature-scan": _run_curvature_scan,
    "flatness": _run_flatness,
}


def render_json(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def render_csv(report: dict) -> str:
    samples = report.get("report", {}).get("scan", {}).get("samples", [])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["site", "plane", "K"])
    for s in samples:
        writer.writerow([s["site"], s["plane"], "%.17g" % s["k"]])
    return buf.getvalue()


def run(cfg: RunConfig) -> tuple[int, dict]:
    cfg.validate()
    p = cfg.resolve_profile()
    M = make_manifold(cfg.manifold)
    try:
        passed, body = _RUNNERS[cfg.command](cfg, p, M)
        error = None
    except Exception as exc:  # computation errors become failed checks, not crashes
        passed, body, error = False, {}, f"{type(exc).__name__}: {exc}"
    report = {
        "schema": 1,
        "version": __version__,
        "command": cfg.command,
        "config": asdict(cfg),
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "passed": bool(passed),
        "report": body,
    }
    if error is not None:
        report["error"] = error
    return (0 if passed else 1), report


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(command=args.command, profile=args.profile, manifold=args.manifold,
                    seed=args.seed, samples=args.samples, t_max=args.t_max,
                    out=args.out, format=args.format)
    try:
        code, report = run(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    text = render_csv(report) if cfg.format == "csv" else render_json(report)
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
