"""Command-line interface.

    finslerlab check manifest.json [--format json|csv] [--out PATH] [--seed N] [--tol NAME=VALUE]
    finslerlab curvature --t-min 0 --t-max 5 --steps 11 --k 2 --direction 1,1
    finslerlab distance --z1 0,0 --z2 0.5,0.3j --t 1 --k 2
    finslerlab geodesic --from 0,0 --velocity 1,0.5 --s-max 1 --steps 32

Exit codes: 0 when every check passes, 1 when any fails, 2 on configuration
or I/O errors.
"""
import argparse
import csv
import io
import json
import os
import sys
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import curvature as curv
from . import geodesics
from .checks import DEFAULT_TOLERANCES, REGISTRY
from .errors import ConfigError, FinslerError
from .factors import FactorMetric
from .product_metric import MetricParams, ProductManifold

CSV_FIELDS = ("check", "t", "k", "max_deviation", "tolerance", "pass")


@dataclass
class RunManifest:
    factors: list
    t_grid: list
    k_grid: list
    samples: int = 10
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        if not isinstance(d, dict):
            raise ConfigError("manifest must be a mapping")
        unknown = set(d) - {"factors", "t_grid", "k_grid", "samples", "seed", "tolerances", "checks"}
        if unknown:
            raise ConfigError(f"unknown manifest field {sorted(unknown)[0]!r}")
        for key in ("factors", "t_grid", "k_grid"):
            if key not in d:
                raise ConfigError(f"manifest field {key!r} is required")
        m = cls(d["factors"], d["t_grid"], d["k_grid"], d.get("samples", 10), d.get("seed", 0),
                dict(d.get("tolerances", {})), list(d.get("checks", [])))
        m.validate()
        return m

    def validate(self):
        if not isinstance(self.factors, list) or not self.factors:
            raise ConfigError("factors: expected a nonempty list")
        for i, f in enumerate(self.factors):
            if not isinstance(f, dict) or "kind" not in f:
                raise ConfigError(f"factors[{i}]: expected {{kind, dim}}")
            try:
                FactorMetric(f["kind"], f.get("dim", 1))
            except FinslerError as e:
                raise ConfigError(f"factors[{i}]: {e}") from None
        for key in ("t_grid", "k_grid"):
            grid = getattr(self, key)
            if not isinstance(grid, list) or not grid:
                raise ConfigError(f"{key}: expected a nonempty list")
        for t in self.t_grid:
            if not isinstance(t, (int, float)) or isinstance(t, bool) or not t >= 0:
                raise ConfigError(f"t_grid: invalid entry {t!r}")
        for k in self.k_grid:
            if not isinstance(k, int) or isinstance(k, bool) or k < 2:
                raise ConfigError(f"k_grid: invalid entry {k!r}")
        if not isinstance(self.samples, int) or isinstance(self.samples, bool) or self.samples < 1:
            raise ConfigError(f"samples: expected an integer >= 1, got {self.samples!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed: expected a 64-bit nonnegative integer, got {self.seed!r}")
        for name in self.checks:
            if name not in REGISTRY:
                raise ConfigError(f"checks: unknown check {name!r}")
        for name, val in self.tolerances.items():
            if name not in REGISTRY:
                raise ConfigError(f"tolerances: unknown check {name!r}")
            if not isinstance(val, (int, float)) or not val > 0:
                raise ConfigError(f"tolerances.{name}: expected a positive number")

    def manifold(self) -> ProductManifold:
        return ProductManifold(tuple(FactorMetric(f["kind"], f.get("dim", 1)) for f in self.factors))

    def tolerance(self, name) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))


@dataclass
class RunReport:
    manifest: dict
    checks: list
    summary: dict
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return {"manifest": self.manifest, "checks": [c.to_dict() for c in self.checks],
                "summary": self.summary, "wall_time": self.wall_time}

    @property
    def all_passed(self) -> bool:
        return all(c.passed or c.skipped for c in self.checks)


def load_manifest(path) -> RunManifest:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read manifest: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"manifest is not valid JSON: {e}") from None
    return RunManifest.from_dict(data)


def _run_cell(args):
    factors, t, k, seed, cell, samples, names, tols = args
    mfd = ProductManifold(tuple(FactorMetric(f["kind"], f.get("dim", 1)) for f in factors))
    p = MetricParams(t, k)
    out = []
    for name in names:
        # independent stream per (seed, cell, check) so results do not depend on ordering
        rng = np.random.default_rng([seed, cell, zlib.crc32(name.encode())])
        out.append(REGISTRY[name](mfd, p, rng, samples, tols[name]))
    return out


def _workers() -> int:
    raw = os.environ.get("FINSLERLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"FINSLERLAB_THREADS must be an integer, got {raw!r}") from None


def run_checks(manifest: RunManifest) -> RunReport:
    manifest.validate()
    start = time.perf_counter()
    tols = {name: manifest.tolerance(name) for name in manifest.checks}
    cells = [(t, k) for t in manifest.t_grid for k in manifest.k_grid]
    jobs = [(manifest.factors, float(t), int(k), manifest.seed, i, manifest.samples, manifest.checks, tols)
            for i, (t, k) in enumerate(cells)]
    reports = []
    if manifest.checks:
        workers = min(_workers(), len(jobs))
        if workers > 1:
            with ProcessPoolExecutor(workers) as pool:
                results = list(pool.map(_run_cell, jobs))
        else:
            results = [_run_cell(j) for j in jobs]
        for r in results:
            reports.extend(r)
    summary = {
        "passed": sum(1 for c in reports if c.passed and not c.skipped),
        "failed": sum(1 for c in reports if not c.passed),
        "skipped": sum(1 for c in reports if c.skipped),
    }
    return RunReport(asdict(manifest), reports, summary, time.perf_counter() - start)


def emit(report: RunReport, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for c in report.checks:
            status = "skip" if c.skipped else str(c.passed).lower()
            w.writerow([c.name, c.t, c.k, repr(c.max_deviation), repr(c.tolerance), status])
        return buf.getvalue().encode()
    raise ConfigError(f"unknown format {fmt!r}")


# argument parsing helpers

def _complex_list(text: str) -> np.ndarray:
    try:
        return np.array([complex(s.strip().replace(" ", "")) for s in text.split(",") if s.strip()])
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse complex list {text!r}") from None


def _factors(text: str) -> ProductManifold:
    """``disk,disk`` or ``ball:2,fs:1``."""
    fs = []
    for item in text.split(","):
        kind, _, dim = item.strip().partition(":")
        try:
            fs.append(FactorMetric(kind, int(dim) if dim else 1))
        except (FinslerError, ValueError) as e:
            raise argparse.ArgumentTypeError(str(e)) from None
    return ProductManifold(tuple(fs))


def _tol(text: str):
    name, sep, val = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name, float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance value {val!r}") from None


def _rows_out(rows, fields, fmt) -> bytes:
    if fmt == "json":
        return (json.dumps(rows, indent=2) + "\n").encode()
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue().encode()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write output to this path instead of stdout")
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=_tol, action="append", default=[], metavar="NAME=VALUE")

    parser = argparse.ArgumentParser(prog="finslerlab", description="F_{t,k} metric checks and tools")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="run the checks listed in a JSON manifest")
    c.add_argument("manifest")

    k = sub.add_parser("curvature", parents=[common], help="sweep holomorphic sectional curvature over t")
    k.add_argument("--t-min", type=float, default=0.0)
    k.add_argument("--t-max", type=float, default=5.0)
    k.add_argument("--steps", type=int, default=11)
    k.add_argument("--k", type=int, default=2)
    k.add_argument("--direction", type=_complex_list, required=True)
    k.add_argument("--point", type=_complex_list)
    k.add_argument("--factors", type=_factors)

    d = sub.add_parser("distance", parents=[common], help="polydisk distance between two points")
    d.add_argument("--z1", type=_complex_list, required=True)
    d.add_argument("--z2", type=_complex_list, required=True)
    d.add_argument("--t", type=float, default=1.0)
    d.add_argument("--k", type=int, default=2)

    g = sub.add_parser("geodesic", parents=[common], help="integrate a geodesic from a point and velocity")
    g.add_argument("--from", dest="start", type=_complex_list, required=True)
    g.add_argument("--velocity", type=_complex_list, required=True)
    g.add_argument("--s-max", type=float, default=1.0)
    g.add_argument("--steps", type=int, default=32)
    g.add_argument("--t", type=float, default=1.0)
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--factors", type=_factors)
    return parser


def _default_mfd(mfd, n):
    return mfd if mfd is not None else ProductManifold.polydisk(n)


def _cmd_check(args) -> tuple:
    manifest = load_manifest(args.manifest)
    if args.seed is not None:
        manifest.seed = args.seed
    for name, val in args.tol:
        manifest.tolerances[name] = val
    manifest.validate()
    report = run_checks(manifest)
    return emit(report, args.format), 0 if report.all_passed else 1


def _cmd_curvature(args) -> tuple:
    mfd = _default_mfd(args.factors, args.direction.size)
    z = args.point if args.point is not None else np.zeros(mfd.N, dtype=complex)
    if args.steps < 1:
        raise ConfigError("--steps must be >= 1")
    rows = []
    for t in np.linspace(args.t_min, args.t_max, args.steps):
        p = MetricParams(float(t), args.k)
        rows.append({"t": float(t), "k": args.k, "K": curv.sectional_curvature(mfd, p, z, args.direction)})
    return _rows_out(rows, ["t", "k", "K"], args.format), 0


def _cmd_distance(args) -> tuple:
    p = MetricParams(args.t, args.k)
    res = geodesics.polydisk_distance(p, args.z1, args.z2)
    row = {"t": p.t, "k": p.k, "distance": res.value, "method": res.method}
    return _rows_out([row] if args.format == "csv" else row, list(row), args.format), 0


def _cmd_geodesic(args) -> tuple:
    mfd = _default_mfd(args.factors, args.start.size)
    p = MetricParams(args.t, args.k)
    path = geodesics.integrate_geodesic(mfd, p, mfd.to_real(args.start), mfd.to_real(args.velocity),
                                        args.s_max, args.steps)
    rows = []
    for q in path.samples:
        z, v = mfd.from_real(q.x), mfd.from_real(q.u)
        row = {"s": q.s}
        for i in range(mfd.N):
            row[f"re_z{i}"], row[f"im_z{i}"] = z[i].real, z[i].imag
        for i in range(mfd.N):
            row[f"re_v{i}"], row[f"im_v{i}"] = v[i].real, v[i].imag
        rows.append(row)
    return _rows_out(rows, list(rows[0]), args.format), 0


COMMANDS = {"check": _cmd_check, "curvature": _cmd_curvature, "distance": _cmd_distance,
            "geodesic": _cmd_geodesic}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    try:
        payload, code = COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"finslerlab: configuration error: {e}", file=sys.stderr)
        return 2
    except FinslerError as e:
        print(f"finslerlab: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    try:
        if args.out:
            with open(args.out, "wb") as fh:
                fh.write(payload)
        else:
            sys.stdout.buffer.write(payload)
            sys.stdout.flush()
    except OSError as e:
        print(f"finslerlab: cannot write output: {e}", file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
