"""Command-line interface: ``verify``, ``bifdiag``, ``fiber``, ``bouquet`` and ``scan``.

Exit codes: 0 ok, 1 a check failed, 2 usage or configuration error, 3 I/O error.

Every flag can also be given in a plain ``key=value`` file passed with
``--config``; flags on the command line override the file.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
COMMANDS = ("verify", "bifdiag", "fiber", "bouquet", "scan")
FORMATS = ("svg", "json", "csv")
PRESETS = {
    # 5^4 parameter cells on [0, 1]^4
    "coarse": {"t_axis": 5, "j_points": 64, "c_grid": 16},
    # two points per axis; for smoke tests
    "tiny": {"t_axis": 2, "j_points": 16, "c_grid": 4},
}
MIN_GRID = 8


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str = "verify"
    t: tuple | str = (0.0, 0.0, 0.0, 0.0)
    value: tuple | None = None
    grid: tuple | None = None
    tol: float | None = None
    out: str | None = None
    format: str | None = None
    jobs: int = 1
    deterministic: bool = False
    preset: str = "coarse"
    point: str | None = None
    checks: tuple | None = None
    seed: int = 20240607
    checkpoint: str | None = None
    features: bool = False

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.t != "random":
            if len(self.t) != 4 or not all(math.isfinite(v) for v in self.t):
                raise ConfigError("t must be four finite numbers")
        if self.tol is not None and not self.tol > 0:
            raise ConfigError("tolerance must be positive")
        if self.grid is not None and min(self.grid) < MIN_GRID:
            raise ConfigError(f"grid sizes must be at least {MIN_GRID}")
        if self.format is not None and self.format not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}")
        if self.command in ("fiber", "bouquet") and self.value is None:
            raise ConfigError(f"{self.command} needs --value j,c")
        return self

    # -- key=value text ---------------------------------------------------------

    def emit(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            lines.append(f"{f.name}={_fmt(f.name, v)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        kw = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ConfigError(f"bad config line {raw!r}")
            key = key.strip()
            if key not in _FIELDS:
                raise ConfigError(f"unknown config key {key!r}")
            kw[key] = _convert(key, val.strip())
        return cls(**kw)


_FIELDS = {f.name for f in fields(RunConfig)}


def _fmt(name, v) -> str:
    if name == "grid":
        return "x".join(str(int(x)) for x in v)
    if name in ("t", "value", "checks") and not isinstance(v, str):
        return ",".join(repr(x) for x in v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def _floats(text: str, n: int | None, what: str) -> tuple:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise ConfigError(f"{what}: expected {n} numbers, got {len(vals)}")
    return vals


def _convert(name: str, text: str):
    if name == "t":
        return "random" if text == "random" else _floats(text, 4, "t")
    if name == "value":
        return _floats(text, 2, "value")
    if name == "grid":
        parts = text.lower().split("x")
        try:
            g = tuple(int(p) for p in parts)
        except ValueError:
            raise ConfigError(f"grid: expected NxM, got {text!r}") from None
        return g * 2 if len(g) == 1 else g
    if name == "checks":
        try:
            return tuple(int(x) for x in text.split(","))
        except ValueError:
            raise ConfigError(f"checks: expected integers, got {text!r}") from None
    if name in ("tol",):
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"tol: not a number: {text!r}") from None
    if name in ("jobs", "seed"):
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{name}: not an integer: {text!r}") from None
    if name in ("deterministic", "features"):
        if text.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"{name}: expected true/false, got {text!r}")
        return text.lower() in ("true", "1", "yes")
    return text


# -- argument parsing ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypersemitoric", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--t", help="perturbation parameters a,b,c,d (or 'random' for verify --point)")
    p.add_argument("--value", help="momentum value j,c")
    p.add_argument("--grid", help="grid size NxM (or N)")
    p.add_argument("--tol", help="override the tolerance of tolerance-bound checks")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", help="svg, json or csv")
    p.add_argument("--jobs", help="worker processes")
    p.add_argument("--deterministic", action="store_true", default=None, help="omit timestamps")
    p.add_argument("--preset", help="scan preset: " + ", ".join(PRESETS))
    p.add_argument("--point", help="verify: rank of dF_t at eight comma-separated coordinates")
    p.add_argument("--checks", help="verify: comma-separated check numbers (default all)")
    p.add_argument("--seed", help="random seed")
    p.add_argument("--checkpoint", help="scan: resumable checkpoint file")
    p.add_argument("--features", action="store_true", default=None, help="scan: also look for flaps and swallowtails")
    p.add_argument("--config", help="key=value config file; flags override it")
    return p


def config_from_args(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig()
    if ns.config:
        try:
            cfg = RunConfig.parse(Path(ns.config).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
    updates = {"command": ns.command}
    for name in _FIELDS - {"command"}:
        raw = getattr(ns, name, None)
        if raw is None:
            continue
        updates[name] = raw if isinstance(raw, bool) else _convert(name, raw)
    return dataclasses.replace(cfg, **updates).validate()


# -- commands --------------------------------------------------------------------------

def _write(cfg: RunConfig, text: str) -> None:
    if cfg.out is None or cfg.out == "-":
        sys.stdout.write(text)
        return
    path = Path(cfg.out)
    path.write_text(text)


def _t(cfg: RunConfig) -> tuple:
    if cfg.t == "random":
        raise ConfigError("t=random is only meaningful with verify --point")
    return tuple(cfg.t)


def cmd_verify(cfg: RunConfig) -> int:
    from . import verify
    from .export import dumps

    if cfg.point is not None:
        z = verify.parse_point(cfg.point)
        rng = np.random.default_rng(cfg.seed)
        ts = rng.uniform(-2, 2, size=(20, 4)) if cfg.t == "random" else [tuple(cfg.t)]
        ranks = verify.point_rank(z, ts)
        rank = max(ranks)
        report = {"point": [[float(v.real), float(v.imag)] for v in z], "t": [list(map(float, t)) for t in ts],
                  "ranks": ranks, "rank": rank}
        print(f"rank of dF_t at the point: {sorted(set(ranks))} over {len(ranks)} t"
              + (" (rank 0 confirmed)" if rank == 0 else ""))
        if cfg.out:
            _write(cfg, dumps(report, stamp=not cfg.deterministic))
        return EXIT_OK
    results = verify.run_all(tol=cfg.tol, seed=cfg.seed, jobs=cfg.jobs,
                             only=set(cfg.checks) if cfg.checks else None, log=print)
    report = verify.report_dict(results)
    bound = [r for r in results if r.tol_bound and not r.passed]
    if bound:
        print("tolerance-bound failures: " + ", ".join(f"{r.id} ({r.name})" for r in bound))
    print("all checks passed" if report["passed"] else "some checks FAILED")
    if cfg.out:
        _write(cfg, dumps(report, stamp=not cfg.deterministic))
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_bifdiag(cfg: RunConfig) -> int:
    from .bifurcation import critical_value_curves, unfolded_diagram
    from .export import curves_csv, diagram_dict, diagram_svg, dumps

    t = _t(cfg)
    grid = cfg.grid or (128, 128)
    fmt = cfg.format or "svg"
    stamp = not cfg.deterministic
    if fmt == "csv":
        crit = critical_value_curves(t, j_grid=(np.arange(2 * grid[0]) + 0.5) * 3.0 / (2 * grid[0]))
        _write(cfg, curves_csv(crit, stamp))
        return EXIT_OK
    diag = unfolded_diagram(t, grid=grid)
    if fmt == "json":
        _write(cfg, dumps(diagram_dict(diag), stamp))
    else:
        _write(cfg, diagram_svg(diag, diag.critical, stamp, title=f"t = {t}"))
    return EXIT_OK


def _check_value(t, value) -> tuple[float, float]:
    from .reduced import critical_points_on_slice

    j, c = value
    if not 0.0 < j < 3.0:
        raise UsageError(f"j = {j} outside the open slice range (0, 3)")
    vals = [p.value for p in critical_points_on_slice(t, j)]
    lo, hi = min(vals), max(vals)
    if not lo <= c <= hi:
        raise UsageError(f"c = {c} outside the range of H_t on the slice j = {j}: [{lo!r}, {hi!r}]")
    return j, c


def cmd_fiber(cfg: RunConfig) -> int:
    from .classify import leaf_components
    from .export import dumps, fiber_csv, fiber_dict, fiber_svg
    from .levelset import level_set

    t = _t(cfg)
    j, c = _check_value(t, cfg.value)
    n = cfg.grid[0] if cfg.grid else 512
    levels = level_set(t, j, c, grid_n=n)
    _, leaves = leaf_components(t, j, c, levels=levels)
    fmt = cfg.format or "json"
    stamp = not cfg.deterministic
    if fmt == "json":
        _write(cfg, dumps(fiber_dict(levels, leaves), stamp))
    elif fmt == "csv":
        _write(cfg, fiber_csv(levels, stamp))
    else:
        _write(cfg, fiber_svg(levels, stamp))
    return EXIT_OK


def cmd_bouquet(cfg: RunConfig) -> int:
    from .classify import leaf_components
    from .export import bouquet_svg, dumps

    t = _t(cfg)
    j, c = _check_value(t, cfg.value)
    n = cfg.grid[0] if cfg.grid else 512
    _, leaves = leaf_components(t, j, c, grid_n=n)
    fmt = cfg.format or "json"
    if fmt == "csv":
        raise UsageError("bouquet supports svg and json")
    if fmt == "json":
        body = {"t": list(t), "j": j, "c": c,
                "leaves": [d.to_dict() for d in leaves]}
        _write(cfg, dumps(body, not cfg.deterministic))
    else:
        _write(cfg, bouquet_svg([d.bouquet for d in leaves if d.bouquet is not None], not cfg.deterministic))
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    from .export import dumps
    from .scan import coarse_t_grid, default_j_grid, scan

    pre = PRESETS[cfg.preset]
    if (cfg.format or "json") != "json":
        raise UsageError("scan writes json")
    rep = scan(coarse_t_grid(pre["t_axis"]), default_j_grid(pre["j_points"]), c_grid=pre["c_grid"],
               jobs=cfg.jobs, checkpoint=cfg.checkpoint, features=cfg.features)
    body = {"preset": cfg.preset, **rep.to_dict()}
    _write(cfg, dumps(body, not cfg.deterministic))
    print(f"max stack count {rep.max_k} over {rep.cells} cells; witnesses for k = "
          + ", ".join(sorted(rep.witnesses, key=int)), file=sys.stderr)
    return EXIT_OK


HANDLERS = {"verify": cmd_verify, "bifdiag": cmd_bifdiag, "fiber": cmd_fiber,
            "bouquet": cmd_bouquet, "scan": cmd_scan}


def main(argv=None) -> int:
    try:
        cfg = config_from_args(sys.argv[1:] if argv is None else argv)
        return HANDLERS[cfg.command](cfg)
    except SystemExit as exc:          # argparse
        return EXIT_USAGE if exc.code else EXIT_OK
    except (UsageError, ConfigError, DomainError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
