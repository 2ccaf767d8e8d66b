"""Command line driver: ``roughmax {norms,maximal,distribution,limit,czd,check}``.

Exit codes: 0 ok, 1 check-suite failure, 2 usage error, 3 numeric-domain error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import asymptotics as asy
from . import checks, czd
from .errors import RoughMaxError
from .maximal_op import RadiusPolicy, maximal_field
from .sphere_kernel import c_omega, dini_integral_estimate, l1_norm, llogl_norm, make_sphere_grid
from .zoo import parse_function, parse_kernel

SUBCOMMANDS = ("norms", "maximal", "distribution", "limit", "czd", "check")


@dataclass(frozen=True)
class ExperimentConfig:
    command: str = "norms"
    kernel: str = "const:1"
    fn: str | None = None            # default: indicator_interval:0,1 (n=1), indicator_ball:1 (n=2)
    n: int = 2
    cells: int | None = None         # f grid cells per axis; default 4000 (n=1), 64 (n=2)
    eval_cells: int | None = None    # near-field grid cells per axis; default 4000 (n=1), 256 (n=2)
    box: str | None = None           # "lo,hi[,lo,hi]"; default: the function's own bounding box
    lambda_start: float = 0.2
    lambda_ratio: float = 0.5
    lambda_count: int = 7
    radius_policy: str = "exact"
    trunc_R: float | None = None     # default: 4 x support radius of f
    level: float | None = None       # czd level t; default: n lambda / (2^(3n+1) C_Omega) at lambda_start
    sphere_res: int = 4096
    suite: str = "all"
    out: str | None = None
    seed: int = 0

    def function_id(self) -> str:
        if self.fn:
            return self.fn
        return "indicator_interval:0,1" if self.n == 1 else "indicator_ball:1"

    def f_cells(self) -> int:
        return self.cells if self.cells is not None else (4000 if self.n == 1 else 64)

    def near_cells(self) -> int:
        return self.eval_cells if self.eval_cells is not None else (4000 if self.n == 1 else 256)

    def schedule(self) -> np.ndarray:
        return asy.geometric_schedule(self.lambda_start, self.lambda_ratio, self.lambda_count)

    def box_pairs(self):
        if self.box is None:
            return None
        b = [float(v) for v in self.box.split(",")]
        return [(b[2 * i], b[2 * i + 1]) for i in range(len(b) // 2)]


FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _convert(key, raw):
    kind = FIELD_TYPES[key]
    if "int" in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw


def read_config_file(path) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in FIELD_TYPES or key == "command":
                raise ValueError(f"{path}:{lineno}: unknown or malformed key {key!r}")
            out[key] = _convert(key, val.strip())
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="roughmax", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=SUBCOMMANDS)
    p.add_argument("--kernel")
    p.add_argument("--fn")
    p.add_argument("--n", type=int, choices=(1, 2, 3))
    p.add_argument("--cells", type=int)
    p.add_argument("--eval-cells", type=int)
    p.add_argument("--box")
    p.add_argument("--lambda-start", type=float)
    p.add_argument("--lambda-ratio", type=float)
    p.add_argument("--lambda-count", type=int)
    p.add_argument("--radius-policy")
    p.add_argument("--trunc-R", dest="trunc_R", type=float)
    p.add_argument("--level", type=float)
    p.add_argument("--sphere-res", type=int)
    p.add_argument("--suite", choices=("all", *checks.SUITES))
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    return p


def parse_config(argv) -> ExperimentConfig:
    """Flags override config-file values, which override defaults.  Exits 2 on bad input."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    values = {}
    if ns.config:
        try:
            values.update(read_config_file(ns.config))
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
    values.update({k: v for k, v in vars(ns).items() if v is not None and k != "config"})
    cfg = ExperimentConfig(**values)
    if not 0.0 < cfg.lambda_ratio < 1.0:
        parser.error("--lambda-ratio must lie in (0, 1)")
    if cfg.lambda_count < 4:
        parser.error("--lambda-count must be >= 4")
    if cfg.lambda_start <= 0:
        parser.error("--lambda-start must be positive")
    try:
        RadiusPolicy.parse(cfg.radius_policy)
    except RoughMaxError as exc:
        parser.error(str(exc))
    return cfg


def _emit(text: str, path: str | None, out) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        out.write(text)


def _fmt(x) -> str:
    return repr(float(x))


def _inputs(cfg):
    k = parse_kernel(cfg.kernel, cfg.n)
    f = parse_function(cfg.function_id(), cfg.n, cfg.f_cells(), cfg.box_pairs())
    return k, f


def cmd_norms(cfg, out):
    g = make_sphere_grid(cfg.n, cfg.sphere_res)
    k = parse_kernel(cfg.kernel, cfg.n)
    print(f"L1 = {_fmt(l1_norm(k, g))}", file=out)
    print(f"LlogL = {_fmt(llogl_norm(k, g))}", file=out)
    print(f"C_Omega = {_fmt(c_omega(k, g))}", file=out)
    if cfg.n <= 2:
        print("delta_min,dini_integral", file=out)
        for e in range(1, 6):
            print(f"{_fmt(10.0**-e)},{_fmt(dini_integral_estimate(k, g, 10.0**-e))}", file=out)
    return 0


def cmd_maximal(cfg, out):
    k, f = _inputs(cfg)
    R = cfg.trunc_R if cfg.trunc_R is not None else 4.0 * f.support_radius()
    field_ = maximal_field(f, k, [(-R, R)] * f.n, cfg.near_cells(), RadiusPolicy.parse(cfg.radius_policy))
    lines = [",".join([f"x{i + 1}" for i in range(f.n)] + ["value"])]
    for c, v in zip(field_.centers, field_.values.ravel()):
        lines.append(",".join(_fmt(t) for t in (*c, v)))
    _emit("\n".join(lines) + "\n", cfg.out, out)
    return 0


def cmd_distribution(cfg, out):
    k, f = _inputs(cfg)
    curve = asy.hybrid_distribution(f, k, cfg.schedule(), cfg.trunc_R, cfg.near_cells(),
                                    RadiusPolicy.parse(cfg.radius_policy), make_sphere_grid(cfg.n, cfg.sphere_res))
    _emit(curve.to_csv(), cfg.out, out)
    return 0


def cmd_limit(cfg, out):
    k, f = _inputs(cfg)
    est = asy.limiting_weak_type(f, k, cfg.schedule(), cfg.trunc_R, cfg.near_cells(),
                                 RadiusPolicy.parse(cfg.radius_policy), make_sphere_grid(cfg.n, cfg.sphere_res))
    print(f"estimate={_fmt(est.estimate)} target={_fmt(est.target)} "
          f"residual={_fmt(est.extrapolation_residual)} rel_error={_fmt(est.relative_error)}", file=out)
    if cfg.out:
        est.curve.to_csv(cfg.out)
    return 0


def cmd_czd(cfg, out):
    k, f = _inputs(cfg)
    t = cfg.level
    if t is None:
        t = czd.cz_level(cfg.lambda_start, cfg.n, c_omega(k, make_sphere_grid(cfg.n, cfg.sphere_res)))
    d = czd.cz_decompose(f, t)
    csv_text = d.cubes_csv()
    if cfg.out:
        _emit(csv_text, cfg.out, out)
    report = czd.verify_cz(d, f)
    print(f"level={_fmt(t)} cubes={len(d.bad)}", file=out)
    for line in report.lines():
        print(line, file=out)
    if not cfg.out:
        out.write(csv_text)
    return 0


def cmd_check(cfg, out):
    names = list(checks.SUITES) if cfg.suite == "all" else [cfg.suite]
    results = checks.run_suites(names, cfg.seed)
    for r in results:
        print(r.line(), file=out)
    failed = sum(not r.ok for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed", file=out)
    return 1 if failed else 0


COMMANDS = {
    "norms": cmd_norms,
    "maximal": cmd_maximal,
    "distribution": cmd_distribution,
    "limit": cmd_limit,
    "czd": cmd_czd,
    "check": cmd_check,
}


def run(cfg: ExperimentConfig, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        return COMMANDS[cfg.command](cfg, out)
    except (RoughMaxError, ValueError, ZeroDivisionError, FloatingPointError) as exc:
        print(f"roughmax {cfg.command}: error: {exc}", file=sys.stderr)
        return 3


def main(argv=None) -> int:
    cfg = parse_config(sys.argv[1:] if argv is None else argv)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
