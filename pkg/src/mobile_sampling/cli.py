"""Command-line front end: ``mobile-sampling <subcommand> --config cfg.json --out dir``.

Configs are JSON objects (see ``configs/`` and the README for the schema).
Every subcommand writes ``<subcommand>_report.txt`` (key = value lines) and
possibly CSV files to ``--out``.  Exit status: 0 success, 1 error, 2 when
``certify`` does not return CERTIFIED.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bandlimited import synthesize
from .certify import (
    CERTIFIED,
    RATIO_REGRESSION_FLOOR,
    Budgets,
    certify,
    sampling_ratio,
    sinc_product_example,
)
from .convex import body_from_dict, diameter, mean_width
from .geometry import (
    RNG_NAME,
    build_sphere_quadrature,
    make_rng,
    spawn_rngs,
    theorem_constant,
)
from .integral_geometry import crofton_area
from .nodal import jensen_bound_check, ronkin_inequality_check, ronkin_average
from .remez import (
    C_SWEEP,
    GATE_C,
    random_union_of_intervals,
    remez_check,
    sublevel_decay_check,
)
from .surfaces import (
    SphereShell,
    box_window,
    check_phi0_floor,
    has_positive_measure,
    regularity_profile,
    surface_density,
    surface_from_dict,
)

SCHEMA_VERSION = "1"
TOOL = "mobile-sampling"
SUBCOMMANDS = ("mean-width", "density", "phi-profile", "certify", "crofton", "ronkin", "jensen",
               "remez", "sampling-ratio", "section5", "selftest")


class ConfigError(ValueError):
    pass


class Context:
    """Parsed config plus output helpers shared by all subcommands."""

    def __init__(self, args, config: dict, raw: bytes, base_dir: Path):
        self.args = args
        self.config = config
        self.base_dir = base_dir
        self.sha = hashlib.sha256(raw).hexdigest()
        seed = args.seed if args.seed is not None else config.get("seed")
        if seed is None:
            raise ConfigError("field 'seed': required (no wall-clock seeding)")
        try:
            self.seed = int(seed)
        except (TypeError, ValueError):
            raise ConfigError(f"field 'seed': expected an integer, got {seed!r}") from None
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ConfigError("field 'seed': must be an unsigned 64-bit integer")
        self.scale = float(args.budget_scale)
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.report_lines: list[tuple[str, object]] = []

    # config accessors -------------------------------------------------
    def section(self, name: str) -> dict:
        sec = self.config.get(name, {})
        if not isinstance(sec, dict):
            raise ConfigError(f"field '{name}': expected an object")
        return sec

    def param(self, name, default=None):
        return self.section("params").get(name, default)

    def budget(self, name, default):
        return self.section("budgets").get(name, default)

    def scaled(self, n: int) -> int:
        return max(1, int(round(n * self.scale)))

    @property
    def dimension(self) -> int:
        if "dimension" not in self.config:
            raise ConfigError("field 'dimension': required")
        return int(self.config["dimension"])

    def spectrum(self):
        if "spectrum" not in self.config:
            raise ConfigError("field 'spectrum': required for this subcommand")
        try:
            K = body_from_dict(self.config["spectrum"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"field 'spectrum': {_describe(exc)}") from None
        if K.dimension != self.dimension:
            raise ConfigError("field 'spectrum.dimension': does not match 'dimension'")
        return K

    def surface(self):
        if "surface" not in self.config:
            raise ConfigError("field 'surface': required for this subcommand")
        try:
            S = surface_from_dict(self.config["surface"], self.base_dir)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"field 'surface': {_describe(exc)}") from None
        if S.dimension != self.dimension:
            raise ConfigError("field 'surface': dimension does not match 'dimension'")
        return S

    def budgets(self) -> Budgets:
        b = Budgets(
            quadrature_level=int(self.budget("quadrature_level", 4)),
            n_centres=int(self.budget("center_count", 256)),
            density_radii=tuple(self.budget("R_grid", list(np.geomspace(4.0, 64.0, 9)))),
            profile_radii=tuple(self.budget("profile_radii", list(np.geomspace(1e-5, 0.5, 14)))),
            n_lines=int(self.budget("line_count", 100_000)),
            corpus_size=int(self.budget("corpus_size", 200)),
        )
        return b.scaled(self.scale) if self.scale != 1.0 else b

    # output -------------------------------------------------------------
    def report(self, key, value):
        if isinstance(value, float):
            value = f"{value:.12g}"
        self.report_lines.append((key, value))

    def write_csv(self, name: str, header, rows):
        path = self.out / name
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            fh.write(f"# tool={TOOL} version={__version__} seed={self.seed} "
                     f"config_sha256={self.sha}\n")
            for row in rows:
                w.writerow([_fmt(v) for v in row])
        return path

    def flush(self, subcommand: str):
        head = [("tool", TOOL), ("version", __version__), ("subcommand", subcommand),
                ("seed", self.seed), ("rng", RNG_NAME), ("config_sha256", self.sha),
                ("budget_scale", f"{self.scale:g}"), ("threads", self.args.threads)]
        text = "".join(f"{k} = {v}\n" for k, v in head + self.report_lines)
        (self.out / f"{subcommand.replace('-', '_')}_report.txt").write_text(text, encoding="utf-8")
        sys.stdout.write(text)


def _describe(exc: Exception) -> str:
    if isinstance(exc, KeyError):
        return f"missing key {exc.args[0]!r}"
    return str(exc)


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return v


# ---------------------------------------------------------------- subcommands


def cmd_mean_width(ctx: Context) -> int:
    K = ctx.spectrum()
    level = int(ctx.budget("quadrature_level", 4))
    q = build_sphere_quadrature(K.dimension, level)
    W = mean_width(K, q)
    W2 = mean_width(K, build_sphere_quadrature(K.dimension, level + 1))
    ctx.report("mean_width", f"{W:.6f}")
    ctx.report("mean_width_full", W)
    ctx.report("mean_width_tolerance", f"{abs(W2 - W):.3g}")
    ctx.report("diameter", diameter(K, q))
    ctx.report("A_d", theorem_constant(K.dimension))
    ctx.report("A_d_times_W", theorem_constant(K.dimension) * W)
    return 0


def cmd_density(ctx: Context) -> int:
    S = ctx.surface()
    b = ctx.budgets()
    rep = surface_density(S, b.density_radii, b.n_centres, ctx.seed)
    ctx.report("density_estimate", rep.estimate)
    ctx.report("density_uncertainty", rep.uncertainty)
    ctx.report("fit_slope", rep.slope)
    ctx.report("centres_used", rep.centres_used)
    ctx.report("bias", rep.note)
    ctx.write_csv("density.csv", ["R", "density"], rep.rows())
    return 0


def cmd_phi_profile(ctx: Context) -> int:
    S = ctx.surface()
    b = ctx.budgets()
    prof = regularity_profile(S, b.profile_radii, b.n_centres, ctx.seed)
    window = box_window(2.0, S.dimension)
    verdict = check_phi0_floor(prof, has_positive_measure(S, window))
    ctx.report("phi0", prof.phi0)
    ctx.report("phi0_floor", verdict.status)
    ctx.report("phi0_message", verdict.message)
    ctx.report("centres_used", prof.centres_used)
    ctx.report("empty_warning", prof.empty)
    ctx.write_csv("phi_profile.csv", ["r", "phi"], prof.rows())
    return 0


def cmd_certify(ctx: Context) -> int:
    S = ctx.surface()
    K = ctx.spectrum()
    rep = certify(S, K, ctx.budgets(), ctx.seed,
                  surface_id=ctx.param("surface_id"), spectrum_id=ctx.param("spectrum_id"))
    for line in rep.to_keyvalue().splitlines():
        k, _, v = line.partition(" = ")
        ctx.report(k, v)
    return 0 if rep.verdict == CERTIFIED else 2


def cmd_crofton(ctx: Context) -> int:
    S = ctx.surface()
    R = float(ctx.param("radius", 2.0))
    n = ctx.scaled(int(ctx.budget("line_count", 100_000)))
    est = crofton_area(S, S.dimension, R, n, ctx.seed)
    ctx.report("crofton_area", est.value)
    ctx.report("stderr", est.stderr)
    ctx.report("lines", n)
    ctx.report("discarded", est.discarded)
    if isinstance(S, SphereShell) and np.linalg.norm(S.centre) + S.radius <= R:
        ctx.report("closed_form", S.total_measure())
    return 0


def _corpus(ctx: Context, K, n: int, m: int):
    streams = spawn_rngs(ctx.seed, n)
    return [synthesize(K, m, real_valued=True, anchor=True, rng=s) for s in streams]


def cmd_ronkin(ctx: Context) -> int:
    K = ctx.spectrum()
    R = float(ctx.param("R", 10.0))
    n_f = ctx.scaled(int(ctx.param("functions", 1)))
    m = int(ctx.param("terms", 6))
    n_lines = ctx.scaled(int(ctx.budget("line_count", 4000)))
    fs = _corpus(ctx, K, n_f, m)
    rngs = spawn_rngs(ctx.seed + 1, n_f)
    violations = 0
    for i, f in enumerate(fs):
        rep = ronkin_inequality_check(f, R, n_lines, 5 * n_lines, rngs[i])
        violations += not rep.passed
        if i == 0:
            ctx.report("ronkin_average", rep.ronkin)
            ctx.report("ronkin_stderr", rep.ronkin_stderr)
            ctx.report("width_term", rep.width_term)
            ctx.report("log_term", rep.log_term)
            ctx.report("tolerance", rep.tolerance)
            prof = ronkin_average(f, R, n_lines, rngs[i])
            ctx.write_csv("ronkin_profile.csv", ["r", "nodal_area", "stderr"], prof.profile_rows())
    ctx.report("functions", n_f)
    ctx.report("violations", violations)
    return 0


def cmd_jensen(ctx: Context) -> int:
    K = ctx.spectrum()
    radii = [float(r) for r in ctx.param("radii", [1.0, 5.0, 10.0])]
    n_f = ctx.scaled(int(ctx.param("functions", 100)))
    fs = _corpus(ctx, K, n_f, int(ctx.param("terms", 6)))
    rng = make_rng(ctx.seed + 2)
    rows, violations = [], 0
    d = K.dimension
    for i, f in enumerate(fs):
        theta = rng.standard_normal(d)
        theta /= np.linalg.norm(theta)
        for r in radii:
            rep = jensen_bound_check(f, np.zeros(d), theta, r)
            violations += not rep.passed
            rows.append((i, r, rep.lhs, rep.rhs, int(rep.passed)))
    ctx.report("slices", len(rows))
    ctx.report("violations", violations)
    ctx.write_csv("jensen.csv", ["function", "r", "lhs", "rhs", "pass"], rows)
    return 0


def cmd_remez(ctx: Context) -> int:
    K = ctx.spectrum()
    n_f = ctx.scaled(int(ctx.param("functions", 100)))
    radii = [float(r) for r in ctx.param("radii", [1.0, 4.0])]
    C = float(ctx.param("C", GATE_C))
    fs = _corpus(ctx, K, n_f, int(ctx.param("terms", 6)))
    rng = make_rng(ctx.seed + 3)
    d = K.dimension
    remez_pass = decay_pass = 0
    minimal = {c: 0 for c in C_SWEEP}
    minimal[None] = 0
    first = None
    for i, f in enumerate(fs):
        theta = rng.standard_normal(d)
        theta /= np.linalg.norm(theta)
        g = f.slice(np.zeros(d), theta)
        R = radii[i % len(radii)]
        F = random_union_of_intervals(R, rng)
        rem = remez_check(g, None, R, F, C)
        dec = sublevel_decay_check(g, None, R, C)
        remez_pass += rem.passed
        decay_pass += dec.passed
        minimal[rem.minimal_C] += 1
        first = first or dec
    ctx.report("instances", n_f)
    ctx.report("C", C)
    ctx.report("remez_pass_rate", remez_pass / n_f)
    ctx.report("decay_pass_rate", decay_pass / n_f)
    for c in C_SWEEP:
        ctx.report(f"minimal_C_{c:g}", minimal[c])
    ctx.report("minimal_C_none", minimal[None])
    ctx.write_csv("sublevel.csv", ["epsilon", "measure", "bound"], first.rows())
    return 0


def cmd_sampling_ratio(ctx: Context) -> int:
    S = ctx.surface()
    K = ctx.spectrum()
    p = ctx.param("p", "inf")
    p = math.inf if str(p).lower() in ("inf", "infinity") else float(p)
    win = ctx.param("window")
    window = (np.array(win[0], float), np.array(win[1], float)) if win else None
    n = ctx.scaled(int(ctx.budget("corpus_size", 200)))
    rep = sampling_ratio(S, K, p, window, n, ctx.seed, int(ctx.param("terms", 6)))
    ctx.report("p", "inf" if math.isinf(p) else p)
    ctx.report("corpus_size", n)
    ctx.report("min_ratio", rep.min_ratio)
    q = rep.quartiles
    ctx.report("quartile_25", q[0])
    ctx.report("median", q[1])
    ctx.report("quartile_75", q[2])
    ctx.report("regression_floor", RATIO_REGRESSION_FLOOR)
    ctx.report("note", rep.note)
    ctx.write_csv("sampling_ratio.csv", ["function", "ratio"], list(enumerate(rep.ratios)))
    return 0


def cmd_section5(ctx: Context) -> int:
    d = int(ctx.param("d", ctx.config.get("dimension", 2)))
    rep = sinc_product_example(d, ctx.seed, ctx.scaled(128))
    for line in rep.to_keyvalue().splitlines():
        k, _, v = line.partition(" = ")
        ctx.report(k, v)
    ok = rep.width_ok and rep.product_ge_2 and rep.nodal_ok
    return 0 if ok else 1


def cmd_selftest(ctx: Context) -> int:
    from .selftest import run_selftest

    results = run_selftest()
    failed = 0
    for name, ok in results:
        ctx.report(name, "pass" if ok else "FAIL")
        failed += not ok
    ctx.report("failed", failed)
    return 0 if failed == 0 else 1


COMMANDS = {
    "mean-width": cmd_mean_width,
    "density": cmd_density,
    "phi-profile": cmd_phi_profile,
    "certify": cmd_certify,
    "crofton": cmd_crofton,
    "ronkin": cmd_ronkin,
    "jensen": cmd_jensen,
    "remez": cmd_remez,
    "sampling-ratio": cmd_sampling_ratio,
    "section5": cmd_section5,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL, description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, required=name not in ("selftest", "section5"))
        p.add_argument("--out", type=Path, default=Path("."))
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=1,
                       help="accepted for compatibility; work is vectorised in one process")
        p.add_argument("--budget-scale", type=float, default=1.0)
    return parser


def load_config(path: Path | None) -> tuple[dict, bytes]:
    if path is None:
        return {"version": SCHEMA_VERSION}, b"{}"
    raw = Path(path).read_bytes()
    try:
        cfg = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    version = str(cfg.get("version", ""))
    if version != SCHEMA_VERSION:
        raise ConfigError(f"field 'version': expected {SCHEMA_VERSION!r}, got {version!r}")
    return cfg, raw


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.budget_scale <= 0:
            raise ConfigError("--budget-scale must be positive")
        cfg, raw = load_config(args.config)
        if args.config is None:
            cfg.setdefault("seed", 0)
        base = args.config.parent if args.config else Path(".")
        ctx = Context(args, cfg, raw, base)
        code = COMMANDS[args.command](ctx)
        ctx.flush(args.command)
        return code
    except ConfigError as exc:
        print(f"error: malformed config: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, TypeError, NotImplementedError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
