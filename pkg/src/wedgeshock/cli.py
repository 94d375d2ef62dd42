"""Configuration-driven command line front end.

One command per process reads a flat key = value file (or JSON object),
validates every referenced field against the module preconditions, runs
the requested study, and writes deterministic CSV artifacts (17
significant digits, byte-identical across runs) plus optional SVG plots.

Exit codes: 0 success, 2 configuration error, 3 numerical failure
(resonance, divergence, detachment), 4 I/O failure.
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import background, iterate, polar, spectrum
from .elliptic import StripGrid, convergence_study
from .errors import ConfigError, WedgeShockError
from .gas import GasModel
from .hodograph import WedgePerturbation

COMMANDS = ("polar", "background", "spectrum", "solve", "iterate", "study")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


@dataclass
class RunConfig:
    command: str = "polar"
    gamma: float = 1.4
    q0_minus: float = 1.3
    alpha_w_deg: float | str = "auto"
    u03_minus: float = 0.0
    branch: str = "weak"
    n: int = 2
    t_min: float = -8.0
    t_max: float = 6.0
    n_t: int = 160
    n_omega: int = 48
    delta: float = 1e-3
    sigma0: float | str = "auto"
    sigma_inf: float = -0.5
    alpha_holder: float = 0.4
    max_iter: int = 50
    tol: float = 1e-9
    output_dir: str = "."
    # raw angular problem for the spectrum command (optional)
    omega_star: float | None = None
    alpha_plus: float | None = None
    alpha_minus: float | None = None

    extras: dict = field(default_factory=dict)


_FIELD_TYPES = {
    "command": str,
    "gamma": float,
    "q0_minus": float,
    "alpha_w_deg": (float, str),
    "u03_minus": float,
    "branch": str,
    "n": int,
    "t_min": float,
    "t_max": float,
    "n_t": int,
    "n_omega": int,
    "delta": float,
    "sigma0": (float, str),
    "sigma_inf": float,
    "alpha_holder": float,
    "max_iter": int,
    "tol": float,
    "output_dir": str,
    "omega_star": float,
    "alpha_plus": float,
    "alpha_minus": float,
}


def _coerce(key, raw):
    want = _FIELD_TYPES[key]
    if isinstance(want, tuple):
        try:
            return float(raw)
        except (TypeError, ValueError):
            return str(raw)
    if want is str:
        return str(raw)
    try:
        if want is int:
            value = int(str(raw))
        else:
            value = float(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {want.__name__}") from exc
    return value


def parse_config(path) -> RunConfig:
    text = Path(path).read_text()
    data = {}
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc})") from exc
        if "grid" in raw and isinstance(raw["grid"], dict):
            grid = raw.pop("grid")
            for k, v in grid.items():
                raw[k] = v
        data = raw
    else:
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"config line {lineno}: expected key = value")
            key, _, value = line.partition("=")
            data[key.strip()] = value.strip()
    cfg = RunConfig()
    for key, raw in data.items():
        key = key.strip()
        if key.startswith("grid."):
            key = key[len("grid."):]
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{key}: unknown configuration field")
        setattr(cfg, key, _coerce(key, raw))
    validate(cfg)
    return cfg


def validate(cfg: RunConfig):
    if cfg.command not in COMMANDS:
        raise ConfigError(f"command: {cfg.command!r} not one of {COMMANDS}")
    if not cfg.gamma > 1.0:
        raise ConfigError(f"gamma: must exceed 1, got {cfg.gamma}")
    if cfg.branch not in ("weak", "strong"):
        raise ConfigError(f"branch: {cfg.branch!r} not weak/strong")
    if not cfg.q0_minus > 0:
        raise ConfigError("q0_minus: must be positive")
    gas = GasModel(cfg.gamma)
    if cfg.q0_minus**2 + cfg.u03_minus**2 >= gas.q_max_sq:
        raise ConfigError("q0_minus: upstream state beyond the cavitation speed")
    if isinstance(cfg.alpha_w_deg, str) and cfg.alpha_w_deg != "auto":
        raise ConfigError(f"alpha_w_deg: got {cfg.alpha_w_deg!r}, need a number or 'auto'")
    if isinstance(cfg.alpha_w_deg, float) and not 0 <= cfg.alpha_w_deg < 90:
        raise ConfigError(f"alpha_w_deg: {cfg.alpha_w_deg} outside [0, 90)")
    if cfg.n not in (2, 3):
        raise ConfigError(f"n: numerics run in dimension 2 or 3, got {cfg.n}")
    if cfg.n == 2 and cfg.u03_minus != 0.0:
        raise ConfigError("u03_minus: must vanish in dimension 2")
    if cfg.n_t < 8 or cfg.n_omega < 8:
        raise ConfigError("n_t/n_omega: need at least 8 points per direction")
    if not cfg.t_min < cfg.t_max:
        raise ConfigError("t_min: must lie below t_max")
    if cfg.delta < 0:
        raise ConfigError("delta: must be nonnegative")
    if not 0 < cfg.alpha_holder < 1:
        raise ConfigError(f"alpha_holder: {cfg.alpha_holder} outside (0, 1)")
    if cfg.max_iter < 1:
        raise ConfigError("max_iter: must be positive")
    if cfg.tol <= 0:
        raise ConfigError("tol: must be positive")
    if (cfg.omega_star is not None) and not 0 < cfg.omega_star < 2 * math.pi:
        raise ConfigError("omega_star: outside (0, 2*pi)")


def resolve_angle(cfg: RunConfig):
    """Wedge angle in radians; 'auto' picks a transonic angle for the
    requested branch (the midpoint of the weak-transonic window, or 2/3
    of the critical angle for the strong branch)."""
    gas = GasModel(cfg.gamma)
    if cfg.alpha_w_deg == "auto":
        hi = polar.critical_angle(gas, cfg.q0_minus, cfg.u03_minus)
        if cfg.branch == "weak":
            lo = polar.sonic_deflection(gas, cfg.q0_minus, cfg.u03_minus)
            return lo + 0.6 * (hi - lo)
        return (2.0 / 3.0) * hi
    return math.radians(cfg.alpha_w_deg)


def build_background(cfg: RunConfig):
    return background.solve_background(
        cfg.gamma, cfg.q0_minus, resolve_angle(cfg), cfg.u03_minus, cfg.branch, n=cfg.n
    )


def resolve_weights(cfg: RunConfig, bg):
    if cfg.sigma0 != "auto":
        return float(cfg.sigma0), cfg.sigma_inf
    if bg.sigma_s > 0:
        return min(0.5 * bg.sigma_s, 0.95), cfg.sigma_inf
    top = math.pi / bg.omega_s + bg.sigma_s
    return min(0.9, 0.5 * top), cfg.sigma_inf


def fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return "true" if x else "false"
    return "%.17g" % float(x)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# commands

def cmd_polar(cfg: RunConfig, out: Path):
    gas = GasModel(cfg.gamma)
    q0, edge = cfg.q0_minus, cfg.u03_minus
    v1n = polar.normal_shock_speed(gas, q0, edge)
    rows = []
    for v1 in np.linspace(v1n, q0, 400):
        pt = polar.polar_point(gas, q0, float(v1), edge)
        rows.append([pt.v1, pt.v2, pt.q, pt.rho, polar.classify(gas, q0, pt, edge)])
    write_csv(out / "polar.csv", ["v1", "v2", "q", "rho", "regime"], rows)
    return {"polar": rows}


def cmd_background(cfg: RunConfig, out: Path):
    bg = build_background(cfg)
    rec = bg.to_record()
    (out / "background.json").write_text(json.dumps(rec, indent=2, sort_keys=True) + "\n")
    return {"background": rec}


def cmd_spectrum(cfg: RunConfig, out: Path):
    if cfg.omega_star is not None:
        prob = spectrum.ObliqueAngularProblem(
            cfg.omega_star, cfg.alpha_plus or 0.0, cfg.alpha_minus or 0.0
        )
    else:
        prob = spectrum.problem_from_background(build_background(cfg))
    rows = []
    for m in range(-3, 4):
        lam = (m * math.pi - prob.phi) / prob.omega_star
        det_set = spectrum.determinant_eigenvalues(
            prob, (lam - 0.4, lam + 0.4)
        )
        nearest = min(det_set, key=lambda v: abs(v - lam)) if det_set else float("nan")
        rows.append([m, lam, nearest, abs(nearest - lam)])
    write_csv(
        out / "spectrum.csv",
        ["m", "lambda_formula", "lambda_determinant", "abs_diff"],
        rows,
    )
    return {"spectrum": rows}


def cmd_solve(cfg: RunConfig, out: Path):
    bg = build_background(cfg)
    prob = spectrum.problem_from_background(bg)
    grid = StripGrid(cfg.t_min, cfg.t_max, cfg.n_t, cfg.n_omega, 0.0, prob.omega_star)
    rows = convergence_study(prob, grid, choice="smooth", levels=3)
    write_csv(
        out / "convergence.csv",
        ["h", "max_error", "order_estimate"],
        [[r["h"], r["max_error"], r["order_estimate"]] for r in rows],
    )
    return {"convergence": rows}


def _iterate_config(cfg: RunConfig):
    bg = build_background(cfg)
    sigma0, sigma_inf = resolve_weights(cfg, bg)
    grid = iterate.default_grid(
        bg, n_t=cfg.n_t, n_omega=cfg.n_omega, t_min=cfg.t_min, t_max=cfg.t_max
    )
    return iterate.IterationConfig(
        bg,
        WedgePerturbation(cfg.delta),
        sigma0=sigma0,
        sigma_inf=sigma_inf,
        alpha=cfg.alpha_holder,
        grid=grid,
        max_iter=cfg.max_iter,
        tol=cfg.tol,
    )


def cmd_iterate(cfg: RunConfig, out: Path):
    icfg = _iterate_config(cfg)
    rep = iterate.run_iteration(icfg)
    rows = []
    for k in range(rep.n_iter):
        ratio = rep.ratios[k - 1] if k >= 1 else float("nan")
        rows.append([k + 1, rep.norms[k], rep.diff_norms[k], ratio])
    write_csv(out / "iteration.csv", ["k", "norm_udot", "diff_norm", "ratio"], rows)
    if rep.front is not None:
        write_csv(out / "front.csv", ["y2", "x1", "x2"], [list(r) for r in rep.front])
    if rep.diverged:
        raise WedgeShockError(f"iteration diverged: {rep.message}")
    if not rep.converged:
        raise WedgeShockError("iteration hit max_iter without converging")
    return {"iteration": rows, "report": rep, "bg": icfg.bg}


def cmd_study(cfg: RunConfig, out: Path):
    icfg = _iterate_config(cfg)
    delta0 = cfg.delta if cfg.delta > 0 else iterate.find_delta0(icfg)
    rows = iterate.scaling_study(icfg, [delta0, delta0 / 2, delta0 / 4])
    write_csv(
        out / "study.csv",
        ["delta", "K_hat", "final_ratio", "converged"],
        [[r["delta"], r["k_hat"], r["final_ratio"], r["converged"]] for r in rows],
    )
    if not all(r["converged"] for r in rows):
        raise WedgeShockError("a study run failed to converge")
    return {"study": rows}


# ---------------------------------------------------------------------------
# plots

def emit_plots(cfg: RunConfig, out: Path, artifacts: dict):
    """Render SVG companions; failures never touch the CSV artifacts."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except Exception:
        return
    try:
        if "polar" in artifacts:
            rows = artifacts["polar"]
            v1 = [r[0] for r in rows]
            v2 = [r[1] for r in rows]
            fig, ax = plt.subplots(figsize=(5, 4))
            ax.plot(v1, v2, lw=1.5, label="shock polar")
            ax.plot(v1, [-y for y in v2], lw=0.8, color="C0", alpha=0.4)
            theta = resolve_angle(cfg)
            vmax = max(v1)
            ax.plot(
                [0, vmax], [0, vmax * math.tan(theta)], "--", lw=1.0,
                label="wedge ray",
            )
            ax.set_xlabel("v1")
            ax.set_ylabel("v2")
            ax.legend(loc="best", fontsize=8)
            fig.savefig(out / "polar.svg")
            plt.close(fig)
        if "iteration" in artifacts:
            rows = artifacts["iteration"]
            fig, ax = plt.subplots(figsize=(5, 4))
            ax.semilogy([r[0] for r in rows], [r[2] for r in rows], "o-")
            ax.set_xlabel("sweep")
            ax.set_ylabel("successive weighted-norm difference")
            fig.savefig(out / "iteration.svg")
            plt.close(fig)
        if "report" in artifacts and artifacts["report"].front is not None:
            rep, bg = artifacts["report"], artifacts["bg"]
            y2, x1, x2 = rep.front.T
            s = bg.q0_minus * math.sin(bg.alpha_w)
            fig, ax = plt.subplots(figsize=(5, 4))
            ax.plot(x1, x2, lw=1.5, label="perturbed front")
            ax.plot(x2 * s / bg.k, x2, "--", lw=1.0, label="background front")
            ax.set_xlabel("x1")
            ax.set_ylabel("x2")
            ax.legend(loc="best", fontsize=8)
            fig.savefig(out / "front.svg")
            plt.close(fig)
        if "convergence" in artifacts:
            rows = artifacts["convergence"]
            fig, ax = plt.subplots(figsize=(5, 4))
            ax.loglog([r["h"] for r in rows], [r["max_error"] for r in rows], "o-")
            ax.set_xlabel("h")
            ax.set_ylabel("max error")
            fig.savefig(out / "convergence.svg")
            plt.close(fig)
    except Exception as exc:  # plotting is best-effort by contract
        print(f"plotting skipped: {exc}", file=sys.stderr)


# ---------------------------------------------------------------------------
# entry point

_DISPATCH = {
    "polar": cmd_polar,
    "background": cmd_background,
    "spectrum": cmd_spectrum,
    "solve": cmd_solve,
    "iterate": cmd_iterate,
    "study": cmd_study,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="wedgeshock",
        description="transonic wedge-shock laboratory: polars, spectra, sector "
        "solves and the contractive free-boundary iteration",
    )
    parser.add_argument("--config", required=True, help="path to key=value or JSON config")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--no-plots", action="store_true", help="skip SVG output")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"configuration error: cannot read {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(args.out) if args.out else Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"i/o error: cannot create {out}: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        artifacts = _DISPATCH[cfg.command](cfg, out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WedgeShockError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO

    if not args.no_plots:
        emit_plots(cfg, out, artifacts)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
