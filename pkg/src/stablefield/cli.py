"""Batch front end: parse a TOML experiment config, orchestrate the
modules, and emit CSV tables plus a JSON run summary.

    stablefield <config.toml> [--mode M] [--seed S] [--out DIR]

Config grammar is documented in docs/cli.md; every mode writes
summary.json, tabular modes add one CSV per table.  CSV bodies are
byte-identical across reruns of the same config and seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__
from . import coeffs as cf
from . import innovations as innov
from . import lattice as lat
from . import montecarlo as mc
from . import normalizer as nz
from . import slowvary as sv
from . import weights as wt
from .errors import ConfigError, StableFieldError

MODES = ("weights", "normalize", "simulate", "llt", "asymptotics",
         "conditions", "tabulate")


# ----------------------------------------------------------------------
# config assembly


def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config does not parse: {exc}") from exc


def _require(cfg, key, section=None):
    try:
        return cfg[key]
    except KeyError:
        where = f" in [{section}]" if section else ""
        raise ConfigError(f"missing key {key!r}{where}") from None


def build_coeffs(cfg: dict) -> cf.CoefficientModel:
    kind = _require(cfg, "kind", "coeffs")
    if kind == "doubly_geometric":
        return cf.DoublyGeometric(_require(cfg, "theta", "coeffs"),
                                  _require(cfg, "rho", "coeffs"))
    if kind == "farima":
        return cf.Farima(_require(cfg, "beta1", "coeffs"),
                         _require(cfg, "beta2", "coeffs"))
    if kind == "isotropic":
        return cf.Isotropic(_require(cfg, "beta", "coeffs"),
                            cfg.get("d", 2), cfg.get("a0", 1.0))
    if kind == "anisotropic":
        return cf.Anisotropic(_require(cfg, "betas", "coeffs"),
                              _require(cfg, "gamma", "coeffs"),
                              cfg.get("a0", 1.0))
    if kind == "finite":
        rows = _require(cfg, "support", "coeffs")
        entries = {tuple(int(v) for v in row[:-1]): float(row[-1]) for row in rows}
        return cf.Finite(entries)
    raise ConfigError(f"unknown coefficient kind {kind!r}")


def build_L(cfg: dict | None, model) -> sv.SlowVary:
    if cfg is None or cfg.get("kind", "canonical") == "canonical":
        if model is None:
            raise ConfigError("L = canonical needs an innovations section")
        return model.canonical_L()
    kind = cfg["kind"]
    if kind == "constant":
        return sv.constant(cfg.get("value", 1.0))
    if kind == "pareto":
        return sv.pareto_canonical(_require(cfg, "alpha", "L"))
    if kind == "log_power":
        return sv.log_power(_require(cfg, "exponent", "L"))
    if kind == "tabulated":
        return sv.tabulated(_require(cfg, "grid", "L"),
                            _require(cfg, "values", "L"))
    raise ConfigError(f"unknown L kind {kind!r}")


def build_innovations(cfg: dict, alpha: float) -> innov.InnovationModel:
    kind = _require(cfg, "kind", "innovations")
    if "alpha" in cfg and float(cfg["alpha"]) != alpha:
        raise ConfigError(
            "innovations.alpha must match the top-level alpha"
        )
    if cfg.get("centered") is False and alpha > 1.0:
        raise ConfigError(
            "innovations must be centered when 1 < alpha <= 2"
        )
    if kind == "exact_stable":
        from .stable import StableLaw

        return innov.ExactStable(
            StableLaw(alpha, cfg.get("c_alpha", 1.0), cfg.get("beta", 0.0))
        )
    if kind == "pareto_mix":
        return innov.ParetoMix(alpha, cfg.get("c_plus", 0.5))
    raise ConfigError(f"unknown innovation kind {kind!r}")


def region_family(cfg: dict, seed: int):
    """Return (builder n -> RegionUnion, scales_with_n flag)."""
    kind = _require(cfg, "kind", "region")
    if kind == "cube":
        d = cfg.get("d", 2)
        return (lambda n: lat.cube(n, d)), True
    if kind == "symbox":
        scales = cfg.get("scales", [1.0, 1.0])
        return (lambda n: lat.symmetric_box(n, scales)), True
    if kind == "anisobox":
        betas = _require(cfg, "betas", "region")
        return (lambda n: lat.anisotropic_box(n, betas)), True
    if kind == "explicit":
        rects = _require(cfg, "rects", "region")
        region = lat.explicit(rects)
        return (lambda n: region), False
    if kind == "scattered":
        rng = np.random.default_rng(seed)
        region = lat.scattered(
            _require(cfg, "count", "region"), cfg.get("d", 2),
            _require(cfg, "extent", "region"), cfg.get("max_side", 4), rng,
        )
        return (lambda n: region), False
    raise ConfigError(f"unknown region kind {kind!r}")


def default_conjugate(alpha: float) -> float:
    """Conjugate exponent q for the rectangle-count gate, from p near alpha."""
    if alpha == 2.0:
        return 2.0
    if alpha == 1.0:
        return 16.0  # p may sit arbitrarily close to 1, so q is free
    p = min(1.05 * alpha, 0.5 * (alpha + 2.0)) if alpha > 1 else 1.1
    return p / (p - 1.0)


def margin_caps(region: lat.RegionUnion, cfg: dict):
    """Per-axis margin caps: explicit override or the library default."""
    override = cfg.get("margin_cap")
    if override is None:
        return None
    if isinstance(override, (int, float)):
        return (int(override),) * region.d
    return tuple(int(v) for v in override)


# ----------------------------------------------------------------------
# output helpers


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


class RunContext:
    def __init__(self, config: dict, out_dir: Path):
        self.config = config
        self.out = out_dir
        self.artifacts: list[str] = []

    def csv(self, name, header, rows):
        path = self.out / name
        write_csv(path, header, rows)
        self.artifacts.append(str(path))
        return path


# ----------------------------------------------------------------------
# shared pipeline pieces


def single_region(config, seed):
    rcfg = _require(config, "region")
    builder, scales = region_family(rcfg, seed)
    n = rcfg.get("n")
    if scales and n is None:
        raise ConfigError("this region kind needs region.n for single runs")
    return builder(int(n) if n is not None else 0), (n or 0)


def _pipeline(config, region, seed):
    alpha = float(_require(config, "alpha"))
    model = build_coeffs(_require(config, "coeffs"))
    innovations = None
    if "innovations" in config:
        innovations = build_innovations(config["innovations"], alpha)
    L = build_L(config.get("L"), innovations)
    eps_tail = float(config.get("eps_tail", 1e-6))
    caps = margin_caps(region, config.get("coeffs", {}))
    field = wt.build_weights(model, region, alpha, L, eps_tail, caps)
    return alpha, model, innovations, L, field


def _limit_law(config, innovations, alpha, result):
    icfg = config.get("innovations", {})
    if isinstance(innovations, innov.ExactStable):
        c_alpha = innovations.law.c_alpha
        beta = innovations.law.beta
    else:
        if "c_alpha" in icfg:
            c_alpha = float(icfg["c_alpha"])
        else:
            c_alpha, _ = innov.estimate_c_alpha(innovations)
        beta = innovations.skew if alpha != 1.0 else 0.0
    return nz.limit_law(result.c_hat, alpha, c_alpha, beta), c_alpha


def _gate_if_needed(config, model, region, result, alpha):
    if model.ell1_finite():
        return None
    q = float(config.get("q", default_conjugate(alpha)))
    nz.rectangle_growth_gate(region.count, result.B_n, q)
    return q


def _ols_slope(xs, ys):
    x = np.log(np.asarray(xs, dtype=float))
    y = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def upper_half_slope(ns, values):
    """OLS slope of log values vs log n over the upper half of the grid."""
    k = len(ns)
    start = k // 2 if k > 2 else 0
    return _ols_slope(ns[start:], values[start:])


def rate_reference(config, alpha: float, n: int):
    """Closed-form normalizer rate, for families where a constant is known."""
    ccfg = config.get("coeffs", {})
    rcfg = config.get("region", {})
    if ccfg.get("kind") == "doubly_geometric" and rcfg.get("kind") == "cube":
        theta, rho = ccfg["theta"], ccfg["rho"]
        return n ** (2.0 / alpha) / ((1.0 - theta) * (1.0 - rho))
    return None


# ----------------------------------------------------------------------
# mode runners


def run_weights(ctx, config, seed):
    region, _ = single_region(config, seed)
    alpha, model, innovations, L, field = _pipeline(config, region, seed)
    diag = wt.diagnostics(field, 1.0)
    lo, hi = field.window()
    payload = {
        "entries": field.size,
        "window_lower": list(lo),
        "window_upper": list(hi),
        "sup_b": diag["sup_b"],
        "Delta_n": diag["Delta_n"],
        "tail_energy_bound": field.tail_energy_bound,
        "truncated": field.truncated,
        "region_points": lat.cardinality(region),
        "rect_count": region.count,
    }
    out_csv = config.get("outputs", {}).get("weights_csv")
    if out_csv:
        header = [f"i_{l+1}" for l in range(field.d)] + ["b"]
        idx = np.ndindex(field.values.shape)
        rows = (
            [*(int(o + k) for o, k in zip(field.origin, pos)),
             float(field.values[pos])]
            for pos in idx
        )
        ctx.csv(out_csv, header, rows)
    return payload


def run_normalize(ctx, config, seed):
    region, _ = single_region(config, seed)
    alpha, model, innovations, L, field = _pipeline(config, region, seed)
    result = nz.solve_Bn(field, alpha, L, float(config.get("tol", 1e-10)))
    diag = wt.diagnostics(field, result.B_n)
    return {
        "B_n": result.B_n,
        "residual": result.residual,
        "s_plus": result.s_plus,
        "s_minus": result.s_minus,
        "c_hat": result.c_hat,
        "rho_n": result.rho_n,
        "boundary": result.boundary,
        "fallback_used": result.fallback_used,
        "sup_b": diag["sup_b"],
        "Delta_n": diag["Delta_n"],
    }


def _prepare_sim(config, seed):
    region, _ = single_region(config, seed)
    alpha, model, innovations, L, field = _pipeline(config, region, seed)
    if innovations is None:
        raise ConfigError("simulation modes need an [innovations] section")
    result = nz.solve_Bn(field, alpha, L, float(config.get("tol", 1e-10)))
    q = _gate_if_needed(config, model, region, result, alpha)
    law, c_alpha = _limit_law(config, innovations, alpha, result)
    R = int(config.get("replicates", 10_000))
    plan = mc.SimPlan(field, innovations, result.B_n, R, seed,
                      float(config.get("max_tail_energy", 1e-3)))
    return region, alpha, innovations, field, result, law, c_alpha, plan, q


def run_simulate(ctx, config, seed):
    (region, alpha, innovations, field, result, law, c_alpha, plan,
     q) = _prepare_sim(config, seed)
    workers = config.get("workers")
    raw = mc.simulate(plan, workers)
    finite = raw[np.isfinite(raw)]
    excluded = raw.size - finite.size
    ks = mc.ks_against(finite / result.B_n, law)
    ctx.csv(
        "simulate.csv",
        ["n", "replicates", "B_n", "ks", "c_hat", "c_alpha", "excluded"],
        [[config["region"].get("n", 0), plan.replicates, result.B_n, ks,
          result.c_hat, c_alpha, excluded]],
    )
    spill = config.get("outputs", {}).get("samples_file")
    if spill:
        path = ctx.out / spill
        mc.write_samples(path, raw, result.B_n, alpha)
        ctx.artifacts.append(str(path))
    return {
        "B_n": result.B_n, "ks": ks, "c_alpha": c_alpha,
        "c_hat": result.c_hat, "excluded": int(excluded),
        "gate_q": q,
    }


def run_llt(ctx, config, seed):
    (region, alpha, innovations, field, result, law, c_alpha, plan,
     q) = _prepare_sim(config, seed)
    workers = config.get("workers")
    raw = mc.simulate(plan, workers)
    lcfg = config.get("llt", {})
    m = lcfg.get("m", "tent")
    u_list = [float(u) for u in lcfg.get("u", [])]
    u_list += [float(r) * result.B_n for r in lcfg.get("u_over_B", [])]
    if not u_list:
        u_list = [0.0]
    rows = mc.llt_estimate(plan, law, m, u_list, samples=raw)
    ctx.csv(
        "llt.csv",
        ["u", "m", "value", "target", "std_err", "excluded"],
        [[r["u"], r["m"], r["value"], r["target"], r["std_err"],
          r["n_excluded"]] for r in rows],
    )
    irows = []
    for a, b in lcfg.get("intervals", [[-1.0, 1.0]]):
        row = mc.interval_prob(plan, law, float(a), float(b), samples=raw)
        irows.append(row)
        if row["noise_dominated"]:
            print(
                f"warning: interval ({a}, {b}] estimate is noise-dominated "
                f"(std_err {row['std_err']:.3g} > value {row['value']:.3g})",
                file=sys.stderr,
            )
    ctx.csv(
        "intervals.csv",
        ["a", "b", "value", "target", "std_err", "noise_dominated", "excluded"],
        [[r["a"], r["b"], r["value"], r["target"], r["std_err"],
          r["noise_dominated"], r["n_excluded"]] for r in irows],
    )
    return {
        "B_n": result.B_n, "c_alpha": c_alpha, "rows": len(rows),
        "intervals": len(irows), "gate_q": q,
    }


def _n_grid(config):
    grid = config.get("region", {}).get("n_grid")
    if not grid:
        raise ConfigError("this mode needs region.n_grid")
    grid = [int(n) for n in grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("n_grid must be strictly increasing")
    return grid


def run_asymptotics(ctx, config, seed):
    grid = _n_grid(config)
    builder, scales = region_family(_require(config, "region"), seed)
    if not scales:
        raise ConfigError("asymptotics needs an n-scaling region family")
    rows, bns, sups = [], [], []
    alpha = float(_require(config, "alpha"))
    for n in grid:
        region = builder(n)
        _, model, innovations, L, field = _pipeline(config, region, seed)
        result = nz.solve_Bn(field, alpha, L, float(config.get("tol", 1e-10)))
        diag = wt.diagnostics(field, result.B_n)
        ref = rate_reference(config, alpha, n)
        ratio = result.B_n / ref if ref else ""
        rows.append([n, result.B_n, diag["sup_b"], result.rho_n,
                     diag["Delta_n"], result.residual, ratio])
        bns.append(result.B_n)
        sups.append(diag["sup_b"])
    ctx.csv(
        "asymptotics.csv",
        ["n", "B_n", "sup_b", "rho_n", "Delta_n", "residual", "ratio"],
        rows,
    )
    payload = {
        "slope_B_n": upper_half_slope(grid, bns),
        "slope_sup_b": upper_half_slope(grid, sups),
        "n_grid": grid,
    }
    if rows and rows[-1][-1] != "":
        payload["final_ratio"] = rows[-1][-1]
    return payload


def run_conditions(ctx, config, seed):
    grid = _n_grid(config)
    builder, scales = region_family(_require(config, "region"), seed)
    if not scales:
        raise ConfigError("conditions needs an n-scaling region family")
    alpha = float(_require(config, "alpha"))
    q = float(config.get("q", default_conjugate(alpha)))
    rows = []
    for n in grid:
        region = builder(n)
        _, model, innovations, L, field = _pipeline(config, region, seed)
        result = nz.solve_Bn(field, alpha, L, float(config.get("tol", 1e-10)))
        cond = nz.check_conditions(field, alpha, L, result.B_n)
        gate_ok = True
        if not model.ell1_finite():
            try:
                nz.rectangle_growth_gate(region.count, result.B_n, q)
            except StableFieldError:
                gate_ok = False
        rows.append([n, result.B_n, cond["A1"], cond["A2"], cond["S1"],
                     cond["S2"], result.c_hat, region.count, gate_ok])
    ctx.csv(
        "conditions.csv",
        ["n", "B_n", "A1", "A2", "S1", "S2", "c_hat", "J", "gate_ok"],
        rows,
    )
    return {"n_grid": grid, "q": q}


def run_tabulate(ctx, config, seed):
    from .stable import StableLaw, StableLimitLaw

    lcfg = config.get("law")
    if lcfg is None:
        raise ConfigError("tabulate mode needs a [law] section")
    alpha = float(lcfg.get("alpha", config.get("alpha", 0.0)))
    law = StableLaw(alpha, lcfg.get("c_alpha", 1.0), lcfg.get("beta", 0.0))
    if "c" in lcfg:
        law = StableLimitLaw(float(lcfg["c"]), law).reduced()
    tcfg = config.get("tabulate", {})
    lo = float(tcfg.get("lo", -5.0))
    hi = float(tcfg.get("hi", 5.0))
    points = int(tcfg.get("points", 101))
    if not (lo < hi and points >= 2):
        raise ConfigError("tabulate needs lo < hi and points >= 2")
    xs = np.linspace(lo, hi, points)
    rows = [[float(x), law.pdf(float(x)), law.cdf(float(x))] for x in xs]
    ctx.csv("law_table.csv", ["x", "pdf", "cdf"], rows)
    return {"points": points, "alpha": alpha, "lo": lo, "hi": hi}


RUNNERS = {
    "weights": run_weights,
    "normalize": run_normalize,
    "simulate": run_simulate,
    "llt": run_llt,
    "asymptotics": run_asymptotics,
    "conditions": run_conditions,
    "tabulate": run_tabulate,
}


def run(config: dict, out_dir, mode: str | None = None,
        seed: int | None = None) -> dict:
    """Execute one experiment config; returns the summary document."""
    mode = mode or config.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    seed = int(seed if seed is not None else config.get("seed", 0))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ctx = RunContext(config, out)
    start = time.perf_counter()
    payload = RUNNERS[mode](ctx, config, seed)
    summary = {
        "version": __version__,
        "mode": mode,
        "seed": seed,
        "config": config,
        "wall_time_s": time.perf_counter() - start,
        "result": payload,
        "artifacts": ctx.artifacts,
    }
    spath = out / "summary.json"
    with open(spath, "w") as fh:
        json.dump(summary, fh, indent=2, default=str)
    summary["summary_path"] = str(spath)
    return summary


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stablefield",
        description="Heavy-tailed linear random field experiments",
    )
    parser.add_argument("config", help="TOML experiment config")
    parser.add_argument("--mode", choices=MODES, help="override config mode")
    parser.add_argument("--seed", type=int, help="override config seed")
    parser.add_argument("--out", default=None, help="output directory")
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        out = args.out or config.get("outputs", {}).get("dir", "out")
        summary = run(config, out, args.mode, args.seed)
    except StableFieldError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({k: summary[k] for k in ("mode", "result", "artifacts")},
                     indent=2, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
