"""Command-line front end.

Every command writes ``<outdir>/<command>.csv`` and ``<outdir>/<command>.summary.json``
and, with ``--plot``, a gnuplot script ``<outdir>/<command>.plot`` reading the CSV.
Exit status: 0 success, 2 invalid input, 3 a non-finite measured value.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import envelopes as env
from . import experiments as ex
from .kernels import de_la_vallee_poussin, dirichlet_block, extremal_fM, extremal_fN, fejer, random_analytic, random_poly
from .multipliers import SignVector, mikhlin_constant, randomized_sum
from .sequences import (
    LacunarySequence,
    construct_near_ratio,
    construct_near_ratio_upto,
    ratio,
    refine,
    sigma,
    sigma_block_example,
    stats,
)
from .square_function import CoverageError, square_function, square_function_2d
from .torus import TrigPoly, TrigPoly2D, evaluate, lp_norm, weak_l1

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3
SEED_ENV = "LP_LAB_SEED"


class ValidationError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict
    base_seed: int = ex.DEFAULT_SEED
    outdir: Path = Path(".")
    jobs: int | None = None
    dry_run: bool = False
    plot: bool = False


@dataclass
class Output:
    csv: str
    summary: dict
    plot: tuple[str, str, bool] | None = None  # x column, y column, log-log
    stdout: str | None = None
    finite: bool = True
    tasks: list[str] = field(default_factory=list)


# --------------------------------------------------------------------------
# argument grammars


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as e:
        raise ValidationError(f"not a comma-separated list of numbers: {text!r}") from e


def _ints(text) -> list[int]:
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise ValidationError(f"expected integers: {text!r}")
    return [int(v) for v in vals]


def parse_sequence(spec: str) -> LacunarySequence:
    """``dyadic:K`` (1, 2, ..., 2^K), ``near:LAMBDA:COUNT``, ``sigma:S:M`` or ``terms:a,b,c``."""
    kind, _, rest = spec.partition(":")
    parts = rest.split(":") if rest else []
    try:
        if kind == "dyadic" and len(parts) == 1:
            return LacunarySequence(tuple(1 << k for k in range(int(parts[0]) + 1)), f"dyadic to 2^{parts[0]}")
        if kind == "near" and len(parts) == 2:
            return construct_near_ratio(float(parts[0]), int(parts[1]))
        if kind == "sigma" and len(parts) == 2:
            return sigma_block_example(int(parts[0]), int(parts[1]))
        if kind == "terms" and len(parts) == 1:
            return LacunarySequence(tuple(_ints(parts[0])))
    except (ValueError, IndexError) as e:
        raise ValidationError(f"bad sequence {spec!r}: {e}") from e
    raise ValidationError(f"unknown sequence spec {spec!r}")


def parse_input(spec: str) -> TrigPoly:
    """Test-function grammar: fN:N, fM:M, fejer:n, vp:N, dirichlet:a:b, mono:n,
    random:deg:seed (analytic), randpoly:lo:hi:seed, json:path."""
    kind, _, rest = spec.partition(":")
    parts = rest.split(":") if rest else []
    try:
        if kind == "json":
            return TrigPoly.from_json(Path(rest).read_text())
        n = [int(v) for v in parts]
        if kind == "fN" and len(n) == 1:
            return extremal_fN(n[0])
        if kind == "fM" and len(n) == 1:
            return extremal_fM(n[0])
        if kind == "fejer" and len(n) == 1:
            return fejer(n[0])
        if kind == "vp" and len(n) == 1:
            return de_la_vallee_poussin(n[0])
        if kind == "dirichlet" and len(n) == 2:
            return dirichlet_block(n[0], n[1])
        if kind == "mono" and len(n) == 1:
            return TrigPoly.monomial(n[0])
        if kind == "random" and len(n) == 2:
            return random_analytic(n[0], n[1])
        if kind == "randpoly" and len(n) == 3:
            return random_poly(n[0], n[1], n[2])
    except (ValueError, OSError) as e:
        raise ValidationError(f"bad input {spec!r}: {e}") from e
    raise ValidationError(f"unknown input spec {spec!r}")


def _sequence(p: dict) -> LacunarySequence:
    if p.get("seq_file"):
        try:
            return LacunarySequence.from_json(Path(p["seq_file"]).read_text())
        except (OSError, ValueError, KeyError) as e:
            raise ValidationError(f"cannot read sequence file: {e}") from e
    if p.get("seq"):
        return parse_sequence(p["seq"])
    if p.get("lambda") is not None:
        return construct_near_ratio(float(p["lambda"]), int(p.get("count") or 12))
    raise ValidationError("give a sequence with --seq-file, --seq or --lambda")


def _lambdas(p: dict, default) -> list[float]:
    grid = _floats(p["lambdas"]) if p.get("lambdas") else list(default)
    if not grid:
        raise ValidationError("empty lambda grid")
    for lam in grid:
        if not (1 < lam and lam**3 < 2):
            raise ValidationError(f"lambda {lam} outside (1, 2^(1/3))")
    return grid


def _finite_summary(obj) -> bool:
    if isinstance(obj, float):
        return math.isfinite(obj)
    if isinstance(obj, dict):
        return all(_finite_summary(v) for v in obj.values())
    if isinstance(obj, (list, tuple)):
        return all(_finite_summary(v) for v in obj)
    return True


def _scan_output(result: ex.ScanResult, plot) -> Output:
    return Output(result.to_csv(), result.summary(), plot, finite=result.all_finite)


# --------------------------------------------------------------------------
# commands


def cmd_construct(cfg: RunConfig) -> Output:
    p = cfg.params
    if p.get("lambda") is None:
        raise ValidationError("construct needs --lambda")
    count = int(p.get("count") or 12)
    seq = construct_near_ratio(float(p["lambda"]), count)
    if cfg.dry_run:
        return Output("", {}, tasks=[f"construct lambda={p['lambda']} count={count}"])
    return _sequence_output(seq)


def _sequence_output(seq: LacunarySequence) -> Output:
    st = stats(seq)
    csv = "j,term\n" + "".join(f"{j},{t}\n" for j, t in enumerate(seq.terms))
    summary = {"terms": list(seq.terms), "label": seq.label, "stats": {"rho": st.rho, "sigma": st.sigma}}
    stdout = json.dumps({"terms": list(seq.terms), "stats": {"rho": st.rho, "sigma": st.sigma}})
    return Output(csv, summary, ("j", "term", False), stdout=stdout)


def cmd_refine(cfg: RunConfig) -> Output:
    seq = _sequence(cfg.params)
    if cfg.dry_run:
        return Output("", {}, tasks=[f"refine {len(seq)} terms"])
    try:
        out = refine(seq)
    except ValueError as e:
        raise ValidationError(str(e)) from e
    return _sequence_output(out)


def cmd_sigma_example(cfg: RunConfig) -> Output:
    p = cfg.params
    s, M = int(p.get("sigma") or 4), int(p.get("M") or 4096)
    if cfg.dry_run:
        return Output("", {}, tasks=[f"sigma-example sigma={s} M={M}"])
    return _sequence_output(sigma_block_example(s, M))


def cmd_square(cfg: RunConfig) -> Output:
    p = cfg.params
    seq = _sequence(p)
    if not p.get("input"):
        raise ValidationError("square needs --input")
    f = parse_input(p["input"])
    ps = _floats(p.get("p") or "2")
    if any(v < 1 for v in ps):
        raise ValidationError("p must be >= 1")
    if cfg.dry_run:
        return Output("", {}, tasks=[f"square {p['input']} over {len(seq)} terms, p={ps}"])
    res = square_function(seq, f)
    fs = evaluate(f, res.grid_size)
    summary = res.summary()
    summary["norms"] = {
        "S_lp": {repr(v): lp_norm(res.samples, v) for v in ps},
        "f_lp": {repr(v): lp_norm(fs, v) for v in ps},
        "S_weak_l1": weak_l1(res.samples),
    }
    return Output(res.to_csv(), summary, ("x", "S", False), finite=bool(np.all(np.isfinite(res.samples))))


def cmd_square2d(cfg: RunConfig) -> Output:
    p = cfg.params
    seq = _sequence(p)
    if not p.get("input"):
        raise ValidationError("square2d needs --input")
    g = parse_input(p["input"])
    F = TrigPoly2D.outer(g, g)
    if cfg.dry_run:
        return Output("", {}, tasks=[f"square2d {p['input']} x {p['input']}"])
    res = square_function_2d(seq, seq, F)
    summary = res.summary()
    summary["norms"] = {"S_l2": lp_norm(res.samples, 2)}
    return Output(res.to_csv(), summary, None, finite=bool(np.all(np.isfinite(res.samples))))


def cmd_mikhlin(cfg: RunConfig) -> Output:
    p = cfg.params
    lambdas = _lambdas(p, env.CANONICAL_LAMBDAS)
    seeds = int(p.get("seeds") or 32)
    limit = int(p.get("limit") or 2**15)
    smoothed = not p.get("sharp")
    if cfg.dry_run:
        return Output("", {}, tasks=[f"mikhlin lambda={lam} seeds={seeds}" for lam in lambdas])
    records = []
    for lam in lambdas:
        seq = construct_near_ratio_upto(lam, limit)
        rho = ratio(seq)
        n = len(seq) - 1 if smoothed else len(seq)
        for k in range(seeds):
            seed = ex.derive_seed(cfg.base_seed, "mikhlin", {"lambda": lam, "k": k})
            sym = randomized_sum(seq, SignVector.from_seed(n, seed), smoothed)
            c = mikhlin_constant(sym)
            records.append(
                ex.ExperimentRecord(
                    "mikhlin",
                    {"lambda": lam, "rho": rho, "seed": seed},
                    {"mikhlin": c, "mikhlin_times_rho_minus_1": c * (rho - 1), "sup": sym.sup(),
                     "degenerate": int(sym.degenerate)},
                )
            )
    records.sort(key=ex.ExperimentRecord.sort_key)
    worst = max(r.measured["mikhlin_times_rho_minus_1"] for r in records)
    summary = {"max_mikhlin_times_rho_minus_1": worst, "bound": env.MIKHLIN_C0, "within_bound": worst <= env.MIKHLIN_C0}
    return Output(ex.records_to_csv(records), summary, ("rho", "mikhlin_times_rho_minus_1", False),
                  finite=all(r.is_finite for r in records))


def cmd_cardinality(cfg: RunConfig) -> Output:
    lambdas = _lambdas(cfg.params, env.CANONICAL_LAMBDAS)
    if cfg.dry_run:
        return Output("", {}, tasks=[f"cardinality lambda={lam}" for lam in lambdas])
    return _scan_output(ex.cardinality_scan(lambdas, cfg.jobs), ("lambda", "count_A", True))


def cmd_sharpness(cfg: RunConfig) -> Output:
    p = cfg.params
    lambdas = _lambdas(p, env.SHARPNESS_LAMBDAS)
    Ns = _ints(p["Ns"]) if p.get("Ns") else list(env.SHARPNESS_NS)
    if not Ns or max(Ns) > 2**13 or min(Ns) < 2:
        raise ValidationError("N grid must lie in 2..2^13")
    if cfg.dry_run:
        lo = min(lambdas)
        pts = sorted({(lam, max(Ns)) for lam in lambdas} | {(lo, n) for n in Ns})
        return Output("", {}, tasks=[f"sharpness lambda={lam} N={n}" for lam, n in pts])
    return _scan_output(ex.sharpness_scan_hp(lambdas, Ns, cfg.jobs), ("lambda", "L", False))


def cmd_sigma_scan(cfg: RunConfig) -> Output:
    p = cfg.params
    sigmas = _ints(p["sigmas"]) if p.get("sigmas") else list(env.SIGMA_GRID)
    M = int(p.get("M") or env.SIGMA_M)
    try:
        ex._check_sigma_args(sigmas, M)
    except ValueError as e:
        raise ValidationError(str(e)) from e
    if cfg.dry_run:
        return Output("", {}, tasks=[f"sigma-scan sigma={s} M={M}" for s in sigmas])
    return _scan_output(ex.sigma_scan(sigmas, M, cfg.jobs), ("sigma", "R", True))


def cmd_paley(cfg: RunConfig) -> Output:
    p = cfg.params
    lambdas = _lambdas(p, env.CANONICAL_LAMBDAS)
    two_d = bool(p.get("two_d"))
    N = int(p.get("N") or (env.PALEY_N_2D if two_d else env.PALEY_N))
    if cfg.dry_run:
        return Output("", {}, tasks=[f"paley lambda={lam} N={N} two_d={two_d}" for lam in lambdas])
    try:
        res = ex.paley_scan(lambdas, N, two_d, cfg.jobs)
    except ValueError as e:
        raise ValidationError(str(e)) from e
    return _scan_output(res, ("lambda", "Q2" if two_d else "Q", False))


def cmd_zygmund(cfg: RunConfig) -> Output:
    p = cfg.params
    sigmas = _ints(p["sigmas"]) if p.get("sigmas") else [4, 8, 16]
    M = int(p.get("M") or 2**10)
    try:
        ex._check_sigma_args(sigmas, M)
    except ValueError as e:
        raise ValidationError(str(e)) from e
    if cfg.dry_run:
        return Output("", {}, tasks=[f"zygmund sigma={s} M={M}" for s in sigmas])
    return _scan_output(ex.zygmund_scan(sigmas, M, cfg.jobs), ("sigma", "quotient", True))


def cmd_lambda_p(cfg: RunConfig) -> Output:
    p = cfg.params
    seq = _sequence(p)
    ps = _floats(p["ps"]) if p.get("ps") else list(env.LAMBDA_P_PS)
    if any(v < 2 for v in ps):
        raise ValidationError("lambda-p needs p >= 2")
    trials = int(p.get("trials") or env.TRIALS)
    if cfg.dry_run:
        return Output("", {}, tasks=[f"lambda-p p={v} trials={trials}" for v in ps])
    return _scan_output(ex.lambda_p_check(seq, ps, trials, cfg.base_seed, cfg.jobs), ("p", "max_quotient", False))


def cmd_weak_type(cfg: RunConfig) -> Output:
    p = cfg.params
    lambdas = _lambdas(p, env.CANONICAL_LAMBDAS)
    N = int(p.get("N") or env.PALEY_N)
    if N > 2**13 or N < 2:
        raise ValidationError("N must lie in 2..2^13")
    if cfg.dry_run:
        return Output("", {}, tasks=[f"weak-type lambda={lam} N={N}" for lam in lambdas])
    return _scan_output(ex.weak_type_scan(lambdas, N, cfg.jobs), ("lambda", "ratio_analytic", False))


def _seq_list(p: dict, degree: int) -> list[LacunarySequence]:
    top = 1 << (degree + 1).bit_length()
    seqs = [LacunarySequence(tuple(1 << k for k in range(top.bit_length())), "dyadic")]
    for lam in _lambdas(p, (1.1,)):
        seqs.append(construct_near_ratio_upto(lam, 4 * top))
    return seqs


def cmd_dual(cfg: RunConfig) -> Output:
    p = cfg.params
    ps = _floats(p["ps"]) if p.get("ps") else list(env.DUAL_PS)
    if any(v <= 2 for v in ps):
        raise ValidationError("dual-scan needs p > 2")
    trials = int(p.get("trials") or env.TRIALS)
    seqs = _seq_list(p, 1023)
    if cfg.dry_run:
        return Output("", {}, tasks=[f"dual-scan {s.label} p={v}" for s in seqs for v in ps])
    return _scan_output(ex.dual_range_scan(seqs, ps, trials, cfg.base_seed, 1023, cfg.jobs), ("p", "max_ratio", True))


def cmd_khintchine(cfg: RunConfig) -> Output:
    p = cfg.params
    ps = _floats(p["ps"]) if p.get("ps") else list(env.KHINTCHINE_PS)
    if any(not 1 <= v <= 2 for v in ps):
        raise ValidationError("khintchine needs 1 <= p <= 2")
    trials = int(p.get("trials") or env.TRIALS)
    draws = int(p.get("draws") or env.SIGN_DRAWS)
    seqs = _seq_list(p, 600)
    if cfg.dry_run:
        return Output("", {}, tasks=[f"khintchine {s.label} p={v}" for s in seqs for v in ps])
    res = ex.khintchine_check(seqs, ps, trials, draws, cfg.base_seed, 600, cfg.jobs)
    return _scan_output(res, ("p", "min_mean_ratio", False))


COMMANDS = {
    "construct": cmd_construct,
    "refine": cmd_refine,
    "sigma-example": cmd_sigma_example,
    "square": cmd_square,
    "square2d": cmd_square2d,
    "mikhlin": cmd_mikhlin,
    "cardinality-scan": cmd_cardinality,
    "sharpness-scan": cmd_sharpness,
    "sigma-scan": cmd_sigma_scan,
    "paley-scan": cmd_paley,
    "zygmund": cmd_zygmund,
    "lambda-p": cmd_lambda_p,
    "weak-type": cmd_weak_type,
    "dual-scan": cmd_dual,
    "khintchine": cmd_khintchine,
}


# --------------------------------------------------------------------------
# parsing and running


def _common(sp: argparse.ArgumentParser):
    sp.add_argument("--outdir")
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--seed", type=int, help="base seed (LP_LAB_SEED overrides the config file)")
    sp.add_argument("--config", help="JSON file with keys named like the flags")
    sp.add_argument("--dry-run", action="store_true", default=None)
    sp.add_argument("--plot", action="store_true", default=None, help="also write a gnuplot script")


_OPTIONS = {
    "construct": [("--lambda", {}), ("--count", {"type": int})],
    "refine": [("--seq-file", {}), ("--seq", {}), ("--lambda", {}), ("--count", {"type": int})],
    "sigma-example": [("--sigma", {"type": int}), ("--M", {"type": int})],
    "square": [("--seq-file", {}), ("--seq", {}), ("--lambda", {}), ("--count", {"type": int}),
               ("--input", {}), ("--p", {})],
    "square2d": [("--seq-file", {}), ("--seq", {}), ("--lambda", {}), ("--count", {"type": int}), ("--input", {})],
    "mikhlin": [("--lambdas", {}), ("--seeds", {"type": int}), ("--limit", {"type": int}),
                ("--sharp", {"action": "store_true", "default": None})],
    "cardinality-scan": [("--lambdas", {})],
    "sharpness-scan": [("--lambdas", {}), ("--Ns", {})],
    "sigma-scan": [("--sigmas", {}), ("--M", {"type": int})],
    "paley-scan": [("--lambdas", {}), ("--N", {"type": int}), ("--two-d", {"action": "store_true", "default": None})],
    "zygmund": [("--sigmas", {}), ("--M", {"type": int})],
    "lambda-p": [("--seq-file", {}), ("--seq", {}), ("--lambda", {}), ("--count", {"type": int}),
                 ("--ps", {}), ("--trials", {"type": int})],
    "weak-type": [("--lambdas", {}), ("--N", {"type": int})],
    "dual-scan": [("--lambdas", {}), ("--ps", {}), ("--trials", {"type": int})],
    "khintchine": [("--lambdas", {}), ("--ps", {}), ("--trials", {"type": int}), ("--draws", {"type": int})],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lplab", description="Littlewood-Paley experiments for lacunary sequences")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for name in COMMANDS:
        sp = sub.add_parser(name)
        _common(sp)
        for flag, kw in _OPTIONS[name]:
            sp.add_argument(flag, **kw)
    return parser


def _load_config(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as e:
        raise ValidationError(f"cannot read config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ValidationError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve(argv: list[str]) -> RunConfig:
    """Flags override the config file; the seed comes from --seed, then LP_LAB_SEED,
    then the file, then the built-in default."""
    ns = build_parser().parse_args(argv)
    flags = {k: v for k, v in vars(ns).items() if v is not None}
    conf = _load_config(flags["config"]) if flags.get("config") else {}
    merged = {**conf, **flags}
    seed = flags.get("seed")
    if seed is None and os.environ.get(SEED_ENV):
        try:
            seed = int(os.environ[SEED_ENV])
        except ValueError as e:
            raise ValidationError(f"{SEED_ENV} must be an integer") from e
    if seed is None:
        seed = int(conf.get("seed", ex.DEFAULT_SEED))
    reserved = {"command", "outdir", "jobs", "seed", "config", "dry_run", "plot"}
    return RunConfig(
        command=ns.command,
        params={k: v for k, v in merged.items() if k not in reserved},
        base_seed=seed,
        outdir=Path(merged.get("outdir", ".")),
        jobs=merged.get("jobs", os.cpu_count()),
        dry_run=bool(merged.get("dry_run")),
        plot=bool(merged.get("plot")),
    )


def _plot_script(command: str, csv_name: str, header: list[str], spec) -> str:
    xcol, ycol, loglog = spec
    xi, yi = header.index(xcol) + 1, header.index(ycol) + 1
    lines = [
        "set datafile separator ','",
        f"set title '{command}'",
        f"set xlabel '{xcol}'",
        f"set ylabel '{ycol}'",
        "set key off",
    ]
    if loglog:
        lines.append("set logscale xy")
    lines.append(f"plot '{csv_name}' using {xi}:{yi} skip 1 with linespoints")
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    out = COMMANDS[cfg.command](cfg)
    if cfg.dry_run:
        for t in out.tasks:
            print(t, file=stdout)
        return EXIT_OK
    try:
        cfg.outdir.mkdir(parents=True, exist_ok=True)
        csv_path = cfg.outdir / f"{cfg.command}.csv"
        csv_path.write_text(out.csv)
        summary = {
            "command": cfg.command,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "base_seed": cfg.base_seed,
            "params": cfg.params,
            **out.summary,
        }
        (cfg.outdir / f"{cfg.command}.summary.json").write_text(json.dumps(summary, indent=2, default=str) + "\n")
        if cfg.plot and out.plot is not None:
            header = out.csv.splitlines()[0].split(",")
            (cfg.outdir / f"{cfg.command}.plot").write_text(_plot_script(cfg.command, csv_path.name, header, out.plot))
    except OSError as e:
        raise ValidationError(f"cannot write to {cfg.outdir}: {e}") from e
    if out.stdout:
        print(out.stdout, file=stdout)
    if not (out.finite and _finite_summary(out.summary)):
        print("non-finite value in measured output", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = resolve(argv)
        return run(cfg)
    except SystemExit as e:  # argparse usage errors
        return EXIT_INVALID if e.code not in (0, None) else EXIT_OK
    except (ValidationError, CoverageError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
