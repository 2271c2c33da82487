"""Parameter scans: each measures one functional over a grid and fits a power law.

A scan returns a ScanResult holding one ExperimentRecord per grid point (sorted
by parameters, whatever order the worker pool finished in), the log-log fits and
any points that had to be skipped.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import mpmath
import numpy as np

from . import envelopes as env
from .kernels import extremal_fM, extremal_fN, random_analytic, random_poly
from .multipliers import draw_signs
from .sequences import (
    BIGFLOAT_BITS,
    LacunarySequence,
    construct_near_ratio_from,
    construct_near_ratio_upto,
    exact_lambda,
    first_exponent_at_least,
    near_ratio_params,
    near_ratio_term,
    ratio,
    sigma,
    sigma_block_example,
)
from .square_function import block_index, block_projections, check_coverage, square_function
from .torus import (
    TrigPoly,
    TrigPoly2D,
    default_grid_size,
    evaluate,
    evaluate_2d,
    lp_norm,
    weak_l1,
    zygmund_functional,
)

__all__ = [
    "PARAM_KEYS",
    "ExperimentRecord",
    "FitResult",
    "ScanResult",
    "fit_exponent",
    "derive_seed",
    "records_to_csv",
    "pairing_N",
    "cardinality_point",
    "cardinality_scan",
    "rescaled_sequence",
    "sharpness_point",
    "sharpness_scan_hp",
    "sigma_point",
    "sigma_scan",
    "paley_quotient",
    "paley_quotient_2d",
    "paley_scan",
    "dirichlet_block_check",
    "zygmund_check",
    "zygmund_scan",
    "lambda_p_check",
    "weak_type_ratio",
    "weak_type_scan",
    "signed_block_sum",
    "dual_ratio",
    "dual_range_scan",
    "khintchine_check",
]

PARAM_KEYS = ("lambda", "rho", "sigma", "p", "N", "M", "grid", "seed")
DEFAULT_SEED = 20160


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


@dataclass(frozen=True)
class ExperimentRecord:
    experiment: str
    params: Mapping[str, object]
    measured: Mapping[str, float]
    timestamp: str = field(default="", compare=False)

    def __post_init__(self):
        unknown = set(self.params) - set(PARAM_KEYS)
        if unknown:
            raise ValueError(f"unknown parameter keys {sorted(unknown)}")

    @property
    def is_finite(self) -> bool:
        return all(math.isfinite(float(v)) for v in self.measured.values())

    def sort_key(self):
        out = []
        for k in PARAM_KEYS:
            v = self.params.get(k)
            out.append((0, 0) if v is None else (1, v))
        return tuple(out)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "params": {k: (str(v) if isinstance(v, int) and v.bit_length() > 53 else v) for k, v in self.params.items()},
            "measured": dict(self.measured),
        }


def records_to_csv(records: Sequence[ExperimentRecord]) -> str:
    """Stable column order: experiment, the parameter keys, then measured keys sorted."""
    keys = sorted({k for r in records for k in r.measured})
    buf = io.StringIO()
    buf.write(",".join(("experiment",) + PARAM_KEYS + tuple(keys)) + "\n")
    for r in records:
        row = [r.experiment] + [_fmt(r.params.get(k)) for k in PARAM_KEYS]
        row += [_fmt(r.measured.get(k)) for k in keys]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    points_used: int

    @property
    def conclusive(self) -> bool:
        return self.r_squared >= env.MIN_R_SQUARED

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "points_used": self.points_used,
            "conclusive": self.conclusive,
        }


def fit_exponent(xs: Sequence[float], ys: Sequence[float]) -> FitResult:
    """Ordinary least squares of log y on log x."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-D and the same length")
    if x.size < 3:
        raise ValueError("need at least three points to fit")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0 else min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return FitResult(float(slope), float(intercept), r2, int(x.size))


@dataclass
class ScanResult:
    experiment: str
    records: list[ExperimentRecord]
    fits: dict[str, FitResult] = field(default_factory=dict)
    skipped: list[dict] = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    timestamp: str = ""

    def to_csv(self) -> str:
        return records_to_csv(self.records)

    def summary(self) -> dict:
        return {
            "experiment": self.experiment,
            "timestamp": self.timestamp,
            "points": len(self.records),
            "fits": {k: v.to_dict() for k, v in self.fits.items()},
            "inconclusive_fits": sorted(k for k, v in self.fits.items() if not v.conclusive),
            "skipped": self.skipped,
            "extra": self.extra,
            "note": "brackets are regression envelopes fixed after a pilot run, not theoretical constants",
        }

    @property
    def all_finite(self) -> bool:
        return all(r.is_finite for r in self.records)


def derive_seed(base_seed: int, name: str, params: Mapping) -> int:
    """Stable 63-bit seed from (base_seed, experiment name, params)."""
    blob = json.dumps([int(base_seed), name, {k: repr(v) for k, v in sorted(params.items())}])
    return int.from_bytes(hashlib.sha256(blob.encode()).digest()[:8], "big") >> 1


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _map(fn: Callable, tasks: Iterable, jobs: int | None):
    tasks = list(tasks)
    if jobs is None or jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def _finish(name: str, outcomes, fits_fn) -> ScanResult:
    stamp = _now()
    records, skipped = [], []
    for out in outcomes:
        if isinstance(out, ExperimentRecord):
            records.append(ExperimentRecord(out.experiment, out.params, out.measured, stamp))
        else:
            skipped.append(out)
    records.sort(key=ExperimentRecord.sort_key)
    result = ScanResult(name, records, skipped=skipped, timestamp=stamp)
    fits_fn(result)
    return result


def _try_fit(result: ScanResult, key: str, xs, ys):
    if len(xs) >= 3:
        result.fits[key] = fit_exponent(xs, ys)
    else:
        result.extra.setdefault("unfitted", []).append(f"{key}: only {len(xs)} points")


def _check_lambdas(lambda_grid):
    grid = [exact_lambda(lam) for lam in lambda_grid]
    if not grid:
        raise ValueError("empty lambda grid")
    for q in grid:
        if not (1 < q and q**3 < 2):
            raise ValueError(f"lambda {float(q)} outside (1, 2^(1/3))")
    return lambda_grid


# --------------------------------------------------------------------------
# cardinality of A_N at the exact pairing N = ceil(e^(4/(lambda-1)))


def pairing_N(lam) -> int:
    q = exact_lambda(lam)
    x = 4 / (q - 1)
    bits = BIGFLOAT_BITS + int(float(x) * 1.4426950408889634) + 64
    with mpmath.workprec(bits):
        return int(mpmath.ceil(mpmath.exp(mpmath.mpf(x.numerator) / x.denominator)))


def cardinality_point(lam) -> ExperimentRecord:
    """#{j : N <= l_j <= 2N} counted exactly from the closed-form terms."""
    params = near_ratio_params(lam)
    N = pairing_N(lam)
    k_lo = first_exponent_at_least(params, N)
    k_hi = first_exponent_at_least(params, 2 * N + 1)
    count = k_hi - k_lo
    window = [near_ratio_term(params, k) for k in range(max(k_lo - 1, params.j0), k_hi + 1)]
    rho = float(min(Fraction(b, a) for a, b in zip(window, window[1:])))
    lam_f = float(params.lam)
    with mpmath.workprec(64):
        log10_N = float(mpmath.log10(N))
    return ExperimentRecord(
        "cardinality-scan",
        {"lambda": lam_f, "rho": rho, "N": N},
        {
            "count_A": count,
            "count_times_lambda_minus_1": count * float(params.lam - 1),
            "first_index": k_lo - params.j0,
            "log10_N": log10_N,
        },
    )


def cardinality_scan(lambda_grid=env.CANONICAL_LAMBDAS, jobs: int | None = None) -> ScanResult:
    _check_lambdas(lambda_grid)

    def fits(result: ScanResult):
        pts = [r for r in result.records if r.measured["count_A"] > 0]
        empty = [r.params["lambda"] for r in result.records if r.measured["count_A"] == 0]
        result.extra["empty_A_N"] = empty
        _try_fit(
            result,
            "count_vs_inverse_lambda_minus_1",
            [1 / (float(exact_lambda(r.params["lambda"])) - 1) for r in pts],
            [r.measured["count_A"] for r in pts],
        )

    return _finish("cardinality-scan", _map(cardinality_point, lambda_grid, jobs), fits)


# --------------------------------------------------------------------------
# H^p lower-bound functional on rescaled sequences


def rescaled_sequence(lam, N: int) -> LacunarySequence:
    """The constructed sequence restarted just below N and run past the support of f_N."""
    return construct_near_ratio_from(lam, N, 4 * N + 2)


def _plateau_blocks(seq: LacunarySequence, N: int) -> list[int]:
    """j with N <= l_j <= 2N whose whole block [l_{j-1}, l_j) sits above N."""
    return [j for j in range(1, len(seq)) if N <= seq[j] <= 2 * N and seq[j - 1] > N]


def sharpness_point(task) -> ExperimentRecord | dict:
    lam, N = task
    seq = rescaled_sequence(lam, N)
    f = extremal_fN(N)
    M = default_grid_size(f)
    p = 1 + 1 / math.log(N)
    A = _plateau_blocks(seq, N)
    params = {"lambda": float(lam), "rho": ratio(seq), "p": p, "N": N, "grid": M}
    if not A:
        return {"params": params, "reason": "no block of A_N lies above N after rescaling"}
    blocks = block_projections(seq, f)
    l1 = np.array([lp_norm(evaluate(blocks[j], M), 1) for j in A])
    gaps = np.array([seq[j] - seq[j - 1] for j in A], dtype=float)
    per_log = l1 / np.log(gaps)
    f_p = lp_norm(evaluate(f, M), p)
    return ExperimentRecord(
        "sharpness-scan",
        params,
        {
            "L": float(np.sqrt(np.sum(l1**2)) / f_p),
            "count_A": len(A),
            "f_norm_p": f_p,
            "block_l1_per_log_gap_max": float(per_log.max()),
            "block_l1_per_log_gap_min": float(per_log.min()),
        },
    )


def sharpness_scan_hp(lambda_grid=env.SHARPNESS_LAMBDAS, N_grid=env.SHARPNESS_NS,
                      jobs: int | None = None) -> ScanResult:
    """L(lambda, N) on the cross {(lambda, max N)} + {(min lambda, N)}.

    The lambda fit runs at the largest N, the log N fit at the smallest lambda,
    where A_N holds the most blocks and its size moves least with N.
    """
    _check_lambdas(lambda_grid)
    if not N_grid or max(N_grid) > 2**13 or min(N_grid) < 2:
        raise ValueError("N grid must be nonempty with 2 <= N <= 2^13")
    n_top = max(N_grid)
    lam_lo = min(lambda_grid, key=lambda v: exact_lambda(v))
    tasks = sorted({(lam, n_top) for lam in lambda_grid} | {(lam_lo, n) for n in N_grid},
                   key=lambda t: (exact_lambda(t[0]), t[1]))

    def fits(result: ScanResult):
        at_top = [r for r in result.records if r.params["N"] == n_top]
        _try_fit(
            result,
            "L_vs_inverse_lambda_minus_1",
            [1 / (float(exact_lambda(r.params["lambda"])) - 1) for r in at_top],
            [r.measured["L"] for r in at_top],
        )
        at_lo = [r for r in result.records if exact_lambda(r.params["lambda"]) == exact_lambda(lam_lo)]
        _try_fit(result, "L_vs_log_N", [math.log(r.params["N"]) for r in at_lo], [r.measured["L"] for r in at_lo])
        result.extra["fixed_N"] = n_top
        result.extra["fixed_lambda"] = float(lam_lo)

    return _finish("sharpness-scan", _map(sharpness_point, tasks, jobs), fits)


# --------------------------------------------------------------------------
# sigma^(1/2) law


def _check_sigma_args(sigma_grid, M: int):
    if M < 4 or M & (M - 1) or M > 2**14:
        raise ValueError("M must be a power of two with 4 <= M <= 2^14")
    if not sigma_grid:
        raise ValueError("empty sigma grid")
    for s in sigma_grid:
        if not 2 <= s <= M // 4:
            raise ValueError(f"sigma={s} outside 2..M/4={M // 4}")


def sigma_point(task) -> ExperimentRecord:
    """R(sigma): the blocks between consecutive terms inside [M, 2M] against ||f_M||_p.

    Block j >= 1 is [l_{j-1}, l_j), so the sigma - 1 gaps l_{j+1} - l_j (j = 0..sigma-2)
    of the dense run are the blocks j = 1..sigma-1.
    """
    s_target, M = task
    seq = sigma_block_example(s_target, M)
    f = extremal_fM(M)
    G = default_grid_size(f)
    p = 1 + 1 / math.log(M)
    blocks = block_projections(seq, f)
    l1 = np.array([lp_norm(evaluate(blocks[j], G), 1) for j in range(1, s_target)])
    f_p = lp_norm(evaluate(f, G), p)
    return ExperimentRecord(
        "sigma-scan",
        {"rho": ratio(seq), "sigma": sigma(seq), "p": p, "M": M, "grid": G},
        {"R": float(np.sqrt(np.sum(l1**2)) / f_p), "f_norm_p": f_p, "blocks": s_target - 1},
    )


def sigma_scan(sigma_grid=env.SIGMA_GRID, M: int = env.SIGMA_M, jobs: int | None = None) -> ScanResult:
    _check_sigma_args(sigma_grid, M)

    def fits(result: ScanResult):
        _try_fit(result, "R_vs_sigma", [r.params["sigma"] for r in result.records],
                 [r.measured["R"] for r in result.records])

    return _finish("sigma-scan", _map(sigma_point, [(s, M) for s in sorted(sigma_grid)], jobs), fits)


# --------------------------------------------------------------------------
# Paley


def paley_quotient(seq: LacunarySequence, f: TrigPoly, M: int | None = None) -> float:
    """(sum_j |f^(l_j)|^2)^(1/2) / ||f||_1 for analytic f."""
    if not f.is_analytic:
        raise ValueError("Paley quotient needs an analytic polynomial (no negative frequencies)")
    num = float(np.linalg.norm(f.coeff(np.asarray(seq.terms))))
    if num == 0:
        return 0.0
    return num / lp_norm(evaluate(f, M), 1)


def paley_quotient_2d(seq1: LacunarySequence, seq2: LacunarySequence, f: TrigPoly2D,
                      shape: tuple[int, int] | None = None) -> float:
    if not f.is_analytic:
        raise ValueError("Paley quotient needs an analytic polynomial (no negative frequencies)")
    t1, t2 = np.asarray(seq1.terms), np.asarray(seq2.terms)
    rows = t1[(t1 >= f.lo[0]) & (t1 < f.lo[0] + f.coeffs.shape[0])] - f.lo[0]
    cols = t2[(t2 >= f.lo[1]) & (t2 < f.lo[1] + f.coeffs.shape[1])] - f.lo[1]
    num = float(np.linalg.norm(f.coeffs[np.ix_(rows, cols)]))
    if num == 0:
        return 0.0
    return num / lp_norm(evaluate_2d(f, shape), 1)


def _paley_point(task) -> ExperimentRecord:
    lam, N = task
    seq = rescaled_sequence(lam, N)
    f = extremal_fN(N)
    G = default_grid_size(f)
    hits = int(np.count_nonzero(f.coeff(np.asarray(seq.terms))))
    return ExperimentRecord(
        "paley-scan",
        {"lambda": float(lam), "rho": ratio(seq), "N": N, "grid": G},
        {"Q": paley_quotient(seq, f, G), "terms_in_support": hits},
    )


def _paley_point_2d(task) -> ExperimentRecord:
    lam, N = task
    f = extremal_fN(N)
    seq = construct_near_ratio_upto(lam, f.freq_hi)
    G = default_grid_size(f, env.PALEY_2D_OVERSAMPLING)
    q1 = paley_quotient(seq, f, G)
    q2 = paley_quotient_2d(seq, seq, TrigPoly2D.outer(f, f), (G, G))
    return ExperimentRecord(
        "paley-scan-2d",
        {"lambda": float(lam), "rho": ratio(seq), "N": N, "grid": G},
        {"Q1": q1, "Q1_squared": q1 * q1, "Q2": q2, "factorization_error": abs(q2 - q1 * q1) / (q1 * q1)},
    )


def paley_scan(lambda_grid=env.CANONICAL_LAMBDAS, N: int = env.PALEY_N, two_d: bool = False,
               jobs: int | None = None) -> ScanResult:
    """Paley quotient of f_N over lambda.

    The two-variable mode uses f_N(x) f_N(y) at small N with the constructed
    sequence on both axes; its quotient should be the square of the 1-D one.
    """
    _check_lambdas(lambda_grid)
    if two_d:
        if N > 2**6:
            raise ValueError("two-variable mode is limited to N <= 64")
    elif N > 2**13:
        raise ValueError("N must be at most 2^13")
    tasks = [(lam, N) for lam in lambda_grid]
    x = [1 / (float(exact_lambda(lam)) - 1) for lam in lambda_grid]

    def fits(result: ScanResult):
        key = "Q2" if two_d else "Q"
        by_lam = {r.params["lambda"]: r.measured[key] for r in result.records}
        _try_fit(result, f"{key}_vs_inverse_lambda_minus_1", x, [by_lam[float(lam)] for lam in lambda_grid])
        if two_d:
            result.extra["max_factorization_error"] = max(r.measured["factorization_error"] for r in result.records)

    name = "paley-scan-2d" if two_d else "paley-scan"
    return _finish(name, _map(_paley_point_2d if two_d else _paley_point, tasks, jobs), fits)


# --------------------------------------------------------------------------
# Dirichlet blocks of f_N


def _sin_pi(r: np.ndarray, q: int) -> np.ndarray:
    """sin(pi r / q) for integer r, with the argument folded into [0, pi/2]."""
    r = r % (2 * q)
    sign = np.where(r >= q, -1.0, 1.0)
    r = r % q
    return sign * np.sin(np.pi * np.minimum(r, q - r) / q)


def _dirichlet_samples(a: int, b: int, M: int) -> np.ndarray:
    """sum_{n=a}^{b-1} e^{inx} on the M-point grid, in the cancellation-free sine form.

    Phases are reduced in integer arithmetic before any rounding.
    """
    k = np.arange(1, M, dtype=np.int64)
    L = b - a
    out = np.empty(M, dtype=complex)
    # x_k (a + (L-1)/2) = 2 pi k (2a + L - 1) / (2M)
    phase = 2 * np.pi * ((k * (2 * a + L - 1)) % (2 * M)) / (2 * M)
    out[1:] = np.exp(1j * phase) * _sin_pi(k * L, M) / _sin_pi(k, M)
    out[0] = L
    return out


def dirichlet_block_check(seq: LacunarySequence, N: int) -> dict:
    """Compare Delta_j(f_N) with the explicit exponential sum over its block.

    Admissible j have the whole block [l_{j-1}, l_j) inside the plateau
    [N, 3N+2] of f_N, with l_{j-1} > N.
    """
    f = extremal_fN(N)
    M = default_grid_size(f)
    admissible = [j for j in range(1, len(seq)) if seq[j - 1] > N and seq[j] - 1 <= 3 * N + 2]
    blocks = block_projections(seq, f)
    coeff_err = sample_err = 0.0
    for j in admissible:
        a, b = seq[j - 1], seq[j]
        g = blocks[j]
        if g.freq_lo != a or g.freq_hi != b - 1:
            coeff_err = math.inf
            continue
        coeff_err = max(coeff_err, float(np.max(np.abs(g.coeffs - 1))))
        sample_err = max(sample_err, float(np.max(np.abs(evaluate(g, M).values - _dirichlet_samples(a, b, M)))))
    return {"admissible": admissible, "coefficient_error": coeff_err, "sample_error": sample_err}


# --------------------------------------------------------------------------
# Zygmund and Lambda(p)


def zygmund_check(seq: LacunarySequence, f: TrigPoly, M: int | None = None) -> float:
    """(sum_j |f^(l_j)|^2)^(1/2) / (1 + mean |f| log^(1/2)(e + |f|))."""
    check_coverage(seq, f)
    if f.is_zero:
        return 0.0
    num = float(np.linalg.norm(f.coeff(np.asarray(seq.terms))))
    return num / zygmund_functional(evaluate(f, M))


def zygmund_scan(sigma_grid=(4, 8, 16), M: int = 2**10, jobs: int | None = None) -> ScanResult:
    _check_sigma_args(sigma_grid, M)

    def point(s):
        seq = sigma_block_example(s, M)
        f = extremal_fM(M)
        q = zygmund_check(seq, f)
        return ExperimentRecord(
            "zygmund",
            {"rho": ratio(seq), "sigma": sigma(seq), "M": M, "grid": default_grid_size(f)},
            {"quotient": q, "quotient_over_sqrt_sigma": q / math.sqrt(sigma(seq))},
        )

    def fits(result: ScanResult):
        _try_fit(result, "quotient_vs_sigma", [r.params["sigma"] for r in result.records],
                 [r.measured["quotient"] for r in result.records])
        result.extra["envelope"] = env.ZYGMUND_FACTOR

    return _finish("zygmund", _map(point, sorted(sigma_grid), jobs), fits)


def lambda_p_check(seq: LacunarySequence, p_grid=env.LAMBDA_P_PS, trials: int = env.TRIALS,
                   base_seed: int = DEFAULT_SEED, jobs: int | None = None) -> ScanResult:
    """max over random g with spectrum in the sequence of ||g||_p / (sigma^(1/2) sqrt(p) ||g||_2)."""
    if not p_grid:
        raise ValueError("empty p grid")
    for p in p_grid:
        if not p >= 2:
            raise ValueError(f"p must be >= 2, got {p}")
    s = sigma(seq)
    freqs = np.asarray(seq.terms)
    seed = derive_seed(base_seed, "lambda-p", {"terms": seq.terms, "trials": trials})
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal((trials, freqs.size)) + 1j * rng.standard_normal((trials, freqs.size))
    width = int(freqs[-1] - freqs[0] + 1)
    M = default_grid_size(TrigPoly(int(freqs[0]), np.ones(width)))

    def samples(t):
        c = np.zeros(width, dtype=complex)
        c[freqs - freqs[0]] = coeffs[t]
        g = TrigPoly(int(freqs[0]), c)
        return evaluate(g, M), float(np.linalg.norm(coeffs[t]))

    evaluated = _map(samples, range(trials), jobs)
    records = []
    for p in p_grid:
        q = np.array([lp_norm(v, p) / (math.sqrt(s) * math.sqrt(p) * l2) for v, l2 in evaluated])
        records.append(
            ExperimentRecord(
                "lambda-p",
                {"rho": ratio(seq), "sigma": s, "p": float(p), "grid": M, "seed": seed},
                {"max_quotient": float(q.max()), "mean_quotient": float(q.mean())},
            )
        )

    def fits(result: ScanResult):
        result.extra["envelope"] = env.LAMBDA_P_MAX

    return _finish("lambda-p", records, fits)


# --------------------------------------------------------------------------
# weak type (1, 1) with the (rho - 1)^(1/2) normalisation


def weak_type_ratio(seq: LacunarySequence, f: TrigPoly, analytic_mode: bool = True, M: int | None = None) -> float:
    """||S f||_{L^{1,oo}} (rho - 1)^(1/2) / (||f||_{H^1} or the L log^(1/2) L functional).

    In analytic mode the denominator is ||f||_{H^1} = 2 ||f||_1.
    """
    if analytic_mode and not f.is_analytic:
        raise ValueError("analytic mode needs freq_lo >= 0")
    if M is None:
        M = default_grid_size(f)
    S = square_function(seq, f, M).samples
    fs = evaluate(f, M)
    den = 2 * lp_norm(fs, 1) if analytic_mode else zygmund_functional(fs)
    return weak_l1(S) / den * math.sqrt(ratio(seq) - 1)


def weak_type_scan(lambda_grid=env.CANONICAL_LAMBDAS, N: int = env.PALEY_N, jobs: int | None = None) -> ScanResult:
    _check_lambdas(lambda_grid)
    if N > 2**13:
        raise ValueError("N must be at most 2^13")

    def point(lam):
        seq = rescaled_sequence(lam, N)
        f = extremal_fN(N)
        M = default_grid_size(f)
        return ExperimentRecord(
            "weak-type",
            {"lambda": float(lam), "rho": ratio(seq), "N": N, "grid": M},
            {
                "ratio_analytic": weak_type_ratio(seq, f, True, M),
                "ratio_llogl": weak_type_ratio(seq, f, False, M),
            },
        )

    def fits(result: ScanResult):
        x = [1 / (float(exact_lambda(r.params["lambda"])) - 1) for r in result.records]
        _try_fit(result, "ratio_vs_inverse_lambda_minus_1", x, [r.measured["ratio_analytic"] for r in result.records])
        result.extra["envelope"] = env.WEAK_TYPE_MAX
        result.extra["note_flatness"] = "a flat law has no variance to explain, so r^2 is not meaningful here"

    return _finish("weak-type", _map(point, lambda_grid, jobs), fits)


# --------------------------------------------------------------------------
# L^p norms of S for p > 2


def signed_block_sum(seq: LacunarySequence, degree: int, seed: int) -> TrigPoly:
    """sum_j r_j Delta_j applied to the Dirichlet kernel on 0..degree."""
    n = np.arange(degree + 1)
    signs = draw_signs(len(seq) + 1, 1, seed)[0].astype(float)
    return TrigPoly(0, signs[block_index(seq, n)])


def dual_ratio(seq: LacunarySequence, f: TrigPoly, p_grid: Sequence[float], M: int | None = None) -> np.ndarray:
    """||S f||_p / ||f||_p for each p."""
    if M is None:
        M = default_grid_size(f)
    S = square_function(seq, f, M).samples
    fs = evaluate(f, M)
    return np.array([lp_norm(S, p) / lp_norm(fs, p) for p in p_grid])


def dual_range_scan(seqs: Sequence[LacunarySequence], p_grid=env.DUAL_PS, trials: int = env.TRIALS,
                    base_seed: int = DEFAULT_SEED, degree: int = 1023, jobs: int | None = None) -> ScanResult:
    """max over random candidates of ||S f||_p / ||f||_p per (sequence, p).

    Candidates alternate between complex Gaussian analytic polynomials and
    random-sign block sums of the Dirichlet kernel.
    """
    if not p_grid:
        raise ValueError("empty p grid")
    for p in p_grid:
        if not p > 2:
            raise ValueError(f"p must exceed 2, got {p}")
    for seq in seqs:
        if seq.max_term <= degree:
            raise ValueError(f"sequence ending at {seq.max_term} does not cover degree {degree}")
    p_grid = sorted(p_grid)

    def task(args):
        i, t = args
        seed = derive_seed(base_seed, "dual-scan", {"seq": i, "trial": t})
        f = random_analytic(degree, seed) if t % 2 == 0 else signed_block_sum(seqs[i], degree, seed)
        return dual_ratio(seqs[i], f, p_grid)

    tasks = [(i, t) for i in range(len(seqs)) for t in range(trials)]
    ratios = np.array(_map(task, tasks, jobs)).reshape(len(seqs), trials, len(p_grid))
    best = ratios.max(axis=1)
    M = default_grid_size(TrigPoly(0, np.ones(degree + 1)))
    records = [
        ExperimentRecord(
            "dual-scan",
            {"rho": ratio(seq), "sigma": sigma(seq), "p": float(p), "grid": M},
            {"max_ratio": float(best[i, k]), "sequence_index": i},
        )
        for i, seq in enumerate(seqs)
        for k, p in enumerate(p_grid)
    ]

    def fits(result: ScanResult):
        for i in range(len(seqs)):
            _try_fit(result, f"max_ratio_vs_p[{i}]", p_grid, best[i])
        result.extra["max_sequence_factor"] = [float(best[:, k].max() / best[:, k].min()) for k in range(len(p_grid))]
        result.extra["p_grid"] = [float(p) for p in p_grid]

    return _finish("dual-scan", records, fits)


# --------------------------------------------------------------------------
# Khintchine


def _row_norms(rows: np.ndarray, p: float) -> np.ndarray:
    a = np.abs(rows)
    scale = a.max(axis=1, keepdims=True)
    scale[scale == 0] = 1.0
    return scale[:, 0] * np.mean((a / scale) ** p, axis=1) ** (1.0 / p)


def khintchine_check(seqs: Sequence[LacunarySequence], p_grid=env.KHINTCHINE_PS, trials: int = env.TRIALS,
                     draws: int = env.SIGN_DRAWS, base_seed: int = DEFAULT_SEED, degree: int = 600,
                     jobs: int | None = None) -> ScanResult:
    """E_omega ||sum_j r_j Delta_j f||_p / ||S f||_p over random f, with the exact L^2
    identity ||T_omega f||_2^2 = sum_j ||Delta_j f||_2^2 checked draw by draw."""
    for p in p_grid:
        if not 1 <= p <= 2:
            raise ValueError(f"p must lie in [1, 2], got {p}")
    for seq in seqs:
        if seq.max_term <= degree:
            raise ValueError(f"sequence ending at {seq.max_term} does not cover degree {degree}")

    def task(args):
        i, t = args
        seed = derive_seed(base_seed, "khintchine", {"seq": i, "trial": t})
        f = random_analytic(2 * degree, seed) if t % 2 else random_poly(-degree, degree, seed)
        blocks = block_projections(seqs[i], f)
        M = default_grid_size(f)
        B = np.vstack([evaluate(g, M).values for g in blocks.values()])
        S = np.sqrt(np.sum(np.abs(B) ** 2, axis=0))
        T = draw_signs(B.shape[0], draws, seed).astype(float) @ B
        energy = sum(float(np.sum(np.abs(g.coeffs) ** 2)) for g in blocks.values())
        l2_err = float(np.max(np.abs(np.mean(np.abs(T) ** 2, axis=1) - energy)) / energy)
        return [float(np.mean(_row_norms(T, p)) / lp_norm(S, p)) for p in p_grid], l2_err

    tasks = [(i, t) for i in range(len(seqs)) for t in range(trials)]
    outs = _map(task, tasks, jobs)
    q = np.array([o[0] for o in outs]).reshape(len(seqs), trials, len(p_grid))
    l2 = np.array([o[1] for o in outs]).reshape(len(seqs), trials)
    records = [
        ExperimentRecord(
            "khintchine",
            {"rho": ratio(seq), "sigma": sigma(seq), "p": float(p)},
            {
                "min_mean_ratio": float(q[i, :, k].min()),
                "max_mean_ratio": float(q[i, :, k].max()),
                "l2_identity_error": float(l2[i].max()),
                "sequence_index": i,
            },
        )
        for i, seq in enumerate(seqs)
        for k, p in enumerate(p_grid)
    ]

    def fits(result: ScanResult):
        result.extra["bracket"] = list(env.KHINTCHINE_BRACKET)
        result.extra["draws"] = draws
        result.extra["trials"] = trials

    return _finish("khintchine", records, fits)
