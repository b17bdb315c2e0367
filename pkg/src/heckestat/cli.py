"""Command-line front end.

Examples::

    heckestat schur eval --n 3 --kappa 2,1 --angles 0.1,0.2
    heckestat hecke expand --n 3 --kappa 1,0
    heckestat sample --n 3 --measure plancherel --prime 5 --samples 1000
    heckestat experiment signs --n 3 --kappa 1,1 --X 100000 --seed 7

Artifacts go to ``--output`` or, by default, into ``$HECKESTAT_OUTPUT_DIR``
(``./heckestat-output`` if unset).  Exit status: 0 success, 1 a checked
property failed, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from heckestat.experiments import (
    build_form,
    negative_prime_reciprocal_sum,
    nonvanishing_density_curve,
    sieve_report,
    sign_summary,
    total_variation,
    vertical_distribution_histogram,
)
from heckestat.hecke import (
    ForcedZeros,
    SatakePoint,
    expansion_csv,
    hecke_product_expansion,
)
from heckestat.measures import (
    MeasureSpec,
    PlancherelWeight,
    chunk_plan,
    chunk_rng,
    gram_matrix,
    mc_integrate,
    sample_angles,
    small_value_bound,
    small_value_measure,
)
from heckestat.primes import is_prime
from heckestat.symfunc import (
    DegeneratePointError,
    KappaIndex,
    kappas_up_to,
    partition_from_kappa,
    schur_eval_determinant,
    schur_eval_tableaux,
)

DEFAULT_SEED = 20240601
OUTPUT_ENV = "HECKESTAT_OUTPUT_DIR"
# flags that change how a run executes but never what it computes
EXECUTION_ONLY = ("output", "workers", "func", "format")


class ConfigError(ValueError):
    pass


class CheckFailed(Exception):
    pass


# -- parsing helpers ---------------------------------------------------------------


def parse_kappa(text: str, n: int) -> KappaIndex:
    try:
        parts = tuple(int(t) for t in text.split(",")) if text.strip() else ()
    except ValueError as exc:
        raise ConfigError(f"kappa must be comma-separated integers, got {text!r}") from exc
    if len(parts) != n - 1:
        raise ConfigError(f"kappa needs n-1 = {n - 1} entries, got {len(parts)}")
    if any(k < 0 for k in parts):
        raise ConfigError("kappa entries must be non-negative")
    return KappaIndex(parts, n)


def parse_kappa_list(text: str, n: int) -> list[KappaIndex]:
    return [parse_kappa(chunk, n) for chunk in text.split(";")]


def parse_floats(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc
    if not all(math.isfinite(v) for v in vals):
        raise ConfigError("numbers must be finite")
    return vals


def parse_ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from exc


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def measure_from_args(args) -> MeasureSpec:
    kind = args.measure
    if kind == "plancherel":
        _require(args.prime is not None and args.prime >= 2 and is_prime(args.prime), "--prime must be a prime")
        return MeasureSpec("plancherel", args.n, args.prime)
    return MeasureSpec(kind, args.n)


# -- output ---------------------------------------------------------------------------


def output_path(args, default_name: str) -> Path:
    if args.output:
        return Path(args.output)
    return Path(os.environ.get(OUTPUT_ENV, "heckestat-output")) / default_name


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def dump_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def run_config(args, argv_command: str) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in EXECUTION_ONLY}
    cfg["command"] = argv_command
    return cfg


def report(args, command: str, results: dict, tolerances: dict, passed: bool) -> dict:
    return {
        "config": run_config(args, command),
        "seed": args.seed,
        "results": results,
        "tolerances": tolerances,
        "passed": bool(passed),
    }


def _finish(args, command: str, name: str, rep: dict, summary: str) -> int:
    path = output_path(args, name)
    write_text(path, dump_json(rep))
    print(f"{command}: {summary} [{'PASS' if rep['passed'] else 'FAIL'}] -> {path}")
    if not rep["passed"]:
        raise CheckFailed(summary)
    return 0


# -- commands -----------------------------------------------------------------------


def cmd_schur_eval(args) -> int:
    kappa = parse_kappa(args.kappa, args.n)
    angles = parse_floats(args.angles)
    _require(len(angles) in (args.n - 1, args.n), f"--angles needs {args.n - 1} or {args.n} values")
    point = SatakePoint.from_partial(angles[: args.n - 1])
    lam = partition_from_kappa(kappa)
    if args.method == "determinant":
        try:
            value = schur_eval_determinant(lam, point.values)
        except DegeneratePointError as exc:
            raise ConfigError(f"degenerate point for the determinant method ({exc}); use --method tableaux") from exc
    else:
        value = complex(schur_eval_tableaux(lam, point.values))
    value = complex(value)
    text = _format_complex(value)
    if args.output:
        write_text(Path(args.output), dump_json({
            "config": run_config(args, "schur eval"),
            "angles": list(point.angles),
            "value": {"re": value.real, "im": value.imag},
        }))
    print(text)
    return 0


def _format_complex(z: complex, tol: float = 1e-12) -> str:
    re = 0.0 if abs(z.real) < tol else z.real
    im = 0.0 if abs(z.imag) < tol else z.imag
    re_s = f"{re:.12g}"
    if im == 0.0:
        return re_s
    return f"{re_s}{'+' if im >= 0 else '-'}{abs(im):.12g}j"


def cmd_hecke_expand(args) -> int:
    kappa = parse_kappa(args.kappa, args.n)
    other = parse_kappa(args.kappa2, args.n) if args.kappa2 else kappa
    expansion = hecke_product_expansion(kappa, other)
    path = output_path(args, f"hecke_expand_n{args.n}_{kappa.label()}_x_{other.label()}.csv")
    write_text(path, expansion_csv(expansion))
    terms = " + ".join(f"{d}*S{xi}" for xi, d in expansion.items())
    print(f"S{kappa}*S{other} = {terms} -> {path}")
    return 0


def cmd_sample(args) -> int:
    spec = measure_from_args(args)
    _require(args.samples >= 1, "--samples must be positive")
    rows = []
    offset = 0
    for k, size in enumerate(chunk_plan(args.samples)):
        angles = sample_angles(spec, size, chunk_rng(args.seed, k, "sample"))
        for i, row in enumerate(angles):
            rows.append([args.seed, offset + i, *map(float, row)])
        offset += size
    header = ["seed", "index"] + [f"theta_{j}" for j in range(1, args.n + 1)]
    path = output_path(args, f"samples_{spec.kind}_n{args.n}_seed{args.seed}.csv")
    write_text(path, dump_csv(header, rows))
    print(f"sample: {args.samples} points from {spec.kind} (n={args.n}) -> {path}")
    return 0


def cmd_signs(args) -> int:
    kappa = parse_kappa(args.kappa, args.n)
    _require(kappa.is_palindromic, "signs need a palindromic kappa (real coefficients)")
    _require(args.X >= 2, "--X must be >= 2")
    form = build_form(measure_from_args(args), args.seed, args.X)
    summary = sign_summary(form, kappa, args.X, workers=args.workers)
    frac = summary.positive_fraction
    change_ratio = summary.sign_changes / summary.nonzero if summary.nonzero else 0.0
    passed = args.band[0] <= frac <= args.band[1] and change_ratio >= args.min_change_ratio
    rep = report(
        args,
        "experiment signs",
        {**summary.to_dict(), "positive_fraction": frac, "sign_change_ratio": change_ratio},
        {"positive_fraction_band": list(args.band), "min_sign_change_ratio": args.min_change_ratio},
        passed,
    )
    return _finish(
        args, "experiment signs", f"signs_n{args.n}_{kappa.label()}_X{args.X}_seed{args.seed}.json", rep,
        f"positive fraction {frac:.4f}, sign-change ratio {change_ratio:.4f}",
    )


def cmd_nonvanishing(args) -> int:
    kappa = parse_kappa(args.kappa, args.n)
    _require(args.X >= 2, "--X must be >= 2")
    checkpoints = parse_ints(args.checkpoints) if args.checkpoints else [args.X]
    _require(all(1 <= c <= args.X for c in checkpoints), "checkpoints must lie in [1, X]")
    forced = ForcedZeros.parse(args.forced_zeros)
    form = build_form(measure_from_args(args), args.seed, args.X, forced)
    curve = nonvanishing_density_curve(form, kappa, args.X, checkpoints)
    sieve = sieve_report(form, kappa, args.X)
    flags = sieve.hypothesis_flags
    in_band = all(args.band[0] <= row["ratio"] <= args.band[1] for row in curve)
    passed = in_band and sieve.cover_holds and flags["omega1"] and flags["omega2"] and flags["R"]
    stem = f"nonvanishing_n{args.n}_{kappa.label()}_X{args.X}_seed{args.seed}"
    if args.format == "csv":
        header = ["X", "nonzero_count", "sieve_product", "ratio"]
        path = output_path(args, stem + ".csv")
        write_text(path, dump_csv(header, [[r[h] for h in header] for r in curve]))
        print(f"experiment nonvanishing: curve with {len(curve)} rows -> {path}")
        if not passed:
            raise CheckFailed("nonvanishing checks failed")
        return 0
    rep = report(
        args, "experiment nonvanishing", {"curve": curve, "sieve": sieve.to_dict()},
        {"ratio_band": list(args.band)}, passed,
    )
    ratios = ", ".join(f"{r['ratio']:.4f}" for r in curve)
    return _finish(args, "experiment nonvanishing", stem + ".json", rep,
                   f"ratios [{ratios}], cover {'holds' if sieve.cover_holds else 'FAILS'}")


def cmd_small_values(args) -> int:
    kappa = parse_kappa(args.kappa, args.n)
    deltas = parse_floats(args.deltas)
    _require(all(d > 0 for d in deltas), "--deltas must be positive")
    _require(args.samples >= 2, "--samples must be >= 2")
    est = small_value_measure(kappa, deltas, args.samples, args.seed, workers=args.workers)
    rows = []
    passed = True
    for d, v, e in zip(deltas, np.atleast_1d(est.value), np.atleast_1d(est.stderr)):
        bound = small_value_bound(d, args.n)
        ok = bool(v <= bound + 3 * e)
        passed &= ok
        rows.append({"delta": d, "fraction": float(v), "stderr": float(e), "bound": bound, "passed": ok})
    rep = report(args, "experiment small-values", {"rows": rows, "samples": est.samples},
                 {"rule": "fraction <= delta**(1/2**n) + 3*stderr"}, passed)
    return _finish(args, "experiment small-values", f"small_values_n{args.n}_{kappa.label()}_seed{args.seed}.json",
                   rep, ", ".join(f"delta={r['delta']:g}: {r['fraction']:.3g} <= {r['bound']:.3g}" for r in rows))


def default_gram_kappas(n: int) -> list[KappaIndex]:
    if n == 3:
        return [KappaIndex(k, 3) for k in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2)]]
    return list(kappas_up_to(n, 1))


def cmd_orthonormality(args) -> int:
    kappas = parse_kappa_list(args.kappas, args.n) if args.kappas else default_gram_kappas(args.n)
    _require(args.samples >= 2, "--samples must be >= 2")
    gram, err = gram_matrix(kappas, args.samples, args.seed, workers=args.workers)
    dev = np.abs(gram - np.eye(len(kappas)))
    tol = np.maximum(3 * err, args.floor)
    passed = bool(np.all(dev <= tol))
    rep = report(
        args, "experiment orthonormality",
        {
            "kappas": [list(k.kappa) for k in kappas],
            "gram_re": gram.real.tolist(),
            "gram_im": gram.imag.tolist(),
            "stderr": err.tolist(),
            "max_deviation": float(dev.max()),
        },
        {"rule": "|G - I| <= max(3*stderr, floor)", "floor": args.floor},
        passed,
    )
    return _finish(args, "experiment orthonormality", f"orthonormality_n{args.n}_seed{args.seed}.json", rep,
                   f"max |G - I| = {dev.max():.2e}")


def cmd_plancherel_norm(args) -> int:
    primes = parse_ints(args.primes)
    _require(all(is_prime(p) for p in primes), "--primes must be primes")
    est = mc_integrate(PlancherelWeight(primes), MeasureSpec("sato-tate", args.n), args.samples, args.seed,
                       workers=args.workers)
    vals, errs = np.atleast_1d(est.value), np.atleast_1d(est.stderr)
    rows = [{"p": p, "mean_weight": float(v), "stderr": float(e), "passed": bool(abs(v - 1) <= 3 * e)}
            for p, v, e in zip(primes, vals, errs)]
    passed = all(r["passed"] for r in rows)
    rep = report(args, "experiment plancherel-norm", {"rows": rows, "samples": est.samples},
                 {"rule": "|E_ST[w_p] - 1| <= 3*stderr"}, passed)
    return _finish(args, "experiment plancherel-norm", f"plancherel_norm_n{args.n}_seed{args.seed}.json", rep,
                   ", ".join(f"p={r['p']}: {r['mean_weight']:.5f}" for r in rows))


def cmd_vertical(args) -> int:
    kappa = parse_kappa(args.kappa, args.n)
    _require(args.bins >= 2, "--bins must be >= 2")
    _require(args.prime is not None and is_prime(args.prime), "--prime must be a prime")
    st = vertical_distribution_histogram(MeasureSpec("sato-tate", args.n), kappa, args.bins, args.samples, args.seed)
    pl = vertical_distribution_histogram(MeasureSpec("plancherel", args.n, args.prime), kappa, args.bins,
                                         args.samples, args.seed + 1)
    tv = total_variation(st, pl)
    passed = args.max_tv is None or tv < args.max_tv
    rep = report(args, "experiment vertical",
                 {"sato_tate": st.to_dict(), "plancherel": pl.to_dict(), "total_variation": tv},
                 {"max_total_variation": args.max_tv}, passed)
    return _finish(args, "experiment vertical", f"vertical_n{args.n}_{kappa.label()}_p{args.prime}_seed{args.seed}.json",
                   rep, f"TV(Sato-Tate, Plancherel p={args.prime}) = {tv:.4f}")


def cmd_negative_primes(args) -> int:
    kappa = parse_kappa(args.kappa, args.n)
    _require(args.X >= 3, "--X must be >= 3")
    form = build_form(measure_from_args(args), args.seed, args.X)
    value = negative_prime_reciprocal_sum(form, kappa, args.X)
    loglog = math.log(math.log(args.X))
    passed = value >= args.min_constant * loglog
    rep = report(args, "experiment negative-primes",
                 {"negative_prime_sum": value, "loglogX": loglog, "ratio": value / loglog},
                 {"min_constant": args.min_constant}, passed)
    return _finish(args, "experiment negative-primes",
                   f"negative_primes_n{args.n}_{kappa.label()}_X{args.X}_seed{args.seed}.json", rep,
                   f"sum = {value:.4f} = {value / loglog:.3f} * loglog X")


# -- argument parser ----------------------------------------------------------------


def _positive_int(text: str) -> int:
    try:
        v = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {v}")
    return v


def _rank(text: str) -> int:
    v = _positive_int(text)
    if not 2 <= v <= 8:
        raise argparse.ArgumentTypeError("rank must be between 2 and 8")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _band(text: str) -> tuple[float, float]:
    lo, hi = (float(t) for t in text.split(","))
    if not lo <= hi:
        raise argparse.ArgumentTypeError("band must be lo,hi with lo <= hi")
    return (lo, hi)


FORM_MEASURES = ("sato-tate", "plancherel", "plancherel-local")


def _common(p: argparse.ArgumentParser, *, measures: tuple[str, ...] = (), workers: bool = False) -> None:
    p.add_argument("--n", type=_rank, default=3, help="rank (number of Satake parameters)")
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--output", help="output file (default: $%s/<auto name>)" % OUTPUT_ENV)
    if measures:
        p.add_argument("--measure", choices=measures, default="sato-tate")
        p.add_argument("--prime", type=_positive_int, help="prime for --measure plancherel")
    if workers:
        p.add_argument("--workers", type=_positive_int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heckestat", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="group", required=True)

    schur = sub.add_parser("schur", help="Schur polynomial evaluation").add_subparsers(dest="action", required=True)
    p = schur.add_parser("eval", help="evaluate S_kappa at a Satake point given by angles")
    _common(p)
    p.add_argument("--kappa", required=True)
    p.add_argument("--angles", required=True, help="n-1 (or n; the last is recomputed) angles in radians")
    p.add_argument("--method", choices=("tableaux", "determinant"), default="tableaux")
    p.set_defaults(func=cmd_schur_eval)

    hecke = sub.add_parser("hecke", help="Hecke structure constants").add_subparsers(dest="action", required=True)
    p = hecke.add_parser("expand", help="expand S_kappa * S_kappa2 (default kappa2 = kappa) as CSV")
    _common(p)
    p.add_argument("--kappa", required=True)
    p.add_argument("--kappa2")
    p.set_defaults(func=cmd_hecke_expand)

    p = sub.add_parser("sample", help="dump Satake angle samples as CSV")
    _common(p, measures=("sato-tate", "plancherel", "torus"))
    p.add_argument("--samples", type=_positive_int, default=1000)
    p.set_defaults(func=cmd_sample)

    exp = sub.add_parser("experiment", help="statistical experiments with JSON reports").add_subparsers(
        dest="action", required=True
    )
    p = exp.add_parser("signs", help="sign equidistribution and sign changes")
    _common(p, measures=FORM_MEASURES, workers=True)
    p.add_argument("--kappa", default="1,1")
    p.add_argument("--X", type=_positive_int, default=100_000)
    p.add_argument("--band", type=_band, default=(0.45, 0.55))
    p.add_argument("--min-change-ratio", type=float, default=0.1)
    p.set_defaults(func=cmd_signs)

    p = exp.add_parser("nonvanishing", help="nonvanishing count against the sieve product")
    _common(p, measures=FORM_MEASURES)
    p.add_argument("--kappa", default="1,0")
    p.add_argument("--X", type=_positive_int, default=100_000)
    p.add_argument("--forced-zeros", default="3mod4", help="none | all | 2,3 | 3mod4 | >1000, optional +powers")
    p.add_argument("--checkpoints", help="comma-separated X values (default: X)")
    p.add_argument("--band", type=_band, default=(0.5, 2.0))
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_nonvanishing)

    p = exp.add_parser("small-values", help="measure of the small-value set of S_kappa on the full torus")
    _common(p, workers=True)
    p.add_argument("--kappa", default="1,0")
    p.add_argument("--deltas", default="0.1,0.01,0.001")
    p.add_argument("--samples", type=_positive_int, default=1_000_000)
    p.set_defaults(func=cmd_small_values)

    p = exp.add_parser("orthonormality", help="Gram matrix of S_kappa under Sato-Tate")
    _common(p, workers=True)
    p.add_argument("--kappas", help="semicolon-separated kappas, e.g. '0,0;1,0;0,1'")
    p.add_argument("--samples", type=_positive_int, default=1_000_000)
    p.add_argument("--floor", type=float, default=5e-3)
    p.set_defaults(func=cmd_orthonormality)

    p = exp.add_parser("plancherel-norm", help="E_ST[w_p] = 1 check")
    _common(p, workers=True)
    p.add_argument("--primes", default="2,3,5,101")
    p.add_argument("--samples", type=_positive_int, default=1_000_000)
    p.set_defaults(func=cmd_plancherel_norm)

    p = exp.add_parser("vertical", help="histogram of A(p^kappa) under Plancherel vs Sato-Tate")
    _common(p)
    p.add_argument("--kappa", default="1,1")
    p.add_argument("--prime", type=_positive_int, default=1_000_003)
    p.add_argument("--bins", type=_positive_int, default=20)
    p.add_argument("--samples", type=_positive_int, default=100_000)
    p.add_argument("--max-tv", type=float, default=0.02)
    p.set_defaults(func=cmd_vertical)

    p = exp.add_parser("negative-primes", help="sum of 1/p over primes with Re A(p^kappa) < 0")
    _common(p, measures=FORM_MEASURES)
    p.add_argument("--kappa", default="1,0")
    p.add_argument("--X", type=_positive_int, default=1_000_000)
    p.add_argument("--min-constant", type=float, default=0.2)
    p.set_defaults(func=cmd_negative_primes)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "measure", None) == "plancherel" and getattr(args, "prime", None) is None:
        parser.error("--measure plancherel requires --prime")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"heckestat: error: {exc}", file=sys.stderr)
        return 2
    except CheckFailed:
        return 1
    except ValueError as exc:
        print(f"heckestat: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
