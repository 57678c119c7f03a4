"""Command-line interface.

Subcommands: ``simulate``, ``returns``, ``tails``, ``spearman``,
``copula-gof``, ``estimate-alpha``, ``validate``, ``gen-synthetic``.  Global
flags ``--seed``, ``--config``, ``--out-dir`` and ``--format`` apply to all
of them; flag values override config-file keys.  All outputs are
deterministic for a fixed seed and config: running a subcommand twice
produces byte-identical files.

Exit codes: 0 success, 1 usage error, 2 data error, 3 validation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import alpha as al
from .dependence import gauss_copula_gof, pseudo_observations
from .errors import DataError, DomainError, TransformRangeError, UnsupportedSideError
from .ou import OUParams, simulate_stationary
from .pipeline import (
    AnalysisConfig,
    PriceSeries,
    gen_synthetic,
    load_csv,
    log_returns,
    rarefy_pairs,
    run_tail_report,
    simulate_dataset,
    spearman_profile,
)
from .rng import RngSeed
from .transform import PaperTransform, transform_from_dict
from .validation import ValidationBudget, validate_theorems

_USAGE_EXIT = 1
_DATA_EXIT = 2
_VALIDATION_EXIT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(_USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _write_json(path: Path, obj):
    _write_text(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _tsv(rows, header: str | None = None) -> str:
    lines = [] if header is None else [f"# {header}"]
    for row in rows:
        lines.append("\t".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def _int_list(text: str) -> list[int]:
    return [int(part) for part in str(text).split(",") if part.strip()]


def _override_config(cfg: AnalysisConfig, **overrides) -> AnalysisConfig:
    return AnalysisConfig.from_dict({**cfg.to_dict(), **overrides})


def _load_config(args) -> AnalysisConfig:
    if args.config:
        with open(args.config) as fh:
            cfg = AnalysisConfig.from_dict(json.load(fh))
    else:
        cfg = AnalysisConfig()
    if args.seed is not None:
        cfg = _override_config(cfg, seed=args.seed, stream_id=0)
    return cfg


def _resolve_transform(args):
    if getattr(args, "transform_file", None):
        with open(args.transform_file) as fh:
            return transform_from_dict(json.load(fh))
    name = getattr(args, "transform", "paper")
    if name == "paper":
        return PaperTransform()
    if name == "none":
        return None
    raise DataError(f"unknown transform {name!r}")


def _cmd_simulate(args, cfg: AnalysisConfig, out_dir: Path) -> int:
    params = OUParams(alpha=args.alpha, tau=args.tau)
    h = _resolve_transform(args)
    if h is None:
        path = simulate_stationary(params, args.n, args.dt, cfg.seed)
        values, flags = path.values, np.zeros(len(path), dtype=bool)
        meta = {
            "alpha": params.alpha,
            "tau": params.tau,
            "transform": None,
            "n": int(args.n),
            "dt": float(args.dt),
            "seed": cfg.seed.seed,
            "stream_id": cfg.seed.stream_id,
            "n_overflow": 0,
        }
    else:
        data = simulate_dataset(params, h, args.n, args.dt, cfg.seed)
        path, values, flags, meta = data.path, data.path.values, data.overflow_flags, data.metadata
    if args.format == "json":
        _write_json(out_dir / "simulate.json", {"metadata": meta, "values": values.tolist()})
    else:
        rows = zip(path.times.tolist(), values.tolist(), flags.astype(int).tolist())
        _write_text(out_dir / "simulate.tsv", _tsv(rows, header="t\tvalue\toverflow"))
        _write_json(out_dir / "simulate_meta.json", meta)
    print(f"simulated {len(values)} observations (overflow: {int(flags.sum())})")
    return 0


def _cmd_returns(args, cfg: AnalysisConfig, out_dir: Path) -> int:
    series = load_csv(args.input)
    returns = log_returns(series, args.delta)
    if args.format == "json":
        _write_json(
            out_dir / "returns.json",
            {"delta": args.delta, "values": returns.values.tolist()},
        )
    else:
        rows = zip(returns.times.tolist(), returns.values.tolist())
        _write_text(out_dir / "returns.tsv", _tsv(rows, header="t\tvalue"))
    print(f"{len(returns)} log returns at delta={args.delta}")
    return 0


def _cmd_tails(args, cfg: AnalysisConfig, out_dir: Path) -> int:
    series = load_csv(args.input)
    if args.deltas is not None:
        cfg = _override_config(cfg, delta_list=_int_list(args.deltas))
    report = run_tail_report(series, cfg)
    _write_json(out_dir / "tails_report.json", report.to_dict())
    for (delta, side), (ln_v, ln_p) in sorted(report.curves.items()):
        rows = zip(ln_v.tolist(), ln_p.tolist(), [side] * ln_v.size)
        _write_text(
            out_dir / f"tails_curve_d{delta}_{side}.tsv",
            _tsv(rows, header="ln_value\tln_tail_prob\tside"),
        )
    n_err = sum(1 for c in report.cells if c.error is not None)
    print(f"tail report: {len(report.cells)} cells ({n_err} flagged)")
    return 0


def _cmd_spearman(args, cfg: AnalysisConfig, out_dir: Path) -> int:
    series = load_csv(args.input)
    block_len = args.block_len if args.block_len is not None else cfg.block_len
    profile = spearman_profile(
        series,
        k_max=args.k_max if args.k_max is not None else cfg.k_max,
        mode=args.mode,
        delta=args.delta,
        block_len=block_len if args.mode == "levels" else None,
    )
    header = f"mode={args.mode}"
    if args.mode == "levels":
        header += f" block_len={block_len} (block-averaged)"
    else:
        header += f" delta={args.delta} (pooled)"
    if args.format == "json":
        _write_json(
            out_dir / "spearman.json",
            {"mode": args.mode, "profile": [{"k": k, "rho_s": r} for k, r in profile]},
        )
    else:
        _write_text(out_dir / "spearman.tsv", _tsv(profile, header=header + "\nk\trho_s"))
    print(f"spearman profile over {len(profile)} lags ({header})")
    return 0


def _cmd_copula_gof(args, cfg: AnalysisConfig, out_dir: Path) -> int:
    series = load_csv(args.input)
    deltas = _int_list(args.deltas) if args.deltas is not None else list(cfg.delta_list)
    fits = {}
    for i, delta in enumerate(deltas):
        increments = log_returns(series, delta).values
        first, second = rarefy_pairs(increments, lag=cfg.gof_lag, stride=cfg.gof_stride)
        fit = gauss_copula_gof(
            first, second, args.bootstrap, RngSeed(cfg.seed.seed, cfg.seed.stream_id + i)
        )
        fits[str(delta)] = fit.to_dict()
        uv = pseudo_observations(first, second)
        _write_text(
            out_dir / f"pseudosample_d{delta}.tsv",
            _tsv(zip(uv[:, 0].tolist(), uv[:, 1].tolist()), header="u\tv"),
        )
        print(f"delta={delta}: rho={fit.rho:.4f} p={fit.p_value:.3f} (n={len(first)})")
    _write_json(
        out_dir / "copula_gof.json",
        {"lag": cfg.gof_lag, "stride": cfg.gof_stride, "fits": fits},
    )
    return 0


def _cmd_estimate_alpha(args, cfg: AnalysisConfig, out_dir: Path) -> int:
    series = load_csv(args.input)
    path = series.as_path()
    ks = _int_list(args.ks)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    table: dict = {}
    for method in methods:
        if method == "rank":
            table["rank_corr"] = {
                str(k): al.alpha_rank(path, k).to_dict() for k in ks
            }
        elif method == "sign":
            table["sign_empirical_median"] = {
                str(k): al.alpha_sign_empirical_median(path, k).to_dict() for k in ks
            }
        elif method == "sign-known":
            if args.median is None:
                raise DataError("method sign-known requires --median")
            table["sign_known_median"] = {
                str(k): al.alpha_sign_known_median(path, k, args.median).to_dict() for k in ks
            }
        elif method == "rank-increments":
            if args.delta is None:
                raise DataError("method rank-increments requires --delta")
            increments = log_returns(series, args.delta)
            table["rank_corr_increments"] = {
                str(k): al.alpha_rank_increments(increments, args.delta, k).to_dict() for k in ks
            }
        elif method == "band":
            f_lo, f_hi = (float(p) for p in args.band_f.split(","))
            a_level, b_level = np.quantile(path.values, [f_lo, f_hi])
            band = al.BandSpec(A=float(a_level), B=float(b_level), f_at_A=f_lo, f_at_B=f_hi)
            est = al.alpha_band_crossing(path, band, horizon=path.duration)
            table["band_crossing"] = est.to_dict()
        else:
            raise DataError(f"unknown method {method!r}")
    _write_json(out_dir / "alpha_estimates.json", {"ks": ks, "estimates": table})
    for name, entry in table.items():
        if name == "band_crossing":
            print(f"{name}: {entry['value']:.6g}")
        else:
            vals = ", ".join(f"k={k}: {entry[str(k)]['value']:.6g}" for k in ks)
            print(f"{name}: {vals}")
    return 0


def _cmd_validate(args, cfg: AnalysisConfig, out_dir: Path) -> int:
    budget = ValidationBudget.smoke() if args.budget == "smoke" else ValidationBudget()
    report = validate_theorems(args.suite, budget=budget, seed=cfg.seed)
    _write_json(out_dir / "validate_report.json", report.to_dict())
    for line in report.format_lines():
        print(line)
    print(f"suite {report.suite}: {'PASS' if report.passed else 'FAIL'}")
    return 0 if report.passed else _VALIDATION_EXIT


def _cmd_gen_synthetic(args, cfg: AnalysisConfig, out_dir: Path) -> int:
    series = gen_synthetic(alpha=args.alpha, n=args.n, seed=cfg.seed)
    rows = ["date,price"]
    rows += [f"{d.isoformat()},{p!r}" for d, p in zip(series.dates, series.prices.tolist())]
    _write_text(out_dir / "synthetic.csv", "\n".join(rows) + "\n")
    print(f"wrote {len(series)} synthetic prices (alpha={args.alpha})")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="outails", description=__doc__.split("\n\n")[0])
    parser.add_argument("--seed", type=int, default=None, help="root RNG seed (overrides config)")
    parser.add_argument("--config", default=None, help="JSON config file")
    parser.add_argument("--out-dir", default=".", help="directory for output files")
    parser.add_argument("--format", choices=("tsv", "json"), default="tsv",
                        help="format for series/profile outputs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a (transformed) OU path")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--transform", choices=("paper", "none"), default="paper")
    p.add_argument("--transform-file", default=None, help="JSON transform spec")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("returns", help="log returns of a price CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--delta", type=int, default=1)
    p.set_defaults(func=_cmd_returns)

    p = sub.add_parser("tails", help="tail-index report across increment lags")
    p.add_argument("--input", required=True)
    p.add_argument("--deltas", default=None, help="comma-separated lags")
    p.set_defaults(func=_cmd_tails)

    p = sub.add_parser("spearman", help="Spearman profile over lags")
    p.add_argument("--input", required=True)
    p.add_argument("--mode", choices=("levels", "increments"), default="levels")
    p.add_argument("--delta", type=int, default=None, help="increment lag (increments mode)")
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--block-len", type=int, default=None)
    p.set_defaults(func=_cmd_spearman)

    p = sub.add_parser("copula-gof", help="Gauss-copula goodness of fit on rarefied returns")
    p.add_argument("--input", required=True)
    p.add_argument("--deltas", default=None, help="comma-separated lags")
    p.add_argument("--bootstrap", type=int, default=100)
    p.set_defaults(func=_cmd_copula_gof)

    p = sub.add_parser("estimate-alpha", help="drift estimates from log prices")
    p.add_argument("--input", required=True)
    p.add_argument("--methods", default="rank,sign")
    p.add_argument("--ks", default="5,10,15,20,25,30")
    p.add_argument("--delta", type=int, default=None, help="lag for rank-increments")
    p.add_argument("--median", type=float, default=None, help="known median for sign-known")
    p.add_argument("--band-f", default="0.3,0.7", help="CDF levels for the band method")
    p.set_defaults(func=_cmd_estimate_alpha)

    p = sub.add_parser("validate", help="run the theorem-validation suites")
    p.add_argument("--suite", default="ALL", choices=("T1", "T2", "T3", "T4", "ALL"))
    p.add_argument("--budget", default="full", choices=("full", "smoke"))
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("gen-synthetic", help="write a synthetic paper-like price CSV")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--n", type=int, default=2061)
    p.set_defaults(func=_cmd_gen_synthetic)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        out_dir = Path(args.out_dir)
        return args.func(args, cfg, out_dir)
    except (DataError, DomainError, TransformRangeError, UnsupportedSideError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
