"""Command-line front end.

Subcommands:
  ap-table   CSV/JSON of (p, a_p, c_{p^2}) for p up to a limit
  ef-report  one explicit-formula report per twist D in a range
  sweep      weighted moment table over a twist family, plus a sidecar JSON
             with the reference constants
  verify     the numerical verification suite (one JSON line per check)

Exit codes: 0 success, 1 usage, 2 data/config, 3 verification failure.
Outputs are deterministic given (config, seed, version): no timestamps,
floats in shortest round-trip form.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path
from typing import List, Optional

from .arith import sieve_primes
from .curve import CurveModel, ap, builtin_catalog, cpm, load_catalog
from .explicit_formula import reports_to_csv, reports_to_json
from .family_moments import (
    GOLDFELD_K1,
    HEATH_BROWN_K1,
    LOWZERO_DENSITY_BASE,
    RANK_DENSITY_BASE,
    SINC_HALF_SQUARED,
    EmptyFamilyError,
    MomentConfig,
    empirical_rank_tail,
    lowzero_density_bound,
    rank_density_bound,
    sign_partition_stats,
    sweep_family,
    theoretical_moment_bound,
    weighted_moment,
)
from .kernel import SmoothWeight
from .verification_lab import SUITE_GROUPS, run_suite, validate_suite_group

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_VERIFY = 3

PRIME_LIMIT_CAP = 100_000_000  # hard memory cap for auto-extending the sieve


class UsageError(Exception):
    pass


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 1
        raise UsageError(message)


_CONFIG_KEYS = {
    "curve": str,
    "catalog": str,
    "x": float,
    "k": int,
    "dmin": int,
    "dmax": int,
    "T": float,
    "weight": str,
    "support": str,
    "squarefree": bool,
    "coprime": bool,
    "sign": str,
    "format": str,
    "out": str,
    "threads": int,
    "seed": int,
    "only": str,
    "limit": int,
}


def _parse_config_file(path: str) -> dict:
    """Flat key=value config file; '#' comments; unknown keys rejected."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        typ = _CONFIG_KEYS[key]
        try:
            if typ is bool:
                if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(f"not a boolean: {value!r}")
                out[key] = value.lower() in ("true", "1", "yes")
            else:
                out[key] = typ(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return out


def _build_parser() -> _Parser:
    p = _Parser(prog="twistrank", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key=value config file; flags override it")
        sp.add_argument("--curve", help="catalog label, or explicit 'A,B,N,w,a2,a3'")
        sp.add_argument("--catalog", help="path to a curve catalog file")
        sp.add_argument("--x", type=float, help="prime cutoff x (lambda = log x)")
        sp.add_argument("--format", choices=("csv", "json"), help="output format")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--threads", type=int, help="worker count (default 1)")
        sp.add_argument("--seed", type=int, help="seed for randomized sampling")

    sp = sub.add_parser("ap-table", help="coefficients a_p and c_{p^2}")
    common(sp)
    sp.add_argument("--limit", type=int, help="include primes p <= limit (default 100)")

    sp = sub.add_parser("ef-report", help="explicit-formula report per twist")
    common(sp)
    sp.add_argument("--dmin", type=int, help="lowest D (default -50)")
    sp.add_argument("--dmax", type=int, help="highest D (default 50)")
    sp.add_argument("--squarefree", action="store_true", default=None, help="keep squarefree D only")
    sp.add_argument("--coprime", action="store_true", default=None, help="keep D coprime to 2N only")

    sp = sub.add_parser("sweep", help="weighted moments over a twist family")
    common(sp)
    sp.add_argument("--k", type=int, help="moment order (default 1)")
    sp.add_argument("--T", type=float, dest="T", help="family scale (default X_k(x, k))")
    sp.add_argument("--weight", choices=("exp", "poly"), help="weight shape (default exp)")
    sp.add_argument("--support", help="weight support LO:HI (default 0.5:1)")
    sp.add_argument("--squarefree", action="store_true", default=None)
    sp.add_argument("--coprime", action="store_true", default=None)
    sp.add_argument("--sign", choices=("any", "plus", "minus"), help="root-number filter")

    sp = sub.add_parser("verify", help="run the verification suite")
    common(sp)
    sp.add_argument("--only", help=f"run one check group ({', '.join(SUITE_GROUPS)})")
    return p


def _merge_config(args: argparse.Namespace) -> dict:
    cfg = {}
    if getattr(args, "config", None):
        cfg.update(_parse_config_file(args.config))
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _resolve_curve(cfg: dict) -> CurveModel:
    spec = cfg.get("curve", "cm32-like")
    if "," in spec:
        parts = [s.strip() for s in spec.split(",")]
        if len(parts) != 6:
            raise ConfigError("explicit curve needs 6 fields: A,B,N,w,a2,a3")
        try:
            a, b, n, w, a2, a3 = (int(v) for v in parts)
        except ValueError as exc:
            raise ConfigError(f"bad explicit curve spec: {exc}") from exc
        try:
            return CurveModel(A=a, B=b, conductor=n, root_number=w, label="explicit", a2=a2, a3=a3)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    catalog = _load_catalog_cfg(cfg)
    if spec not in catalog:
        raise ConfigError(f"curve {spec!r} not in catalog (have: {', '.join(sorted(catalog))})")
    return catalog[spec]


def _load_catalog_cfg(cfg: dict) -> dict:
    if "catalog" in cfg:
        try:
            return load_catalog(cfg["catalog"])
        except (OSError, ValueError) as exc:
            raise ConfigError(f"catalog error: {exc}") from exc
    return builtin_catalog()


def _sieve_for(x: float):
    required = max(math.ceil(x), 3)  # primes below e^lambda = x
    if required > PRIME_LIMIT_CAP:
        raise ConfigError(
            f"x = {x:g} needs a prime table up to {required}, above the cap {PRIME_LIMIT_CAP}"
        )
    return sieve_primes(required)


def _open_out(cfg: dict):
    path = cfg.get("out")
    if path is None:
        return sys.stdout, False
    return open(path, "w"), True


def _parse_support(cfg: dict):
    raw = cfg.get("support", "0.5:1")
    try:
        lo, hi = (float(v) for v in raw.split(":"))
    except ValueError as exc:
        raise ConfigError(f"bad support {raw!r}: expected LO:HI") from exc
    return lo, hi


def cmd_ap_table(cfg: dict) -> int:
    curve = _resolve_curve(cfg)
    limit = cfg.get("limit", 100)
    rows = []
    if limit >= 2:
        primes = sieve_primes(limit)
        for p in primes.primes:
            p = int(p)
            rows.append((p, ap(curve, p), cpm(curve, p, 2)))
    out, close = _open_out(cfg)
    try:
        if cfg.get("format", "csv") == "json":
            json.dump([{"p": p, "a_p": a, "c_p2": c} for p, a, c in rows], out, indent=2)
            out.write("\n")
        else:
            out.write("p,a_p,c_p2\n")
            for p, a, c in rows:
                out.write(f"{p},{a},{c}\n")
    finally:
        if close:
            out.close()
    return EXIT_OK


def cmd_ef_report(cfg: dict) -> int:
    curve = _resolve_curve(cfg)
    x = cfg.get("x", 1e4)
    dmin = cfg.get("dmin", -50)
    dmax = cfg.get("dmax", 50)
    if dmin > dmax:
        raise ConfigError(f"empty D range [{dmin}, {dmax}]")
    primes = _sieve_for(x)
    from .arith import is_squarefree
    from .family_moments import evaluate_reports

    ds = []
    for D in range(dmin, dmax + 1):
        if D == 0:
            continue
        if cfg.get("squarefree") and not is_squarefree(abs(D)):
            continue
        if cfg.get("coprime") and math.gcd(D, 2 * curve.conductor) != 1:
            continue
        ds.append(D)
    reports = evaluate_reports(curve, ds, math.log(x), primes, threads=cfg.get("threads", 1))
    out, close = _open_out(cfg)
    try:
        if cfg.get("format", "csv") == "json":
            reports_to_json(reports, out)
        else:
            reports_to_csv(reports, out)
    finally:
        if close:
            out.close()
    return EXIT_OK


def _sidecar_payload(config: MomentConfig, rows) -> dict:
    k = config.k
    stats = sign_partition_stats(config, None, rows=rows) if config.squarefree_only and config.coprime_to_2N else None
    return {
        "heath_brown_k1": HEATH_BROWN_K1,
        "goldfeld_k1": GOLDFELD_K1,
        "theoretical_moment_bound": {"k": k, "value": theoretical_moment_bound(k)},
        "rank_density_base": RANK_DENSITY_BASE,
        "lowzero_density_base": LOWZERO_DENSITY_BASE,
        "sinc_half_squared": SINC_HALF_SQUARED,
        "rank_density_bound": {f"R={r}": rank_density_bound(r) for r in (1, 2, 3)},
        "lowzero_density_bound": {f"k={kk}": lowzero_density_bound(kk) for kk in (1, 2, 3)},
        "empirical_rank_tail": {
            f"R={r}": empirical_rank_tail(config, float(r), None, rows=rows) for r in (0, 1, 2)
        },
        "sign_partition": stats,
    }


def cmd_sweep(cfg: dict) -> int:
    curve = _resolve_curve(cfg)
    x = cfg.get("x", 1000.0)
    k = cfg.get("k", 1)
    lo, hi = _parse_support(cfg)
    weight = SmoothWeight(lo, hi, shape=cfg.get("weight", "exp"))
    try:
        config = MomentConfig(
            curve=curve,
            k=k,
            x=x,
            weight=weight,
            T=cfg.get("T"),
            squarefree_only=bool(cfg.get("squarefree", True)),
            coprime_to_2N=bool(cfg.get("coprime", True)),
            sign=cfg.get("sign", "any"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    primes = _sieve_for(x)
    threads = cfg.get("threads", 1)
    try:
        rows = sweep_family(config, primes, threads=threads)
        table = weighted_moment(config, primes, rows=rows)
    except EmptyFamilyError as exc:
        raise ConfigError(str(exc)) from exc
    sidecar = _sidecar_payload(config, rows)

    out_path = cfg.get("out")
    if out_path is None:
        buf = io.StringIO()
        if cfg.get("format", "csv") == "json":
            table.to_json(buf)
        else:
            table.to_csv(buf)
        sys.stdout.write(buf.getvalue())
        sys.stdout.write(json.dumps(sidecar, indent=2) + "\n")
    else:
        with open(out_path, "w") as fh:
            if cfg.get("format", "csv") == "json":
                table.to_json(fh)
            else:
                table.to_csv(fh)
        with open(out_path + ".refs.json", "w") as fh:
            json.dump(sidecar, fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def cmd_verify(cfg: dict) -> int:
    catalog = _load_catalog_cfg(cfg)
    if "curve" in cfg:
        curves = [_resolve_curve(cfg)]
    else:
        curves = [catalog[label] for label in sorted(catalog)]
    x = cfg.get("x", 1e5)
    primes = _sieve_for(max(x, 1e4))
    try:
        validate_suite_group(cfg.get("only"))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    results = run_suite(
        curves,
        primes,
        x=x,
        seed=cfg.get("seed", 1),
        only=cfg.get("only"),
    )
    n_fail = sum(1 for r in results if not r.passed)
    n_warn = sum(1 for r in results if r.passed and r.note)
    out, close = _open_out(cfg)
    try:
        for res in results:
            out.write(json.dumps(res.to_json_dict()) + "\n")
        out.write(
            json.dumps(
                {
                    "summary": {
                        "checks": len(results),
                        "passed": len(results) - n_fail,
                        "failed": n_fail,
                        "warnings": n_warn,
                    }
                }
            )
            + "\n"
        )
    finally:
        if close:
            out.close()
    # human-readable summary table
    width = max((len(r.name) for r in results), default=4)
    print(f"{'check'.ljust(width)}  status  ratio/error", file=sys.stderr)
    for r in results:
        status = "FAIL" if not r.passed else ("WARN" if r.note else "ok")
        print(f"{r.name.ljust(width)}  {status:6s}  {r.ratio_or_error:.3e}", file=sys.stderr)
    print(
        f"{len(results)} checks: {len(results) - n_fail} passed, "
        f"{n_fail} failed, {n_warn} warnings",
        file=sys.stderr,
    )
    if n_fail:
        return EXIT_VERIFY
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _merge_config(args)
        if args.command == "ap-table":
            return cmd_ap_table(cfg)
        if args.command == "ef-report":
            return cmd_ef_report(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
