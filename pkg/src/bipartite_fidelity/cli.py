"""Command-line front end.

Usage:
    bifid estimate --channel global-depolarizing:p=1 --dim 2 --protocol design-exact
    bifid chi --channel random-kraus:r=2 --dim 2 --full --mode exact
    bifid approx --dim 3 --m 2..9
    bifid verify --include-appendix --haar-samples 100000

Exit codes: 0 ok, 1 identity failure, 2 invalid configuration,
3 numerical failure (non-trace-preserving map in a TP-only path),
4 approximation bound violated.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import approx as ap
from .channels import (
    KrausChannel,
    NonPhysicalMapError,
    average_fidelity_exact,
    channel_zoo,
    entanglement_fidelity,
    parse_channel_spec,
)
from .chi import chi_diagonal_protocol, chi_direct, chi_full_protocol, chi_offdiagonal_protocol, pauli_basis
from .designs import StateDesign, UnsupportedDimension, make_mub, make_sic
from .estimators import (
    ProtocolSpec,
    combine_average,
    combine_entanglement,
    estimate_triple,
    propagate_se,
    quality_flag,
)
from .tensor import DimensionError

EXIT_OK, EXIT_IDENTITY, EXIT_CONFIG, EXIT_NUMERIC, EXIT_BOUND = 0, 1, 2, 3, 4
DEFAULT_SEED = 20240101
OUTPUT_ENV = "BIFID_OUTPUT_DIR"

DEFAULTS = {
    "estimate": {
        "channel": "identity",
        "channel_file": None,
        "channel_seed": None,
        "dim": 2,
        "protocol": "design-exact",
        "mode": None,
        "design": "sic",
        "design_file": None,
        "settings": 10_000,
        "shots": 1000,
        "seed": DEFAULT_SEED,
        "threads": None,
        "output": None,
        "no_timings": False,
    },
    "chi": {
        "channel": "identity",
        "channel_file": None,
        "channel_seed": None,
        "dim": 2,
        "mu": None,
        "nu": None,
        "full": False,
        "mode": "exact",
        "shots": 1000,
        "seed": DEFAULT_SEED,
        "format": "json",
        "output": None,
        "no_timings": False,
    },
    "approx": {
        "dim": 2,
        "m": None,
        "random_subset": False,
        "seed": DEFAULT_SEED,
        "format": "csv",
        "output": None,
    },
    "verify": {
        "dim": None,
        "include_appendix": False,
        "haar_samples": 100_000,
        "seed": DEFAULT_SEED,
    },
}


class ConfigError(ValueError):
    pass


# --- config ------------------------------------------------------------------

def _merge(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[command])
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        for key, val in file_cfg.items():
            key = key.replace("-", "_")
            if key not in cfg:
                raise ConfigError(f"unknown config key {key!r} for {command}")
            cfg[key] = val
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            cfg[key] = val
    return cfg


def _output_path(cfg: dict, default_name: str) -> Path:
    if cfg.get("output"):
        return Path(cfg["output"])
    return Path(os.environ.get(OUTPUT_ENV, ".")) / default_name


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _dump(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def _load_channel(cfg: dict) -> KrausChannel:
    if cfg.get("channel_file"):
        path = Path(cfg["channel_file"])
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read channel file: {exc}") from exc
        ch = KrausChannel.from_dict(data, name=path.stem)
        if ch.dim != cfg["dim"] ** 2:
            raise ConfigError(f"channel file has dim {ch.dim}, expected {cfg['dim'] ** 2}")
        return ch
    name, params = parse_channel_spec(cfg["channel"])
    seed = cfg["channel_seed"] if cfg["channel_seed"] is not None else cfg["seed"]
    return channel_zoo(name, int(cfg["dim"]), np.random.default_rng(seed), **params)


def _parse_protocol(protocol: str, mode: str | None) -> tuple[str, str]:
    base = protocol.lower().replace("_", "-")
    for suffix in ("-exact", "-shots"):
        if base.endswith(suffix):
            mode = mode or suffix[1:]
            base = base[: -len(suffix)]
    sources = {
        "design": "design_product",
        "design-product": "design_product",
        "haar": "haar_product",
        "haar-product": "haar_product",
        "twirl-haar": "twirl_haar",
        "twirl-clifford": "twirl_clifford",
        "clifford": "twirl_clifford",
    }
    if base not in sources:
        raise ConfigError(f"unknown protocol {protocol!r}")
    return sources[base], mode or "exact"


def _load_design(cfg: dict, d: int) -> StateDesign:
    if cfg.get("design_file"):
        try:
            return StateDesign.from_json(Path(cfg["design_file"]).read_text())
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise ConfigError(f"cannot read design file: {exc}") from exc
    kind = cfg["design"].lower()
    if kind == "sic":
        return make_sic(d)
    if kind == "mub":
        return make_mub(d)
    raise ConfigError(f"unknown design {cfg['design']!r}")


# --- commands ------------------------------------------------------------------

def cmd_estimate(args) -> int:
    cfg = _merge("estimate", args)
    t0 = time.perf_counter()
    d = int(cfg["dim"])
    channel = _load_channel(cfg)
    source, mode = _parse_protocol(cfg["protocol"], cfg["mode"])
    design = _load_design(cfg, d) if source == "design_product" else None
    workers = int(cfg["threads"] or os.cpu_count() or 1)
    spec = ProtocolSpec(
        mode=mode,
        input_source=source,
        n_settings=int(cfg["settings"]),
        shots=int(cfg["shots"]),
        seed=int(cfg["seed"]),
        design_a=design,
        design_b=design,
        workers=workers,
    )
    channel.require_tp()
    t1 = time.perf_counter()
    triple = estimate_triple(channel, spec)
    t2 = time.perf_counter()
    f_ent = combine_entanglement(triple, d)
    f_avg = combine_average(triple, d)
    se_ent, se_avg = propagate_se(triple, d)
    f_avg_exact = average_fidelity_exact(channel)
    f_ent_exact = entanglement_fidelity(channel)
    t3 = time.perf_counter()
    report = {
        "tool": "bifid",
        "version": __version__,
        "command": "estimate",
        "config": cfg,
        "channel_id": channel.name,
        "protocol": {
            "input_source": source,
            "mode": mode,
            "design": None if design is None else design.kind.value,
            "n_settings": triple.n_settings,
            "shots_per_setting": triple.shots_per_setting,
        },
        "triple": triple.to_dict(),
        "f_ent": f_ent,
        "f_avg": f_avg,
        "se_f_ent": se_ent,
        "se_f_avg": se_avg,
        "f_ent_exact": f_ent_exact,
        "f_avg_exact": f_avg_exact,
        "quality": {"f_ent": quality_flag(f_ent), "f_avg": quality_flag(f_avg)},
        "seeds": {"protocol": spec.seed, "channel": cfg["channel_seed"] if cfg["channel_seed"] is not None else cfg["seed"]},
        "runtimes": None
        if cfg["no_timings"]
        else {"setup_s": t1 - t0, "estimate_s": t2 - t1, "exact_s": t3 - t2, "total_s": t3 - t0},
    }
    path = _output_path(cfg, "estimate.json")
    _write(path, _dump(report))
    print(f"channel   {channel.name}  (D={d}, {source}, {mode})")
    print(f"triple    f_AB={triple.f_ab:.10f}  f_A={triple.f_a:.10f}  f_B={triple.f_b:.10f}")
    print(f"f_ent     {f_ent:.10f} +/- {se_ent:.2e}   exact {f_ent_exact:.10f}")
    print(f"f_avg     {f_avg:.10f} +/- {se_avg:.2e}   exact {f_avg_exact:.10f}")
    print(f"report    {path}")
    return EXIT_OK


def _parse_pauli_dim(d: int) -> int:
    k = d.bit_length() - 1
    if d < 2 or 2**k != d:
        raise UnsupportedDimension(f"process-matrix reconstruction needs D = 2^k, got {d}")
    return k


def cmd_chi(args) -> int:
    cfg = _merge("chi", args)
    t0 = time.perf_counter()
    d = int(cfg["dim"])
    k = _parse_pauli_dim(d)
    channel = _load_channel(cfg)
    channel.require_tp()
    basis = pauli_basis(k)
    spec = ProtocolSpec(mode=cfg["mode"], input_source="design_product", shots=int(cfg["shots"]), seed=int(cfg["seed"]))
    make_sic(d)
    direct = chi_direct(channel, basis)
    report = {"tool": "bifid", "version": __version__, "command": "chi", "config": cfg, "channel_id": channel.name}
    if cfg["full"]:
        chi = chi_full_protocol(channel, basis, spec)
        dev = float(np.abs(chi.entries - direct.entries).max())
        report.update(chi.to_dict())
        report["max_deviation_vs_direct"] = dev
        report["hermiticity_deviation"] = float(np.abs(chi.entries - chi.entries.conj().T).max())
        text = chi.diagonal_csv() if cfg["format"] == "csv" else None
        print(f"chi ({len(basis)}x{len(basis)}) reconstructed; max deviation vs direct {dev:.3e}")
    else:
        if cfg["mu"] is None:
            raise ConfigError("give --mu (and optionally --nu) or --full")
        mu = basis.index(cfg["mu"])
        nu = basis.index(cfg["nu"]) if cfg["nu"] is not None else mu
        if mu == nu:
            val = complex(chi_diagonal_protocol(channel, basis, mu, spec))
        else:
            val = chi_offdiagonal_protocol(channel, basis, mu, nu, spec)
        ref = direct.entries[mu, nu]
        dev = abs(val - ref)
        report.update(
            {
                "mu": basis.labels[mu],
                "nu": basis.labels[nu],
                "value_re": val.real,
                "value_im": val.imag,
                "direct_re": float(ref.real),
                "direct_im": float(ref.imag),
                "max_deviation_vs_direct": dev,
            }
        )
        text = None
        print(f"chi[{basis.labels[mu]};{basis.labels[nu]}] = {val.real:.10f}{val.imag:+.10f}j   direct {ref.real:.10f}{ref.imag:+.10f}j")
    report["runtimes"] = None if cfg["no_timings"] else {"total_s": time.perf_counter() - t0}
    path = _output_path(cfg, "chi.csv" if text is not None else "chi.json")
    _write(path, text if text is not None else _dump(report))
    print(f"report    {path}")
    return EXIT_OK


def _parse_m_range(spec, d: int) -> list[int]:
    if spec is None:
        return list(range(2, d * d + 1))
    spec = str(spec)
    if ".." in spec:
        lo, hi = spec.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in spec.split(",")]


def cmd_approx(args) -> int:
    cfg = _merge("approx", args)
    d = int(cfg["dim"])
    make_sic(d)
    ms = _parse_m_range(cfg["m"], d)
    for m in ms:
        if not 1 < m <= d * d:
            raise ConfigError(f"M={m} outside 1 < M <= {d * d}")
    rows = ap.sweep(d, ms, int(cfg["seed"]) if cfg["random_subset"] else None)
    violations = []
    for row in rows:
        ok = abs(row["hs_error"]) <= 1e-12 if row["M"] == d * d else 0 < row["hs_error"] < row["bound"]
        if not ok:
            violations.append(row["M"])
        if abs(row["hs_norm"] - row["closed_form"]) > 1e-10:
            print(f"warning: M={row['M']} closed form differs from direct norm by {abs(row['hs_norm'] - row['closed_form']):.3e}", file=sys.stderr)
    if cfg["format"] == "json":
        text = _dump({"tool": "bifid", "version": __version__, "command": "approx", "config": cfg, "rows": rows})
        path = _output_path(cfg, "approx.json")
    else:
        text = ap.sweep_csv(rows)
        path = _output_path(cfg, "approx.csv")
    _write(path, text)
    print(text, end="")
    if violations:
        print(f"bound violated for M in {violations}", file=sys.stderr)
        return EXIT_BOUND
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_suite

    cfg = _merge("verify", args)
    dims = cfg["dim"] or [2, 3]
    if isinstance(dims, int):
        dims = [dims]
    checks = run_suite(tuple(int(x) for x in dims), bool(cfg["include_appendix"]), int(cfg["haar_samples"]), int(cfg["seed"]))
    for c in checks:
        print(c.line())
    failed = [c for c in checks if c.passed is False]
    if failed:
        print("failed identities: " + ", ".join(f"{c.name} (D={c.dim})" for c in failed))
        return EXIT_IDENTITY
    print(f"all {sum(c.passed is True for c in checks)} identities pass")
    return EXIT_OK


# --- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bifid", description="Average-fidelity protocols for bipartite qudit channels")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file with the same keys as the flags (snake_case)")
        sp.add_argument("--seed", type=int)

    def channel_flags(sp):
        sp.add_argument("--channel", help="zoo spec, e.g. identity, global-depolarizing:p=0.2, random-kraus:r=3, pauli:XX")
        sp.add_argument("--channel-file", help="channel JSON {dim, kraus, trace_preserving}")
        sp.add_argument("--channel-seed", type=int)
        sp.add_argument("--dim", type=int, help="subsystem dimension D")
        sp.add_argument("--output", "-o")
        sp.add_argument("--no-timings", action="store_true", help="omit wall-clock timings for byte-identical reports")

    e = sub.add_parser("estimate", help="estimate f_avg and f_ent from the survive triple")
    common(e)
    channel_flags(e)
    e.add_argument("--protocol", help="design|haar|twirl-haar|twirl-clifford, optionally with -exact/-shots")
    e.add_argument("--mode", choices=["exact", "shots"])
    e.add_argument("--design", choices=["sic", "mub"])
    e.add_argument("--design-file")
    e.add_argument("--settings", type=int, help="number of random settings")
    e.add_argument("--shots", type=int)
    e.add_argument("--threads", type=int)
    e.set_defaults(func=cmd_estimate)

    c = sub.add_parser("chi", help="reconstruct process-matrix elements")
    common(c)
    channel_flags(c)
    c.add_argument("--mu")
    c.add_argument("--nu")
    c.add_argument("--full", action="store_true")
    c.add_argument("--mode", choices=["exact", "shots"])
    c.add_argument("--shots", type=int)
    c.add_argument("--format", choices=["json", "csv"])
    c.set_defaults(func=cmd_chi)

    a = sub.add_parser("approx", help="sweep the SIC-subset approximation error")
    common(a)
    a.add_argument("--dim", type=int)
    a.add_argument("--m", help="M range: '2..4', '3' or '2,3,5'")
    a.add_argument("--random-subset", action="store_true")
    a.add_argument("--format", choices=["json", "csv"])
    a.add_argument("--output", "-o")
    a.set_defaults(func=cmd_approx)

    v = sub.add_parser("verify", help="run the numerical identity suite")
    common(v)
    v.add_argument("--dim", type=int, action="append")
    v.add_argument("--include-appendix", action="store_true")
    v.add_argument("--haar-samples", type=int)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NonPhysicalMapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ArithmeticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, UnsupportedDimension, DimensionError, ValueError, KeyError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
