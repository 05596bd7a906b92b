"""Experiment front-end: subcommand dispatch, reproducible runs, CSV/JSON
emission, optional figure rendering.

One binary, six subcommands: measure, decay, sobolev-probe, pigeonhole,
roth, detect.  Configuration comes from flags or a single JSON file
(--config); flags win on conflict, unknown config keys are rejected.
Outputs are written atomically; every JSON output embeds a manifest with
the config hash and library versions, and the wall time is echoed to
stdout so that output files stay bit-identical across reruns.

Exit codes: 0 success, 2 configuration error, 3 precondition error,
4 resource error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .averages import sobolev_probe
from .detect import average_certificate, default_kappa, detect
from .errors import ConfigError, FraclabError, PreconditionError, ResourceError
from .families import PolynomialFamily
from .fourier import decay_profile
from .grid import MAX_RESOLUTION, MIN_RESOLUTION, GridFunction
from .io import (
    read_dyadic_set,
    read_grid_function,
    write_dyadic_set,
    write_grid_function,
    write_text_atomic,
)
from .measures import (
    DigitConstruction,
    cantor_measure,
    estimate_dimension,
    frostman_constant,
    random_digit_measure,
    support_set,
)
from .pigeonhole import find_good_scale
from .roth import ThetaPair, roth_certificate

SUBCOMMANDS = ("measure", "decay", "sobolev-probe", "pigeonhole", "roth", "detect")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _json_default(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"not serializable: {obj!r}")


def _json_clean(o):
    if isinstance(o, dict):
        return {k: _json_clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_json_clean(v) for v in o]
    if isinstance(o, float) and not math.isfinite(o):
        return repr(o)
    return o


def _json_text(payload: dict) -> str:
    return json.dumps(_json_clean(payload), indent=2, sort_keys=True, default=_json_default) + "\n"


def config_manifest(subcommand: str, config: dict) -> dict:
    # execution-only knobs (thread cap, figure path) do not change results
    # and stay out of the hash so reruns remain bit-identical
    semantic = {k: v for k, v in config.items() if k not in ("threads", "plot")}
    blob = json.dumps({"subcommand": subcommand, **semantic}, sort_keys=True, default=str)
    return {
        "subcommand": subcommand,
        "config_sha256": hashlib.sha256(blob.encode()).hexdigest(),
        "package_version": __version__,
        "numpy_version": np.__version__,
    }


def _add_common(p: argparse.ArgumentParser, with_seed: bool = True) -> None:
    p.add_argument("--config", type=str, default=None, help="JSON config file; flags win")
    p.add_argument("--J", type=int, default=None, help=f"grid resolution in [{MIN_RESOLUTION}, {MAX_RESOLUTION}]")
    if with_seed:
        p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None, help="cap worker threads (computations stay deterministic)")
    p.add_argument("--out", type=str, default=None, help="output path")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None)
    p.add_argument("--plot", type=str, default=None, help="also render a figure to this path")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fraclab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("measure", help="construct a measure and its certificate")
    p.add_argument("--cantor", type=str, default=None, help="b:d1,d2,... digit construction")
    p.add_argument("--random", type=str, default=None, help="b:keep randomized construction")
    p.add_argument("--lebesgue", action="store_true", help="the flat measure")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--beta", type=float, default=None, help="certification exponent (default: closed-form dimension)")
    p.add_argument("--emit-set", type=str, default=None, help="also write the support as a set file")
    _add_common(p)

    p = sub.add_parser("decay", help="annulus-norm decay profile of a measure")
    p.add_argument("--measure", type=str, required=False, default=None)
    p.add_argument("--lmax", type=int, default=None)
    p.add_argument("--beta", type=float, default=None, help="report the (1-beta)/4 threshold")
    _add_common(p, with_seed=False)

    p = sub.add_parser("sobolev-probe", help="decay probe for an averaging family")
    p.add_argument("--family", type=str, default=None, help='e.g. "t, t^2"')
    p.add_argument("--cutoffs", type=str, default=None, help="a:b range of cutoff exponents")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--scale", type=int, default=None)
    p.add_argument("--inputs", choices=("random", "tone", "modulated"), default=None)
    p.add_argument("--hipass-slot", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("pigeonhole", help="scan scales for a good pairing")
    p.add_argument("--family", type=str, default=None)
    p.add_argument("--set", dest="set_file", type=str, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--kmax", type=int, default=None)
    _add_common(p, with_seed=False)

    p = sub.add_parser("roth", help="trilinear form certificate for a measure")
    p.add_argument("--measure", type=str, default=None, help="measure file or 'lebesgue'")
    p.add_argument("--theta", type=str, default=None, help='rational pair, e.g. "1,2" or "1/2,3/2"')
    p.add_argument("--M", type=int, default=None)
    p.add_argument("--l0", type=int, default=None)
    p.add_argument("--beta", type=float, default=None, help="certification exponent (default: estimated)")
    _add_common(p, with_seed=False)

    p = sub.add_parser("detect", help="search a set for a polynomial pattern")
    p.add_argument("--set", dest="set_file", type=str, default=None)
    p.add_argument("--family", type=str, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--tgrid", type=int, default=None)
    _add_common(p, with_seed=False)

    return ap


def merge_config(args: argparse.Namespace) -> dict:
    """Start from the JSON config file (if any), overlay explicit flags."""
    config: dict = {}
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {k for k in vars(args) if k not in ("config", "subcommand")}
        unknown = set(loaded) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        config.update(loaded)
    for key, value in vars(args).items():
        if key in ("config", "subcommand"):
            continue
        if value is not None and value is not False:
            config[key] = value
        config.setdefault(key, value if value is not False else False)
    return config


def _require(config: dict, key: str, subcommand: str):
    value = config.get(key)
    if value is None:
        raise ConfigError(f"{subcommand}: --{key.replace('_', '-')} is required")
    return value


def _parse_spec_pair(text: str, what: str) -> tuple[int, list[int]]:
    try:
        head, tail = text.split(":", 1)
        b = int(head)
        parts = [int(x) for x in tail.split(",") if x != ""]
    except ValueError as exc:
        raise ConfigError(f"bad {what} spec {text!r}, expected 'b:...'") from exc
    if not parts:
        raise ConfigError(f"bad {what} spec {text!r}: empty tail")
    return b, parts


def _load_family(config: dict, subcommand: str) -> PolynomialFamily:
    return PolynomialFamily.parse(str(_require(config, "family", subcommand)))


def _resolve_out(config: dict, subcommand: str, default_name: str) -> Path:
    out = config.get("out")
    if out is None:
        out = default_name
    return Path(out)


def _resolve_J(config: dict) -> int:
    from .grid import DEFAULT_RESOLUTION

    return int(config["J"]) if config.get("J") is not None else DEFAULT_RESOLUTION


def run_measure(config: dict) -> dict:
    J = _resolve_J(config)
    picks = [bool(config.get("cantor")), bool(config.get("random")), bool(config.get("lebesgue"))]
    if sum(picks) != 1:
        raise ConfigError("measure: pick exactly one of --cantor, --random, --lebesgue")
    sidecar: dict = {"J": J, "b": None, "digits": None, "keep": None, "depth": None, "seed": None}
    if config.get("cantor"):
        b, digits = _parse_spec_pair(str(config["cantor"]), "cantor")
        depth = int(_require(config, "depth", "measure"))
        construction = DigitConstruction(b, tuple(digits), depth)
        mu = cantor_measure(construction, J)
        beta = float(config["beta"]) if config.get("beta") is not None else construction.dimension
        sidecar.update(kind="cantor", b=b, digits=sorted(set(digits)), depth=depth)
    elif config.get("random"):
        b, rest = _parse_spec_pair(str(config["random"]), "random")
        if len(rest) != 1:
            raise ConfigError("measure: --random expects 'b:keep'")
        keep = rest[0]
        depth = int(_require(config, "depth", "measure"))
        seed = int(config.get("seed") or 0)
        mu = random_digit_measure(b, keep, depth, seed, J)
        beta = (
            float(config["beta"])
            if config.get("beta") is not None
            else math.log(keep) / math.log(b)
        )
        sidecar.update(kind="random", b=b, keep=keep, depth=depth, seed=seed)
    else:
        mu = GridFunction.constant(J, 1.0)
        beta = float(config["beta"]) if config.get("beta") is not None else 1.0
        sidecar.update(kind="lebesgue")
    frost = frostman_constant(mu, beta)
    sidecar["frostman"] = {
        "beta": frost.beta,
        "lambda": frost.lam,
        "lambda_padded": frost.padded_lambda,
    }
    out = _resolve_out(config, "measure", "measure.grid")
    write_grid_function(out, mu)
    set_path = config.get("emit_set")
    if set_path:
        write_dyadic_set(set_path, support_set(mu))
    sidecar["set_file"] = str(set_path) if set_path else None
    sidecar["manifest"] = config_manifest("measure", config)
    write_text_atomic(str(out) + ".json", _json_text(sidecar))
    return {"out": str(out), "sidecar": str(out) + ".json", "frostman": sidecar["frostman"]}


def _decay_csv(profile, threshold) -> str:
    lines = ["l,sup,l2,l4"]
    for l, sup, l2, l4 in profile.rows():
        lines.append(f"{l},{_fmt(sup)},{_fmt(l2)},{_fmt(l4)}")
    c0 = profile.c0_l4
    lines.append(f"fitted_c0_l4,{_fmt(c0) if math.isfinite(c0) else 'inf'},,")
    if threshold is not None:
        lines.append(f"threshold_(1-beta)/4,{_fmt(threshold)},,")
    return "\n".join(lines) + "\n"


def run_decay(config: dict) -> dict:
    path = _require(config, "measure", "decay")
    mu = read_grid_function(path, is_density=True)
    lmax = int(config.get("lmax") or mu.resolution - 2)
    frost = None
    if config.get("beta") is not None:
        frost = frostman_constant(mu, float(config["beta"]))
    profile = decay_profile(mu, lmax, frost)
    fmt = config.get("fmt") or "csv"
    out = _resolve_out(config, "decay", f"decay.{fmt}")
    if fmt == "csv":
        write_text_atomic(out, _decay_csv(profile, profile.threshold))
    else:
        payload = {
            "rows": [list(r) for r in profile.rows()],
            "fitted_c0_l4": profile.c0_l4,
            "threshold": profile.threshold,
            "uniform_ok": profile.uniform_ok,
            "manifest": config_manifest("decay", config),
        }
        write_text_atomic(out, _json_text(payload))
    if config.get("plot"):
        from .report import save_decay_figure

        save_decay_figure(profile, config["plot"])
    return {"out": str(out), "fitted_c0_l4": profile.c0_l4}


def _parse_cutoffs(text: str) -> list[int]:
    try:
        if ":" in text:
            a, b = text.split(":", 1)
            return list(range(int(a), int(b) + 1))
        return [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad cutoff spec {text!r}") from exc


def run_probe(config: dict) -> dict:
    fam = _load_family(config, "sobolev-probe")
    J = _resolve_J(config)
    cutoffs = _parse_cutoffs(str(_require(config, "cutoffs", "sobolev-probe")))
    result = sobolev_probe(
        fam,
        J,
        cutoffs,
        trials=int(config.get("trials") or 16),
        seed=int(config.get("seed") or 0),
        scale=int(config.get("scale") or 1),
        hipass_slot=config.get("hipass_slot"),
        inputs=config.get("inputs") or "random",
    )
    fmt = config.get("fmt") or "csv"
    out = _resolve_out(config, "sobolev-probe", f"probe.{fmt}")
    if fmt == "csv":
        lines = ["n,l1_norm"]
        for n_cut, norm in zip(result.cutoffs, result.l1_norms):
            lines.append(f"{n_cut},{_fmt(norm)}")
        lines.append(f"sigma_fit,{_fmt(result.sigma_fit)}")
        lines.append(f"c_fit,{_fmt(result.c_fit)}")
        lines.append(f"r_squared,{_fmt(result.r_squared)}")
        write_text_atomic(out, "\n".join(lines) + "\n")
    else:
        payload = result.to_dict()
        payload["manifest"] = config_manifest("sobolev-probe", config)
        write_text_atomic(out, _json_text(payload))
    if config.get("plot"):
        from .report import save_probe_figure

        save_probe_figure(result, config["plot"])
    return {"out": str(out), "sigma_fit": result.sigma_fit}


def run_pigeonhole(config: dict) -> dict:
    fam = _load_family(config, "pigeonhole")
    E = read_dyadic_set(_require(config, "set_file", "pigeonhole"))
    if config.get("J") is not None and int(config["J"]) != E.resolution:
        raise ConfigError(
            f"pigeonhole: --J {config['J']} does not match the set file's J={E.resolution}"
        )
    epsilon = float(_require(config, "epsilon", "pigeonhole"))
    f = E.indicator()
    report = find_good_scale(
        fam, f, f, [None] * fam.m, epsilon, K_max=int(config.get("kmax") or 64)
    )
    payload = report.to_dict()
    payload["manifest"] = config_manifest("pigeonhole", config)
    out = _resolve_out(config, "pigeonhole", "pigeonhole.json")
    write_text_atomic(out, _json_text(payload))
    if config.get("plot"):
        from .report import save_pigeonhole_figure

        save_pigeonhole_figure(report, config["plot"])
    return {"out": str(out), "k_found": report.k_found}


def run_roth(config: dict) -> dict:
    spec = str(_require(config, "measure", "roth"))
    if spec == "lebesgue":
        J = _resolve_J(config)
        mu = GridFunction.constant(J, 1.0)
    else:
        mu = read_grid_function(spec, is_density=True)
    M = int(config.get("M") or 4)
    th = ThetaPair.parse(str(_require(config, "theta", "roth")), M)
    if config.get("beta") is not None:
        frost = frostman_constant(mu, float(config["beta"]))
    else:
        frost = estimate_dimension(mu)
    report = roth_certificate(mu, frost, th, l0=int(config.get("l0") or 4))
    payload = report.to_dict()
    payload["manifest"] = config_manifest("roth", config)
    out = _resolve_out(config, "roth", "roth.json")
    write_text_atomic(out, _json_text(payload))
    if config.get("plot"):
        from .report import save_roth_figure

        save_roth_figure(report, config["plot"])
    return {"out": str(out), "lambda_total": report.lambda_total, "passed": report.certificate}


def run_detect(config: dict) -> dict:
    fam = _load_family(config, "detect")
    E = read_dyadic_set(_require(config, "set_file", "detect"))
    kappa = float(config["kappa"]) if config.get("kappa") is not None else default_kappa(E.resolution)
    t_grid = int(config.get("tgrid") or 65536)
    witness = detect(E, fam, kappa, t_grid)
    certificate = average_certificate(E, fam, kappa) if E.count else 0.0
    payload = {
        "found": witness is not None,
        "witness": witness.to_dict() if witness else None,
        "certificate": certificate,
        "kappa": kappa,
        "t_grid": t_grid,
        "family": str(fam),
        "manifest": config_manifest("detect", config),
    }
    out = _resolve_out(config, "detect", "detect.json")
    write_text_atomic(out, _json_text(payload))
    return {"out": str(out), "found": witness is not None}


RUNNERS = {
    "measure": run_measure,
    "decay": run_decay,
    "sobolev-probe": run_probe,
    "pigeonhole": run_pigeonhole,
    "roth": run_roth,
    "detect": run_detect,
}


def _apply_thread_cap(config: dict) -> None:
    threads = config.get("threads")
    if threads is None:
        return
    if int(threads) < 1:
        raise ConfigError(f"--threads {threads} must be >= 1")
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(limits=int(threads))
    except ImportError:
        pass  # reductions are deterministic regardless of pool size


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    started = time.perf_counter()
    try:
        config = merge_config(args)
        if config.get("J") is not None and not MIN_RESOLUTION <= int(config["J"]) <= MAX_RESOLUTION:
            raise ConfigError(
                f"--J {config['J']} outside [{MIN_RESOLUTION}, {MAX_RESOLUTION}]"
            )
        _apply_thread_cap(config)
        summary = RUNNERS[args.subcommand](config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FraclabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    echo = dict(summary)
    echo["wall_time_s"] = round(time.perf_counter() - started, 3)
    echo["manifest"] = config_manifest(args.subcommand, merge_config(args))
    print(json.dumps(_json_clean(echo), sort_keys=True, default=_json_default))
    return 0


if __name__ == "__main__":
    sys.exit(main())
