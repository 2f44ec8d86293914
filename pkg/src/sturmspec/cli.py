"""Command-line front end.

Every subcommand flag may also come from a YAML/JSON config file passed with
``--config``; keys are flag names with dashes or underscores, optionally
nested under the subcommand name. Explicit flags win over the file.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import direct, inverse, lab, linearize
from .funcspace import make_grid_function
from .seqspace import SpectralData, check_omega_hat


def _floats(text: str) -> list:
    return [float(t) for t in str(text).split(",") if t.strip()]


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_direct(a) -> int:
    sigma = make_grid_function(a.sigma, a.M)
    data = direct.spectral_map(sigma, a.n, a.theta)
    _emit(data.to_csv() if a.format == "csv" else data.to_json(), a.out)
    return 0


def cmd_derivcheck(a) -> int:
    sigma = make_grid_function(a.sigma, a.M)
    f = make_grid_function(a.f, a.M)
    ts = _floats(a.t)
    rem = linearize.taylor_remainders(sigma, f, ts, 2 * a.n)
    lines = ["t,remainder,ratio_to_previous"]
    for i, (t, r) in enumerate(zip(ts, rem)):
        ratio = "" if i == 0 else repr(float(rem[i - 1] / r))
        lines.append(f"{t!r},{float(r)!r},{ratio}")
    _emit("\n".join(lines), a.out)
    return 0


def _load_data(path: str) -> SpectralData:
    return SpectralData.from_dict(json.loads(Path(path).read_text()))


def cmd_inverse(a) -> int:
    data = _load_data(a.data)
    if a.n:
        data = SpectralData(data.s[: 2 * a.n], data.theta)
    rep = check_omega_hat(data)
    if not rep.admissible:
        _emit(json.dumps({"admissible": False, "monotone": rep.monotone,
                          "positive": rep.positive, "first_bad": rep.first_bad}), a.out)
        return 2
    sigma = inverse.reconstruct(data, a.method, M=a.M)
    err = inverse.roundtrip_error(data, sigma)
    out = {"sigma": sigma.to_dict(), "method": a.method, "N": data.N,
           "roundtrip_l2": err, "admissible": True}
    _emit(json.dumps(out), a.out)
    return 0


def cmd_perturb(a) -> int:
    sigma = make_grid_function(a.sigma, a.M)
    if a.kind == "eig":
        step = inverse.darboux_eigenvalue(sigma, a.n, a.xi)
    else:
        step = inverse.darboux_norming(sigma, a.n, a.xi)
    N = max(a.n + 4, 8)
    before = direct.spectral_map(sigma, N)
    after = direct.spectral_map(step.sigma_out, N)
    out = {"kind": a.kind, "n": a.n, "xi": a.xi, "sigma": step.sigma_out.to_dict(),
           "G_min": float(np.min(step.G.samples)),
           "lambdas_before": before.lambdas.tolist(), "lambdas_after": after.lambdas.tolist(),
           "alphas_before": before.alphas.tolist(), "alphas_after": after.alphas.tolist()}
    _emit(json.dumps(out), a.out)
    return 0


def cmd_stability(a) -> int:
    rep = lab.run_stability(a.theta, a.r, a.h, a.pairs, a.seed, N=a.n, M=a.M)
    _emit(rep.to_json(), a.out)
    if a.csv:
        Path(a.csv).write_text(rep.to_csv())
    return 0


def cmd_smoothing(a) -> int:
    rep = lab.run_smoothing(a.theta, a.samples, a.seed, N=a.n)
    _emit(rep.to_json(), a.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sturmspec", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="YAML or JSON file with default flag values")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, M=512):
        sp.add_argument("--M", type=int, default=M, help="grid resolution")
        sp.add_argument("--out", help="output file (default stdout)")
        return sp

    sp = common(sub.add_parser("direct", help="spectral data of a potential"))
    sp.add_argument("--sigma", default="zero")
    sp.add_argument("--n", type=int, default=16, help="number of eigenvalues")
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.set_defaults(func=cmd_direct)

    sp = common(sub.add_parser("derivcheck", help="Taylor remainders of the spectral map"))
    sp.add_argument("--sigma", default="zero")
    sp.add_argument("--f", default="cos(2t)")
    sp.add_argument("--t", default="1e-2,1e-3")
    sp.add_argument("--n", type=int, default=8)
    sp.set_defaults(func=cmd_derivcheck)

    sp = common(sub.add_parser("inverse", help="rebuild a potential from spectral data"))
    sp.add_argument("--data", required=False)
    sp.add_argument("--method", choices=["seq", "glm"], default="glm")
    sp.add_argument("--n", type=int, default=0, help="use only the first n pairs")
    sp.set_defaults(func=cmd_inverse)

    sp = common(sub.add_parser("perturb", help="change one spectral datum"))
    sp.add_argument("--sigma", default="zero")
    sp.add_argument("--kind", choices=["eig", "norm"], default="eig")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--xi", type=float, default=0.5)
    sp.set_defaults(func=cmd_perturb)

    sp = common(sub.add_parser("stability", help="empirical stability constants"))
    sp.add_argument("--theta", type=float, default=1.0)
    sp.add_argument("--r", type=float, default=1.0)
    sp.add_argument("--h", type=float, default=0.3)
    sp.add_argument("--pairs", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n", type=int, default=16)
    sp.add_argument("--csv", help="also write per-pair CSV here")
    sp.set_defaults(func=cmd_stability)

    sp = common(sub.add_parser("smoothing", help="decay of the nonlinear part"))
    sp.add_argument("--theta", type=float, default=0.5)
    sp.add_argument("--samples", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n", type=int, default=64)
    sp.set_defaults(func=cmd_smoothing)
    return p


def _config_defaults(path: str, command: str) -> dict:
    cfg = yaml.safe_load(Path(path).read_text()) or {}
    if not isinstance(cfg, dict):
        raise SystemExit("config file must hold a mapping")
    merged = {k: v for k, v in cfg.items() if not isinstance(v, dict)}
    merged.update(cfg.get(command, {}) or {})
    return {k.replace("-", "_"): v for k, v in merged.items()}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        defaults = _config_defaults(args.config, args.command)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(defaults) - known - {"config", "verbose", "command"}
        if unknown:
            parser.error(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**{k: v for k, v in defaults.items() if k in known})
        args = parser.parse_args(argv)
    if args.command == "inverse" and not args.data:
        parser.error("inverse needs --data (flag or config)")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
