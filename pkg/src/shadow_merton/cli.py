"""Command-line driver: ``shadow-merton {solve,expand,simulate,value,verify}``.

Results are JSON documents written to stdout or ``--out``.  Each result
carries the id of a run manifest (command, parameters, configuration, tool
version and seed); with ``--out`` the manifest itself, including timestamps
and a digest of the result, is written next to it as ``<out>.manifest.json``.
The result document contains no timestamps, so equal manifests give
byte-identical results.

Exit codes: 0 success, 1 a verification check failed, 2 the free-boundary
bracket could not be found, 3 a solver tolerance was not met, 64 usage or
parameter error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import sys
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

from .errors import BracketingFailed, ParameterError, ShadowMertonError, ToleranceNotMet

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BRACKET = 2
EXIT_TOLERANCE = 3
EXIT_USAGE = 64

PARAM_KEYS = ("mu", "sigma", "delta", "lambda")
CONFIG_KEYS = {
    "mu": float, "sigma": float, "delta": float, "lambda": float,
    "eta_b": float, "eta_s": float, "s0": float, "order": int, "paths": int,
    "horizon": float, "dt": float, "seed": int, "tol": float, "convention": str,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 by default, which we reserve
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # running from a source tree
        return "0+unknown"


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def dumps(obj) -> str:
    """JSON text of a result.  Floats use the shortest repr that round-trips."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


@dataclass
class RunManifest:
    command: str
    params: dict
    config: dict
    seed: int | None
    version: str = field(default_factory=tool_version)
    started: str = ""
    finished: str = ""
    output_digests: dict = field(default_factory=dict)

    @property
    def manifest_id(self) -> str:
        key = {
            "command": self.command,
            "params": self.params,
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
        }
        return hashlib.sha256(_canonical(key).encode()).hexdigest()[:16]

    def to_json(self) -> dict:
        return {
            "manifest_id": self.manifest_id,
            "command": self.command,
            "params": self.params,
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "timestamps": {"started": self.started, "finished": self.finished},
            "output_digests": dict(self.output_digests),
        }


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


# -- argument handling ---------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--mu", type=float)
    g.add_argument("--sigma", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--lambda", dest="lambda_", type=float, metavar="LAMBDA")
    g.add_argument("--convention", choices=("paper", "js"), default=None,
                   help="spread convention of --lambda and of the expansions (default paper)")
    g.add_argument("--config", type=Path, help="JSON file with default values for any flag")
    g.add_argument("--out", type=Path, help="write the result here instead of stdout")
    g.add_argument("--tol", type=float, default=None, help="solver tolerance (default 1e-10)")


def _endowment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eta-b", dest="eta_b", type=float)
    p.add_argument("--eta-s", dest="eta_s", type=float)
    p.add_argument("--s0", type=float)


def _sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--paths", type=int)
    p.add_argument("--horizon", type=float, help="default 20/delta")
    p.add_argument("--dt", type=float, help="default 1e-3/delta")
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shadow-merton", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve the free-boundary problem for c, s_bar and g")
    _common(p)
    p.add_argument("--grid-stride", type=int, default=64, help="emit every n-th grid node")

    p = sub.add_parser("expand", help="series coefficients in lambda^(1/3)")
    _common(p)
    _endowment_flags(p)
    p.add_argument("--order", type=int)
    p.add_argument("--exact", action="store_true", help="rational arithmetic where possible")

    p = sub.add_parser("simulate", help="Monte Carlo estimate of the expected utility")
    _common(p)
    _endowment_flags(p)
    _sim_flags(p)
    p.add_argument("--dump-paths", type=Path, metavar="DIR", help="write per-path CSV files to DIR")
    p.add_argument("--dump-count", type=int, default=3, help="number of paths to dump (default 3)")
    p.add_argument("--antithetic", action="store_true")

    p = sub.add_parser("value", help="value function of the problem with costs")
    _common(p)
    _endowment_flags(p)
    p.add_argument("--grid-stride", type=int, default=64)

    p = sub.add_parser("verify", help="run the invariant and consistency checks")
    _common(p)
    _endowment_flags(p)
    _sim_flags(p)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--quick", action="store_true", help="deterministic checks only (no Monte Carlo)")
    mode.add_argument("--dual", action="store_true", help="only the dual martingale checks")
    p.add_argument("--perturb-c", type=float, default=0.0, metavar="FRACTION",
                   help="fault injection: multiply the solved c by (1 + FRACTION)")
    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    """Flag values, falling back to the ``--config`` JSON file."""
    values: dict = {}
    if args.config is not None:
        try:
            raw = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a JSON object")
        for k, v in raw.items():
            key = k.replace("-", "_")
            if key == "lam":
                key = "lambda"
            if key not in CONFIG_KEYS:
                raise UsageError(f"unknown config key {k!r}")
            values[key] = CONFIG_KEYS[key](v)
    for key in CONFIG_KEYS:
        attr = "lambda_" if key == "lambda" else key
        v = getattr(args, attr, None)
        if v is not None:
            values[key] = v
    return values


def _params(values: dict):
    from .model import ModelParams, lambda_convention_convert

    missing = [k for k in PARAM_KEYS if k not in values]
    if missing:
        raise UsageError("missing required flag(s): " + ", ".join("--" + k for k in missing))
    lam = values["lambda"]
    if values.get("convention") == "js":
        lam = lambda_convention_convert(lam, "from-symmetric")
    return ModelParams(values["mu"], values["sigma"], values["delta"], lam)


def _endowment(values: dict, params):
    from .model import Endowment

    s0 = values.get("s0", 1.0)
    if "eta_b" not in values and "eta_s" not in values:
        return Endowment.on_merton_line(params, 1.0, s0)
    return Endowment(values.get("eta_b", 0.0), values.get("eta_s", 0.0), s0)


def _sim_config(values: dict, params, antithetic: bool = False):
    from .simulation import SimConfig

    delta = float(params.delta)
    return SimConfig(
        horizon=values.get("horizon", 20.0 / delta),
        dt=values.get("dt", 1e-3 / delta),
        paths=values.get("paths", 100_000),
        seed=values.get("seed", 0),
        antithetic=antithetic,
    )


def _sim_dict(cfg) -> dict:
    return {"horizon": cfg.horizon, "dt": cfg.dt, "paths": cfg.paths, "antithetic": cfg.antithetic}


# -- commands -----------------------------------------------------------------------


def cmd_solve(args, values) -> tuple[dict, RunManifest, int]:
    from .free_boundary import solve_free_boundary

    params = _params(values)
    tol = values.get("tol", 1e-10)
    manifest = RunManifest("solve", params.to_dict(), {"tol": tol}, None)
    sol = solve_free_boundary(params, tol=tol)
    out = sol.to_json(grid_stride=args.grid_stride)
    out.setdefault("params", params.to_dict())
    return out, manifest, EXIT_OK


def cmd_expand(args, values):
    from .asymptotics import DEFAULT_ORDER, expand_all

    params = _params(values)
    order = values.get("order", DEFAULT_ORDER)
    if order < 1:
        raise UsageError("--order must be >= 1")
    endowment = _endowment(values, params)
    convention = values.get("convention", "paper")
    cfg = {"order": order, "convention": convention, "exact": bool(args.exact), "endowment": endowment.to_dict()}
    manifest = RunManifest("expand", params.to_dict(), cfg, None)
    bundle = expand_all(order, params, endowment, convention=convention, exact=args.exact)
    out = bundle.to_json()
    out["table"] = bundle.table().splitlines()
    return out, manifest, EXIT_OK


def cmd_value(args, values):
    from .free_boundary import solve_free_boundary
    from .model import merton_value_frictionless
    from .value import solve_w, value_at

    params = _params(values)
    tol = values.get("tol", 1e-10)
    endowment = _endowment(values, params)
    manifest = RunManifest("value", params.to_dict(), {"tol": tol, "endowment": endowment.to_dict()}, None)
    sol = solve_free_boundary(params, tol=tol)
    vf = solve_w(sol)
    out = vf.to_json(grid_stride=args.grid_stride)
    out["value"] = value_at(vf, endowment)
    out["diagnostics"] = {
        "residuals": dict(vf.residuals),
        "frictionless_value": merton_value_frictionless(params, endowment),
        "c": sol.c,
        "s_bar": sol.s_bar,
    }
    return out, manifest, EXIT_OK


def cmd_simulate(args, values):
    from .free_boundary import solve_free_boundary
    from .simulation import StrategyPath, mc_expected_utility, path_table, simulate_path
    from .value import solve_w, value_at

    params = _params(values)
    endowment = _endowment(values, params)
    cfg = _sim_config(values, params, args.antithetic)
    manifest = RunManifest(
        "simulate", params.to_dict(), {**_sim_dict(cfg), "endowment": endowment.to_dict()}, cfg.seed
    )
    sol = solve_free_boundary(params, tol=values.get("tol", 1e-10))
    vf = solve_w(sol)
    est = mc_expected_utility(cfg, sol, endowment, vf)
    out = est.to_json()
    out["value_at"] = value_at(vf, endowment)
    if args.dump_paths is not None:
        args.dump_paths.mkdir(parents=True, exist_ok=True)
        files = []
        for k in range(min(args.dump_count, cfg.paths)):
            rp, sp = simulate_path(cfg, sol, endowment, path=k)
            path = args.dump_paths / f"path_{k:05d}.csv"
            with path.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["# manifest_id", manifest.manifest_id])
                w.writerow(StrategyPath.CSV_COLUMNS)
                for row in path_table(rp, sp):
                    w.writerow([repr(float(v)) for v in row])
            files.append(path.name)
        out["dumped_paths"] = files
    return out, manifest, EXIT_OK


def cmd_verify(args, values):
    from .verify import run_checks

    params = _params(values)
    endowment = _endowment(values, params)
    cfg = _sim_config(values, params)
    mode = "quick" if args.quick else "dual" if args.dual else "full"
    manifest = RunManifest(
        "verify",
        params.to_dict(),
        {"mode": mode, "perturb_c": args.perturb_c, **_sim_dict(cfg), "endowment": endowment.to_dict()},
        None if args.quick else cfg.seed,
    )
    report = run_checks(params, endowment, cfg, mode=mode, perturb_c=args.perturb_c)
    return report, manifest, EXIT_OK if report["pass"] else EXIT_CHECK_FAILED


COMMANDS = {
    "solve": cmd_solve,
    "expand": cmd_expand,
    "value": cmd_value,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def _emit(result: dict, manifest: RunManifest, out: Path | None) -> None:
    result = {"manifest_id": manifest.manifest_id, **result}
    text = dumps(result)
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    manifest.output_digests[out.name] = hashlib.sha256(text.encode()).hexdigest()
    manifest.finished = _now()
    Path(str(out) + ".manifest.json").write_text(dumps(manifest.to_json()))


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = _now()
    try:
        values = _merge_config(args)
        result, manifest, code = COMMANDS[args.command](args, values)
    except (UsageError, ParameterError) as exc:
        print(f"shadow-merton: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BracketingFailed as exc:
        print(json.dumps({"error": "BracketingFailed", "message": str(exc),
                          "scanned": [[c, v] for c, v in exc.scanned]}, indent=2), file=sys.stderr)
        return EXIT_BRACKET
    except ToleranceNotMet as exc:
        print(json.dumps({"error": "ToleranceNotMet", "message": str(exc),
                          "residuals": exc.residuals}, indent=2), file=sys.stderr)
        return EXIT_TOLERANCE
    except ShadowMertonError as exc:
        print(f"shadow-merton: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    manifest.started = started
    _emit(result, manifest, args.out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
