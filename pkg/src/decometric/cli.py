"""Command-line front end.

Subcommands: kernel, dmt, pairs, sweep, dfs, exact, modesum.  Data goes to
files (or stdout), errors to stderr.  Every output file is accompanied by a
sidecar manifest (<file>.manifest.json) recording the config digest, the
command, its parameters, the tool version, and a timestamp; the numeric
payload itself is a pure function of config + flags, so reruns are
byte-identical.

Exit codes: 0 success, 1 usage, 2 configuration, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .ensemble import iter_class_points, min_decoherence, pair_statistics
from .exact import iter_class_comparison
from .kernels import QuadratureError, pair_kernel, phase_kernel, self_kernel
from .metric import MetricTensor, build_metric_tensor, psd_check, total_decoherence
from .model import (
    DEFAULT_ALPHA,
    BathParams,
    ConfigError,
    DipoleOrientationError,
    config_to_dict,
    load_config,
    pair_geometry,
)
from .modesum import ModeGrid, dephasing_mode_sum, phase_mode_sum

USAGE_EXIT = 1
CONFIG_EXIT = 2
NUMERIC_EXIT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _digest(doc: dict) -> str:
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _manifest(command: str, parameters: dict, config_doc: dict | None) -> dict:
    return {
        "config_digest": _digest(config_doc) if config_doc is not None else "",
        "command": command,
        "parameters": {k: v for k, v in sorted(parameters.items())},
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def _write_manifest(data_path: Path, manifest: dict) -> None:
    side = data_path.with_name(data_path.name + ".manifest.json")
    side.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _write_json(path: Path | None, payload: dict, manifest: dict) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)
        _write_manifest(path, manifest)


def _write_csv(path: Path, header: list[str], rows, manifest: dict) -> None:
    with path.open("w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    _write_manifest(path, manifest)


def _parse_range(text: str, what: str, parser: _Parser) -> np.ndarray:
    try:
        lo, hi, num = text.split(":")
        lo, hi, num = float(lo), float(hi), int(num)
    except ValueError:
        parser.error(f"{what} must be LO:HI:N, got {text!r}")
    if num < 1 or hi < lo:
        parser.error(f"{what} must satisfy LO <= HI and N >= 1, got {text!r}")
    return np.linspace(lo, hi, num)


def _load(args) -> tuple:
    parsed = load_config(args.config)
    return parsed, config_to_dict(parsed)


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_kernel(args, parser: _Parser) -> int:
    bath = BathParams(kappa=args.kappa, alpha=args.alpha, theta_T=args.temperature)
    params = {
        "t": args.t, "r": args.r, "theta": args.theta, "kappa": args.kappa,
        "alpha": args.alpha, "temperature": args.temperature,
        "t_range": args.t_range, "r_range": args.r_range,
    }
    if args.t_range or args.r_range:
        if not (args.t_range and args.r_range):
            parser.error("grid mode needs both --t-range and --r-range")
        if args.out is None:
            parser.error("grid mode needs --out for the CSV surface")
        ts = _parse_range(args.t_range, "--t-range", parser)
        rs = _parse_range(args.r_range, "--r-range", parser)
        manifest = _manifest("kernel", params, None)

        def rows():
            for t in ts:
                for r in rs:
                    if r == 0.0:
                        value = self_kernel(float(t), bath).value
                    else:
                        value = pair_kernel(float(t), float(r), args.theta, bath).value
                    yield (float(t), float(r), value)

        _write_csv(Path(args.out), ["t", "r", "f"], rows(), manifest)
        print(f"wrote {len(ts) * len(rs)} surface points to {args.out}")
        return 0

    if args.r == 0.0:
        kv = self_kernel(args.t, bath)
    else:
        kv = pair_kernel(args.t, args.r, args.theta, bath)
    print(f"f = {_fmt(kv.value)}  regime = {kv.regime}")
    if args.out:
        payload = {"f": kv.value, "regime": kv.regime, "parameters": params}
        _write_json(Path(args.out), payload, _manifest("kernel", params, None))
    return 0


def _cmd_dmt(args, parser: _Parser) -> int:
    parsed, doc = _load(args)
    tensor = build_metric_tensor(parsed.atoms, parsed.bath, args.t)
    min_eig, ok = psd_check(tensor)
    d_tot = total_decoherence(tensor)
    payload = tensor.to_dict()
    payload["metadata"] = {
        "dipole": list(parsed.dipole),
        "trace": tensor.trace,
        "total_decoherence": d_tot,
        "min_eigenvalue": min_eig,
        "psd_ok": ok,
    }
    manifest = _manifest("dmt", {"t": args.t}, doc)
    _write_json(Path(args.out) if args.out else None, payload, manifest)
    print(f"trace = {_fmt(tensor.trace)}  d_tot = {_fmt(d_tot)}  min_eig = {_fmt(min_eig)}")
    return 0


def _cmd_pairs(args, parser: _Parser) -> int:
    parsed, doc = _load(args)
    if args.identity:
        n = parsed.atoms.n_selected
        tensor = MetricTensor(args.t if args.t > 0 else 1.0, np.eye(n))
    else:
        tensor = build_metric_tensor(parsed.atoms, parsed.bath, args.t)
    if tensor.n > 20:
        raise ValueError(f"pair enumeration supports n <= 20, got {tensor.n}")
    stats = pair_statistics(tensor, bins=args.bins, threads=args.threads)
    params = {"t": args.t, "bins": args.bins, "identity": args.identity}
    manifest = _manifest("pairs", params, doc)
    payload = stats.to_dict()
    payload["metadata"] = {
        "pair_convention": "unordered distinct codeword pairs",
        "dipole": list(parsed.dipole),
        "total_decoherence": total_decoherence(tensor),
    }
    _write_json(Path(args.out) if args.out else None, payload, manifest)
    if args.scatter:
        rows = (
            (int(h), float(d), int(m))
            for block in iter_class_points(tensor)
            for h, d, m in block
        )
        _write_csv(Path(args.scatter), ["hamming", "decoherence", "multiplicity"], rows, manifest)
    print(f"n_pairs = {stats.n_pairs}  mean = {_fmt(stats.mean)}  min = {_fmt(stats.min)}  max = {_fmt(stats.max)}")
    return 0


def _cmd_sweep(args, parser: _Parser) -> int:
    parsed, doc = _load(args)
    if parsed.lattice is None:
        raise ConfigError("sweep requires a lattice configuration")
    if args.out is None:
        parser.error("sweep needs --out for the CSV table")
    spacings = np.linspace(args.spacing_min, args.spacing_max, args.steps)
    params = {
        "t": args.t, "spacing_min": args.spacing_min,
        "spacing_max": args.spacing_max, "steps": args.steps, "bins": args.bins,
    }
    manifest = _manifest("sweep", params, doc)

    def rows():
        for a in spacings:
            cfg = parsed.with_spacing(float(a))
            tensor = build_metric_tensor(cfg.atoms, cfg.bath, args.t)
            st = pair_statistics(tensor, bins=args.bins, threads=args.threads)
            yield (float(a), st.min, st.max, st.mean, st.stddev)

    _write_csv(Path(args.out), ["spacing", "min", "max", "mean", "stddev"], rows(), manifest)
    print(f"wrote {len(spacings)} spacing rows to {args.out}")
    return 0


def _cmd_dfs(args, parser: _Parser) -> int:
    parsed, doc = _load(args)
    tensor = build_metric_tensor(parsed.atoms, parsed.bath, args.t)
    delta, value = min_decoherence(tensor, mode=args.mode)
    payload = {
        "difference_vector": [int(v) for v in delta],
        "value": value,
        "mode": args.mode,
        "t": args.t,
    }
    manifest = _manifest("dfs", {"t": args.t, "mode": args.mode}, doc)
    _write_json(Path(args.out) if args.out else None, payload, manifest)
    print(f"min decoherence = {_fmt(value)}  delta = {''.join('+0-'[1 - int(v)] for v in delta)}")
    return 0


def _cmd_exact(args, parser: _Parser) -> int:
    parsed, doc = _load(args)
    if args.out is None:
        parser.error("exact needs --out for the per-class CSV")
    cfg, bath, t = parsed.atoms, parsed.bath, args.t
    max_defect = 0.0

    def rows():
        nonlocal max_defect
        for ham, one_minus_mag, quad in iter_class_comparison(cfg, bath, t):
            for k in range(len(ham)):
                defect = float(abs(one_minus_mag[k] - quad[k]))
                max_defect = max(max_defect, defect)
                yield (int(ham[k]), float(one_minus_mag[k]), float(quad[k]), defect)

    manifest = _manifest("exact", {"t": args.t}, doc)
    _write_csv(
        Path(args.out),
        ["hamming", "one_minus_magnitude", "quadratic_decoherence", "defect"],
        rows(),
        manifest,
    )
    print(f"max defect = {_fmt(max_defect)}")
    return 0


def _cmd_modesum(args, parser: _Parser) -> int:
    parsed, doc = _load(args)
    cfg, bath = parsed.atoms, parsed.bath
    i, j = args.i, args.j
    if j is None:
        j = 1 if cfg.n_atoms > 1 else 0
    if args.n_max is not None:
        grid = ModeGrid(box_L=args.box_L, n_max=args.n_max, kappa=bath.kappa)
    else:
        grid = ModeGrid.for_box(args.box_L, bath.kappa)
    f_sum = dephasing_mode_sum(args.t, cfg, i, j, grid, theta_T=bath.theta_T, alpha=bath.alpha)
    phi_sum = phase_mode_sum(args.t, cfg, i, j, grid, alpha=bath.alpha)

    r, theta = pair_geometry(cfg, i, j)
    if r == 0.0:
        f_cont = self_kernel(args.t, bath).value
    else:
        f_cont = pair_kernel(args.t, r, theta, bath).value
    phi_cont = phase_kernel(args.t, r, theta, bath).value

    payload = {
        "t": args.t, "i": i, "j": j,
        "box_L": grid.box_L, "n_max": grid.n_max,
        "f_modesum": f_sum, "f_continuum": f_cont,
        "phi_modesum": phi_sum, "phi_continuum": phi_cont,
        "f_rel_diff": abs(f_sum - f_cont) / max(abs(f_cont), 1e-300),
        "phi_rel_diff": abs(phi_sum - phi_cont) / max(abs(phi_cont), 1e-300),
    }
    params = {"t": args.t, "box_L": args.box_L, "n_max": args.n_max, "i": i, "j": j}
    _write_json(Path(args.out) if args.out else None, payload, _manifest("modesum", params, doc))
    print(f"f: sum = {_fmt(f_sum)} continuum = {_fmt(f_cont)}   "
          f"phi: sum = {_fmt(phi_sum)} continuum = {_fmt(phi_cont)}")
    return 0


# ---------------------------------------------------------------------------
# parser wiring
# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="decometric", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"decometric {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=str, default=None, help="output file (default: stdout)")
    common.add_argument("--threads", type=int, default=1, help="worker count (results are thread-count independent)")
    common.add_argument("--seed", type=int, default=0, help="reserved for tie-breaking; current strategies are deterministic")

    withcfg = argparse.ArgumentParser(add_help=False, parents=[common])
    withcfg.add_argument("--config", type=str, required=True, help="JSON configuration path")
    withcfg.add_argument("--t", type=float, required=True, help="evaluation time (reduced units)")

    k = sub.add_parser("kernel", parents=[common], help="evaluate the pair dephasing kernel")
    k.add_argument("--t", type=float, default=0.0)
    k.add_argument("--r", type=float, default=0.0)
    k.add_argument("--theta", type=float, default=math.pi / 2)
    k.add_argument("--kappa", type=float, required=True)
    k.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    k.add_argument("--temperature", type=float, default=0.0)
    k.add_argument("--t-range", dest="t_range", type=str, default=None, help="LO:HI:N grid over t")
    k.add_argument("--r-range", dest="r_range", type=str, default=None, help="LO:HI:N grid over r")
    k.set_defaults(handler=_cmd_kernel)

    d = sub.add_parser("dmt", parents=[withcfg], help="assemble and serialize the metric tensor")
    d.set_defaults(handler=_cmd_dmt)

    p = sub.add_parser("pairs", parents=[withcfg], help="codeword-pair statistics")
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--scatter", type=str, default=None, help="CSV path for per-class scatter points")
    p.add_argument("--identity", action="store_true", help="use the identity tensor (calibration)")
    p.set_defaults(handler=_cmd_pairs)

    s = sub.add_parser("sweep", parents=[withcfg], help="lattice-spacing sweep of pair statistics")
    s.add_argument("--spacing-min", dest="spacing_min", type=float, required=True)
    s.add_argument("--spacing-max", dest="spacing_max", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--bins", type=int, default=50)
    s.set_defaults(handler=_cmd_sweep)

    f = sub.add_parser("dfs", parents=[withcfg], help="minimum-decoherence difference vector")
    f.add_argument("--mode", choices=("exhaustive", "branch_and_bound"), default="exhaustive")
    f.set_defaults(handler=_cmd_dfs)

    e = sub.add_parser("exact", parents=[withcfg], help="exact-evolution vs quadratic comparison")
    e.set_defaults(handler=_cmd_exact)

    m = sub.add_parser("modesum", parents=[withcfg], help="discrete mode-sum oracle vs continuum kernels")
    m.add_argument("--box-L", dest="box_L", type=float, required=True)
    m.add_argument("--n-max", dest="n_max", type=int, default=None)
    m.add_argument("--i", type=int, default=0)
    m.add_argument("--j", type=int, default=None)
    m.set_defaults(handler=_cmd_modesum)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args, parser)
    except ConfigError as exc:
        print(f"decometric: config error: {exc}", file=sys.stderr)
        return CONFIG_EXIT
    except FileNotFoundError as exc:
        print(f"decometric: config error: {exc}", file=sys.stderr)
        return CONFIG_EXIT
    except (QuadratureError, DipoleOrientationError, ValueError, IndexError) as exc:
        print(f"decometric: numeric error: {exc}", file=sys.stderr)
        return NUMERIC_EXIT


if __name__ == "__main__":
    raise SystemExit(main())
