"""Command-line front end.

Every verb writes CSV files into ``--out``. Each file starts with a comment
line ``# swapcool <version> config=<hash>``, followed by a header row; floats
are written with 17 significant digits. Files are written to a temporary
name and renamed into place.

Exit codes: 0 success, 2 configuration or parse error, 3 register too large.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .channel import NotErgodicError
from .coding import CodeMapError, compute_code_map, fidelity_down, fidelity_up, roundtrip_fidelity, save_code_map
from .cooling import cooling_trace, fit_time_step, relative_rms, shuffle_estimate
from .network import GraphParseError, SpinNetwork, load_graph, shipped_graph
from .protocol import ProtocolConfig, RegisterCapError
from .states import LABELS, haar_states, resolve_state

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAP = 3

FIG3_STATES = ("all_ones", "ghz", "mixed", "w")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- output


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence], config: dict) -> Path:
    """Atomically write a CSV with the provenance comment line and a header."""
    buf = io.StringIO()
    buf.write(f"# swapcool {__version__} config={config_hash(config)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    _atomic_write(path, buf.getvalue())
    return path


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


# ---------------------------------------------------------------- config helpers


def resolve_graph(value: str) -> Path:
    """A path, or the name of a bundled graph such as ``fig1_seven_spin``."""
    p = Path(value)
    if p.exists():
        return p
    bundled = shipped_graph(value)
    if bundled.exists():
        return bundled
    raise ConfigError(f"graph file {value!r} not found (and no bundled graph of that name)")


def _graph_config(path: Path) -> dict:
    return {"graph_sha256": hashlib.sha256(path.read_bytes()).hexdigest()}


def parse_t(value: str | None, allow_fit: bool) -> float | str | None:
    if value is None:
        return None
    if value == "fit":
        if not allow_fit:
            raise ConfigError("--t fit is only meaningful for fig4 and cool")
        return "fit"
    try:
        t = float(value)
    except ValueError:
        raise ConfigError(f"--t expects a positive number or 'fit', got {value!r}") from None
    if not t > 0:
        raise ConfigError("--t must be positive")
    return t


def parse_grid(value: str) -> np.ndarray:
    """``START:STOP:STEP`` (inclusive) or a comma-separated list."""
    try:
        if ":" in value:
            a, b, s = (float(x) for x in value.split(":"))
            n = int(np.floor((b - a) / s + 1e-9)) + 1
            grid = np.round(a + s * np.arange(n), 12)
        else:
            grid = np.array([float(x) for x in value.split(",")])
    except ValueError:
        raise ConfigError(f"bad --t-grid {value!r}") from None
    if grid.size == 0 or np.any(grid <= 0):
        raise ConfigError("--t-grid must contain positive values")
    return grid


def parse_sizes(value: str) -> list[int]:
    try:
        sizes = [int(x) for x in value.split(",")]
    except ValueError:
        raise ConfigError(f"bad --c-sizes {value!r}") from None
    return sizes


def _config(net: SpinNetwork, t, L: int = 1) -> ProtocolConfig:
    try:
        return ProtocolConfig(net, L, t)
    except RegisterCapError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------- verbs


def cmd_diagnose(args) -> list[Path]:
    gpath = resolve_graph(args.graph)
    net = load_graph(gpath)
    cfg = _config(net, parse_t(args.t, allow_fit=False))
    conf = {"verb": "diagnose", "t": cfg.t, **_graph_config(gpath)}
    out = Path(args.out)
    summary = []
    spectrum = []
    for name, diag in (("tau", cfg.diagnostics), ("tau_prime", cfg.diagnostics_prime)):
        summary.append(
            (name, cfg.t, diag.kappa, diag.kappa_fixed_block, diag.purity_of_fixed_point, diag.n_fixed, diag.ergodic_pure)
        )
        for i, w in enumerate(diag.eigenvalues):
            spectrum.append((name, i, w.real, w.imag, abs(w)))
        print(f"{name}: kappa={diag.kappa:.6g} purity={diag.purity_of_fixed_point:.12g} ergodic_pure={diag.ergodic_pure}")
    return [
        write_csv(
            out / "diagnose.csv",
            ["channel", "t", "kappa", "kappa_fixed_block", "fixed_point_purity", "n_fixed", "ergodic_pure"],
            summary,
            conf,
        ),
        write_csv(out / "spectrum.csv", ["channel", "index", "re", "im", "modulus"], spectrum, conf),
    ]


TRACE_HEADER = ["L", "p0", "avg_n", "eta", "estimator"]


def cmd_fig3(args) -> list[Path]:
    gpath = resolve_graph(args.graph)
    net = load_graph(gpath)
    cfg = _config(net, parse_t(args.t, allow_fit=False))
    Lmax = args.Lmax
    labels = list(FIG3_STATES) + (["vacuum"] if args.vacuum else [])
    files = []
    for label in labels:
        trace = cooling_trace(resolve_state(label, net), cfg, Lmax, label)
        conf = {"verb": "fig3", "t": cfg.t, "Lmax": Lmax, "initial": label, **_graph_config(gpath)}
        files.append(write_csv(Path(args.out) / f"fig3_{label}.csv", TRACE_HEADER, trace.rows(), conf))
        print(f"{label}: 1-P0 at L={Lmax} is {trace.one_minus_p0[-1]:.3e}")
    return files


def cmd_fig4(args) -> list[Path]:
    gpath = resolve_graph(args.graph)
    base = load_graph(gpath)
    t = parse_t(args.t if args.t is not None else "fit", allow_fit=True)
    grid = parse_grid(args.t_grid)
    Lmax = args.Lmax
    L = np.arange(Lmax + 1)
    files = []
    for c in parse_sizes(args.c_sizes):
        if not 1 <= c < base.n_qubits:
            raise ConfigError(f"|C| = {c} must satisfy 1 <= |C| < {base.n_qubits}")
        net = base.with_controlled(range(c))
        cfg = _config(net, None if t == "fit" else t)
        psi = resolve_state(args.initial, net)
        if t == "fit":
            fit = fit_time_step(psi, cfg, Lmax, grid)
            t_best, exact, est, rms = fit.t_best, fit.exact, fit.estimate, fit.relative_rms
        else:
            trace = cooling_trace(psi, cfg, Lmax)
            t_best, exact = cfg.t, trace.avg_n
            est = shuffle_estimate(exact[0], c, net.n_uncontrolled, L)
            rms = relative_rms(exact, est)
        conf = {
            "verb": "fig4",
            "t": t,
            "t_grid": grid.tolist() if t == "fit" else None,
            "Lmax": Lmax,
            "size_c": c,
            "initial": args.initial,
            **_graph_config(gpath),
        }
        rows = ((l, exact[l], est[l], t_best, rms) for l in L)
        files.append(write_csv(Path(args.out) / f"fig4_C{c}.csv", ["L", "exact", "estimator", "t_best", "rms"], rows, conf))
        print(f"|C|={c}: t={t_best:.6g} relative rms={rms:.4f}")
    return files


def cmd_cool(args) -> list[Path]:
    gpath = resolve_graph(args.graph)
    net = load_graph(gpath)
    t = parse_t(args.t, allow_fit=True)
    psi = resolve_state(args.initial, net)
    if t == "fit":
        t = fit_time_step(psi, _config(net, None), args.Lmax, parse_grid(args.t_grid)).t_best
    cfg = _config(net, t)
    trace = cooling_trace(psi, cfg, args.Lmax, args.initial)
    conf = {"verb": "cool", "t": cfg.t, "Lmax": args.Lmax, "initial": args.initial, **_graph_config(gpath)}
    stem = Path(args.initial[1:]).stem if args.initial.startswith("@") else args.initial
    return [write_csv(Path(args.out) / f"cool_{stem}.csv", TRACE_HEADER, trace.rows(), conf)]


def cmd_roundtrip(args) -> list[Path]:
    gpath = resolve_graph(args.graph)
    net = load_graph(gpath)
    cfg = _config(net, parse_t(args.t, allow_fit=False), args.L)
    cfg.layout.check_cap(cfg.register_cap)
    down = compute_code_map(cfg, "forward")
    up = compute_code_map(cfg, "reverse")
    rng = np.random.default_rng(np.random.PCG64(args.seed))
    d = cfg.layout.d_system
    vac = np.zeros((1, d), dtype=complex)
    vac[0, 0] = 1
    states = np.vstack([vac, haar_states(rng, d, args.n_states)])
    rows = []
    for i, psi in enumerate(states):
        fd = fidelity_down(psi, cfg, down)
        fu = fidelity_up(psi, cfg, up)
        fr = roundtrip_fidelity(psi, cfg, down, up)
        rows.append((i, "vacuum" if i == 0 else "haar", fd.fidelity, fu.fidelity, fr, fd.bound, fu.bound))
    conf = {"verb": "roundtrip", "t": cfg.t, "L": cfg.L, "n_states": args.n_states, "seed": args.seed, **_graph_config(gpath)}
    header = ["index", "kind", "f_down", "f_up", "f_roundtrip", "bound_down", "bound_up"]
    return [write_csv(Path(args.out) / f"roundtrip_L{cfg.L}.csv", header, rows, conf)]


def cmd_codemap(args) -> list[Path]:
    gpath = resolve_graph(args.graph)
    net = load_graph(gpath)
    cfg = _config(net, parse_t(args.t, allow_fit=False), args.L)
    cfg.layout.check_cap(cfg.register_cap)
    out = Path(args.out)
    files = []
    directions = ("forward", "reverse") if args.direction == "both" else (args.direction,)
    for direction in directions:
        code = compute_code_map(cfg, direction)
        path = out / f"codemap_{direction}_L{cfg.L}.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        save_code_map(code, path)
        files.append(path)
        print(f"{direction}: 1-eta0={code.one_minus_eta0:.3e} residual={code.residual:.3e}")
    return files


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="swapcool", description="Swap-stage cooling and state transfer on spin networks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, graph, t_help="time step (default: graph's t line, else 1/max coupling)"):
        sp.add_argument("--graph", default=graph, help=f"graph file or bundled name (default {graph})")
        sp.add_argument("--t", default=None, help=t_help)
        sp.add_argument("--out", default=".", help="output directory")

    sp = sub.add_parser("diagnose", help="spectrum, kappa and ergodicity of both channels")
    common(sp, "fig1_seven_spin")
    sp.set_defaults(func=cmd_diagnose)

    sp = sub.add_parser("fig3", help="P0 traces for the four reference initial states")
    common(sp, "fig1_seven_spin")
    sp.add_argument("--Lmax", type=int, default=100)
    sp.add_argument("--vacuum", action="store_true", help="add a vacuum sanity trace")
    sp.set_defaults(func=cmd_fig3)

    sp = sub.add_parser("fig4", help="exact <N> against the random-shuffle estimate")
    common(sp, "chain7", t_help="REAL or 'fit' (default fit)")
    sp.add_argument("--Lmax", type=int, default=15)
    sp.add_argument("--c-sizes", default="1,2,3")
    sp.add_argument("--initial", default="all_ones")
    sp.add_argument("--t-grid", default="0.05:3:0.05", help="START:STOP:STEP or comma list")
    sp.set_defaults(func=cmd_fig4)

    sp = sub.add_parser("cool", help="one cooling trace")
    common(sp, "fig1_seven_spin", t_help="REAL or 'fit'")
    sp.add_argument("--Lmax", type=int, default=100)
    sp.add_argument("--initial", default="all_ones", help=f"one of {', '.join(LABELS)} or @FILE")
    sp.add_argument("--t-grid", default="0.05:3:0.05")
    sp.set_defaults(func=cmd_cool)

    sp = sub.add_parser("roundtrip", help="download, upload and round-trip fidelities")
    common(sp, "pair")
    sp.add_argument("--L", type=int, default=12)
    sp.add_argument("--n-states", type=int, default=30)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_roundtrip)

    sp = sub.add_parser("codemap", help="compute and save code maps as JSON")
    common(sp, "pair")
    sp.add_argument("--L", type=int, default=12)
    sp.add_argument("--direction", choices=("forward", "reverse", "both"), default="both")
    sp.set_defaults(func=cmd_codemap)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    for name in ("Lmax", "L", "n_states"):
        if getattr(args, name, 1) < (0 if name == "Lmax" else 1):
            print(f"swapcool: error: --{name.replace('_', '-')} out of range", file=sys.stderr)
            return EXIT_CONFIG
    try:
        files = args.func(args)
    except RegisterCapError as exc:
        print(f"swapcool: register too large: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (GraphParseError, ConfigError, NotErgodicError, CodeMapError, ValueError, OSError) as exc:
        print(f"swapcool: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
