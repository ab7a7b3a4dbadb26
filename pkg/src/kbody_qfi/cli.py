"""Command-line interface: ``kbody-qfi <command> [options]``.

Every command writes a CSV table or a JSON document, to ``--out`` or stdout.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .exceptions import DomainError, ResourceLimitError
from .product_opt import bound_b12, optimize_full, optimize_symmetric, scan_orders
from .spectrum import HamiltonianSpec, build_spectrum
from .witness import detect, gamma_scan, monte_carlo_violation

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RESOURCE = 3


def parse_n_range(text: str) -> list[int]:
    """``"3:10"`` -> [3, ..., 10] (inclusive); a bare integer is a single value."""
    try:
        if ":" in text:
            lo, hi = (int(t) for t in text.split(":"))
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:STOP, got {text!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return list(range(lo, hi + 1))


def parse_grid(text: str) -> np.ndarray:
    """``"start:stop:steps"`` -> ``steps`` evenly spaced points, both ends included."""
    try:
        start, stop, steps = text.split(":")
        start, stop, steps = float(start), float(stop), int(steps)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:STOP:STEPS, got {text!r}") from None
    if steps < 1:
        raise argparse.ArgumentTypeError("grid needs at least one step")
    if steps == 1:
        return np.array([start])
    return np.linspace(start, stop, steps)


def parse_orders(text: str) -> dict[int, float]:
    """``"1:1,2:0.5"`` -> {1: 1.0, 2: 0.5}; a bare order means weight 1."""
    out = {}
    try:
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            if ":" in item:
                k, g = item.split(":")
                out[int(k)] = float(g)
            else:
                out[int(item)] = 1.0
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected K:WEIGHT[,K:WEIGHT...], got {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("no orders given")
    return out


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return format(float(value), ".12g")


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def write_output(text: str, out) -> None:
    """Write to ``out`` atomically (temp file then rename), or to stdout."""
    if out is None or str(out) == "-":
        sys.stdout.write(text)
        return
    path = Path(out)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _spec_from_args(args) -> HamiltonianSpec:
    if args.spec_file:
        return HamiltonianSpec.from_json(Path(args.spec_file).read_text())
    if args.n is None:
        raise DomainError("--n is required unless --spec-file is given")
    return HamiltonianSpec(args.n, args.orders, axis=args.axis, normalized=not args.raw)


def _single_n(args) -> int:
    if args.n is not None:
        return args.n
    if args.n_range and len(args.n_range) == 1:
        return args.n_range[0]
    raise DomainError("--n is required")


def _n_values(args) -> list[int]:
    if args.n_range:
        return args.n_range
    if args.n is not None:
        return [args.n]
    raise DomainError("give --n or --n-range")


def _report(args, header, row, as_dict) -> str:
    if args.format == "csv":
        return render_csv(header, [row])
    return render_json(as_dict)


def cmd_spectrum(args) -> str:
    spectrum = build_spectrum(_spec_from_args(args))
    rows = [(e, w, d) for e, (w, d) in enumerate(zip(spectrum.omegas, spectrum.degeneracies))]
    if args.format == "json":
        return render_json({"n_qubits": spectrum.n_qubits, "norm_constant": spectrum.norm_constant,
                            "rows": [{"e": e, "omega": float(w), "degeneracy": int(d)} for e, w, d in rows]})
    return render_csv(["e", "omega", "degeneracy"], rows)


def cmd_bound(args) -> str:
    rows = [(n, bound_b12(n)) for n in _n_values(args)]
    if args.format == "json":
        return render_json([{"n": n, "bound": b} for n, b in rows])
    return render_csv(["n", "bound_b12"], rows)


def cmd_optimize(args) -> str:
    spectrum = build_spectrum(_spec_from_args(args))
    if args.method == "symmetric":
        report = optimize_symmetric(spectrum)
    else:
        report = optimize_full(spectrum, n_starts=args.starts, seed=args.seed)
    d = report.to_dict()
    header = ["best_qfi", "method", "stationarity_residual", "n_starts", "best_params"]
    row = [d["best_qfi"], d["method"], d["stationarity_residual"], d["n_starts"],
           " ".join(_fmt(p) for p in d["best_params"])]
    return _report(args, header, row, d)


def cmd_scan_k(args) -> str:
    rows = scan_orders(_n_values(args), k_max=args.k_max, n_starts=args.starts, seed=args.seed)
    if args.format == "json":
        return render_json([{"n": n, "k": k, "max_qfi": v} for n, k, v in rows])
    return render_csv(["n", "k", "max_qfi"], rows)


def cmd_scan_gamma(args) -> str:
    rows = gamma_scan(_single_n(args), args.gamma_grid, n_starts=args.starts, seed=args.seed)
    if args.format == "json":
        return render_json([r._asdict() for r in rows])
    return render_csv(["gamma3", "max_qfi", "bound", "violated"], rows)


def cmd_montecarlo(args) -> str:
    report = monte_carlo_violation(_single_n(args), samples=args.samples, seed=args.seed)
    d = report.to_dict()
    header = ["n_qubits", "samples", "violations", "frequency", "wilson_lo", "wilson_hi", "seed", "max_observed_qfi"]
    row = [d["n_qubits"], d["samples"], d["violations"], d["frequency"], *d["wilson_interval_95"], d["seed"],
           d["max_observed_qfi"]]
    return _report(args, header, row, d)


def cmd_detect(args) -> str:
    report = detect(args.qfi, _single_n(args))
    d = report.to_dict()
    return _report(args, ["n_qubits", "bound", "observed_qfi", "verdict"], list(d.values()), d)


COMMANDS = {
    "spectrum": (cmd_spectrum, "csv"),
    "bound": (cmd_bound, "csv"),
    "optimize": (cmd_optimize, "json"),
    "scan-k": (cmd_scan_k, "csv"),
    "scan-gamma": (cmd_scan_gamma, "csv"),
    "montecarlo": (cmd_montecarlo, "json"),
    "detect": (cmd_detect, "json"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kbody-qfi", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, ham=False, seed=None, starts=False):
        p.add_argument("--n", type=int)
        p.add_argument("--n-range", type=parse_n_range)
        p.add_argument("--out")
        p.add_argument("--format", choices=["csv", "json"])
        if ham:
            p.add_argument("--orders", type=parse_orders, default={1: 1.0})
            p.add_argument("--axis", choices=["x", "y", "z"], default="z")
            p.add_argument("--spec-file")
            p.add_argument("--raw", action="store_true", help="skip the norm-N/2 rescaling")
        if seed == "required":
            p.add_argument("--seed", type=int, required=True)
        elif seed == "default":
            p.add_argument("--seed", type=int, default=0)
        if starts:
            p.add_argument("--starts", type=int, default=100)
        return p

    common(sub.add_parser("spectrum", help="sector eigenvalues and degeneracies"), ham=True)
    common(sub.add_parser("bound", help="one-plus-two-body bound per N"))
    p = common(sub.add_parser("optimize", help="maximize Fisher information over product states"),
               ham=True, seed="default", starts=True)
    p.add_argument("--method", choices=["full", "symmetric"], default="full")
    p = common(sub.add_parser("scan-k", help="max product-state QFI per interaction order"),
               seed="default", starts=True)
    p.add_argument("--k-max", type=int, default=5)
    p = common(sub.add_parser("scan-gamma", help="three-body weight scan of the Ising example"),
               seed="default", starts=True)
    p.add_argument("--gamma-grid", type=parse_grid, default=parse_grid("0:1:21"))
    p = common(sub.add_parser("montecarlo", help="random violation frequency"), seed="required")
    p.add_argument("--samples", type=int, default=100_000)
    p = common(sub.add_parser("detect", help="verdict for an observed QFI value"))
    p.add_argument("--qfi", type=float, required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler, default_format = COMMANDS[args.command]
    if args.format is None:
        args.format = default_format
    if getattr(args, "samples", 1) < 1:
        parser.error("--samples must be >= 1")
    if getattr(args, "starts", 1) < 1:
        parser.error("--starts must be >= 1")
    try:
        text = handler(args)
    except ResourceLimitError as exc:
        print(f"kbody-qfi: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (DomainError, ValueError) as exc:
        print(f"kbody-qfi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    write_output(text, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
