"""Command-line front end: ``corrsense {matrix,qfi,sweep,verify}``.

Every run writes ``manifest.json`` next to its outputs. Exit codes are 0 on
success, 1 when a verification or sweep verdict fails, 2 for bad arguments,
3 for a non-PSD coefficient matrix and 4 for an exponent outside the
supported window.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (QubitRegisterState, evolve_markovian, evolve_spatiotemporal, load_state_txt,
                       markovian_xi_derivative, spatiotemporal_xi_derivative)
from .errors import PSDViolation, UnsupportedExponent
from .noise_model import PowerLawSpatialModel, build_dephasing_matrix, save_matrix_csv
from .pulse_filter import (PulseSequence, SpectralModel, check_exponent, coefficient_closed_form,
                           golden_section_max, optimize_shot_time)
from .qfi import QfiMethod, QfiResult, fq_short_time, qfi_sld
from .scaling import SweepConfig, summary_json, sweep_markovian_advantage, sweep_nonmarkovian_advantage, \
    verdict, write_sweep_csv
from .verify import SUITES, report, run_suite

OUT_ENV = "CORRSENSE_OUT"
EXIT_OK, EXIT_VERIFY, EXIT_ARGS, EXIT_PSD, EXIT_REGIME = 0, 1, 2, 3, 4


class ArgumentError(ValueError):
    pass


def _positive(kind):
    def parse(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
        return value
    return parse


def _thetas(text):
    try:
        values = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"pulse times must be comma-separated numbers: {text}") from exc
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corrsense", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"corrsense {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None,
                        help=f"output directory (default: ${OUT_ENV} or the current directory)")
    common.add_argument("--threads", type=_positive(int), default=1, help="worker cap")
    common.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("matrix", parents=[common], help="build the coefficient matrix")
    m.add_argument("--n", type=_positive(int), required=True)
    m.add_argument("--alpha", type=_positive(float), required=True)
    m.add_argument("--xi", type=_positive(float), default=1.0)
    m.add_argument("--diag-scale", type=_positive(float), default=2.0)
    m.add_argument("--gamma", type=_positive(float), default=1.0)

    q = sub.add_parser("qfi", parents=[common], help="QFI rate of a probe state")
    q.add_argument("--state", required=True, help="ghz, plus-product or file:PATH")
    q.add_argument("--n", type=_positive(int), required=True)
    q.add_argument("--alpha", type=_positive(float), required=True)
    q.add_argument("--xi", type=_positive(float), default=1.0)
    q.add_argument("--gamma", type=_positive(float), default=1.0)
    q.add_argument("--diag-scale", type=_positive(float), default=2.0)
    q.add_argument("--p", type=float, default=None, help="spectral exponent; enables the 1/f^p model")
    q.add_argument("--pulses", type=_thetas, default=(0.5,), help="fractional pi-pulse times")
    q.add_argument("--time", type=float, default=None, help="shot time for a finite-time QFI")

    s = sub.add_parser("sweep", parents=[common], help="advantage scaling in N")
    s.add_argument("--alpha", type=_positive(float), required=True)
    s.add_argument("--p", type=float, default=0.0)
    s.add_argument("--n-min", type=_positive(int), default=16)
    s.add_argument("--n-max", type=_positive(int), default=4096)
    s.add_argument("--points", type=int, default=9)
    s.add_argument("--xi", type=_positive(float), default=1.0)
    s.add_argument("--diag-scale", type=_positive(float), default=2.0)
    s.add_argument("--pulses", type=_thetas, default=(0.5,))

    v = sub.add_parser("verify", parents=[common], help="oracle check batteries")
    v.add_argument("--suite", choices=SUITES + ("all",), required=True)
    return parser


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV, "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, args, argv, outputs, started: float, exit_code: int) -> None:
    params = {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(args).items()}
    manifest = {
        "command": args.command,
        "argv": list(argv),
        "parameters": params,
        "seed": args.seed,
        "threads": args.threads,
        "tool_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "outputs": [str(p) for p in outputs],
        "exit_code": exit_code,
        "wall_time_s": round(time.perf_counter() - started, 3),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _fmt(x: float) -> float:
    return float(f"{x:.12g}")


def cmd_matrix(args, out: Path) -> tuple:
    model = PowerLawSpatialModel(args.n, args.alpha, args.xi, args.diag_scale)
    A = build_dephasing_matrix(model, args.gamma)
    w = np.linalg.eigvalsh(A.entries)
    csv_path = out / "matrix.csv"
    json_path = out / "eigenvalues.json"
    save_matrix_csv(csv_path, A.entries)
    json_path.write_text(json.dumps({
        "n": args.n, "min_eigenvalue": _fmt(w[0]), "max_eigenvalue": _fmt(w[-1]),
        "sum": _fmt(float(A.entries.sum())), "trace": _fmt(float(np.trace(A.entries))), "psd": True,
    }, indent=2) + "\n")
    print(f"wrote {csv_path} (min eigenvalue {w[0]:.12g})")
    return EXIT_OK, [csv_path, json_path]


def _load_probe(spec: str, n: int) -> QubitRegisterState:
    if spec == "ghz":
        return QubitRegisterState.ghz(n)
    if spec == "plus-product":
        return QubitRegisterState.plus_product(n)
    if spec.startswith("file:"):
        state = load_state_txt(spec[5:]).validate(1e-9)
        if state.n_qubits != n:
            raise ArgumentError(f"state file holds {state.n_qubits} qubits, --n is {n}")
        return state
    raise ArgumentError(f"unknown state {spec!r}; use ghz, plus-product or file:PATH")


def _colored_qfi(state, A1, spec, pulses, t):
    rho = evolve_spatiotemporal(state, A1, spec, pulses, t)
    return qfi_sld(rho, spatiotemporal_xi_derivative(state, A1, spec, pulses, t)).value


def _optimal_colored(args, state, A1, spec, pulses) -> dict:
    C = coefficient_closed_form(pulses, spec.p).value
    a1 = A1.entries
    if args.state == "ghz":
        y0, t_opt, rate = optimize_shot_time(spec, pulses, C * float(a1.sum()))
    elif args.state == "plus-product":
        y0, t_opt, one = optimize_shot_time(spec, pulses, C * float(a1[0, 0]))
        rate = args.n * one if np.allclose(np.diag(a1), a1[0, 0]) else None
        if rate is None:
            raise ArgumentError("plus-product optimum assumes a uniform diagonal")
    else:
        if spec.p <= 0:
            raise UnsupportedExponent("numerical shot-time optimization needs p > 0")
        # search log t around the fastest dephasing scale of the register
        tau = (1.0 / (spec.xi * C * float(np.abs(a1).sum()))) ** (1.0 / (1.0 + spec.p))
        lo, hi = math.log(1e-3 * tau), math.log(10.0 * args.n * tau)
        u, rate = golden_section_max(lambda u: _colored_qfi(state, A1, spec, pulses, math.exp(u)) / math.exp(u),
                                     lo, hi, tol=1e-8)
        t_opt = math.exp(u)
        y0 = None
    check = _colored_qfi(state, A1, spec, pulses, t_opt) / t_opt if t_opt > 0 else rate
    return {"y0": None if y0 is None else _fmt(y0), "t_opt": _fmt(t_opt), "rate": _fmt(rate),
            "rate_at_t_opt_sld": _fmt(check), "method": QfiMethod.SLD.value}


def cmd_qfi(args, out: Path) -> tuple:
    state = _load_probe(args.state, args.n)
    A = build_dephasing_matrix(PowerLawSpatialModel(args.n, args.alpha, args.xi, args.diag_scale), args.gamma)
    result = {"state": args.state, "n": args.n}
    if args.p is None:
        if args.time is None:
            f = fq_short_time(state.ket(), A, args.gamma, args.xi)
            result.update(f_q=_fmt(f), method=QfiMethod.SHORT_TIME_RATE.value)
        else:
            if args.time <= 0:
                raise ArgumentError("--time must be > 0")
            rho = evolve_markovian(state, A, args.time)
            F = qfi_sld(rho, markovian_xi_derivative(state, A, args.time, args.xi))
            result.update(F_Q=_fmt(F.value), time=args.time, method=F.method.value)
    else:
        pulses = PulseSequence(args.pulses)
        spec = SpectralModel(args.p, args.xi, 0.0)
        check_exponent(pulses, args.p)
        A1 = A.scaled(1.0 / args.xi)
        result.update(p=args.p, pulses=list(args.pulses))
        if args.time is not None:
            if args.time <= 0:
                raise ArgumentError("--time must be > 0")
            F = QfiResult(_colored_qfi(state, A1, spec, pulses, args.time), QfiMethod.SLD)
            result.update(F_Q=_fmt(F.value), time=args.time, method=F.method.value)
        else:
            result.update(_optimal_colored(args, state, A1, spec, pulses))
    path = out / "qfi.json"
    text = json.dumps(result, indent=2)
    path.write_text(text + "\n")
    print(text)
    return EXIT_OK, [path]


def cmd_sweep(args, out: Path) -> tuple:
    if args.n_min >= args.n_max:
        raise ArgumentError("--n-min must be smaller than --n-max")
    if args.points < 4:
        raise ArgumentError("--points must be >= 4")
    ns = np.unique(np.round(np.geomspace(args.n_min, args.n_max, args.points)).astype(int))
    if ns.size < 4:
        raise ArgumentError("grid collapses to fewer than 4 distinct N values")
    pulses = PulseSequence(args.pulses)
    cfg = SweepConfig(alpha=args.alpha, p=args.p, xi=args.xi, a_d=args.diag_scale,
                      n_list=tuple(ns.tolist()), pulses=pulses, seed=args.seed)
    if args.p == 0:
        result = sweep_markovian_advantage(cfg, args.threads)
    else:
        SpectralModel(args.p)
        check_exponent(pulses, args.p)
        if args.p < 0:
            raise UnsupportedExponent("time-averaged QFI is unbounded as t -> 0 for p < 0")
        result = sweep_nonmarkovian_advantage(cfg, args.threads)
    csv_path, json_path = out / "sweep.csv", out / "fit.json"
    write_sweep_csv(csv_path, result)
    json_path.write_text(summary_json(cfg, result) + "\n")
    v = verdict(cfg, result)
    print(f"{'PASS' if v['pass'] else 'FAIL'} exponent={v['exponent']:.6g} "
          f"theoretical={v['theoretical']} measure={v['measure']:.4g}")
    return (EXIT_OK if v["pass"] else EXIT_VERIFY), [csv_path, json_path]


def cmd_verify(args, out: Path) -> tuple:
    names = SUITES if args.suite == "all" else (args.suite,)
    lines, ok = [], True
    for name in names:
        checks = run_suite(name, args.seed, args.threads)
        ok &= all(c.passed for c in checks)
        lines.append(report(name, checks))
    text = "\n".join(lines)
    print(text)
    path = out / f"verify-{args.suite}.txt"
    path.write_text(text + "\n")
    return (EXIT_OK if ok else EXIT_VERIFY), [path]


COMMANDS = {"matrix": cmd_matrix, "qfi": cmd_qfi, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    out = _out_dir(args)
    outputs, code = [], EXIT_OK
    try:
        code, outputs = COMMANDS[args.command](args, out)
    except PSDViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_PSD
    except UnsupportedExponent as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_REGIME
    except (ArgumentError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_ARGS
    _write_manifest(out, args, argv, outputs, started, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
