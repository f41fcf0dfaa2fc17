from __future__ import annotations

import argparse
import dataclasses
import math
import sys
import time
from pathlib import Path
from typing import Any, Callable, Sequence, TextIO

import numpy as np

from application.analysis import beta_scan, fit_growth_exponent, sweep
from application.core_messages import LANGUAGES, tr
from application.identity import hardy_partial, kn_series_check, second_main_term, theorem_residual
from application.workers import resolve_threads
from domain import (
    ComputationError,
    EnumerationBudgetError,
    EvalResult,
    NonConvergence,
    PExponent,
    PlanePoint,
    RunConfig,
    Tolerances,
    VerificationFailure,
)
from domain.gen_bessel import jomega, jomega_normalized, kratzel_j
from domain.lattice import d_cal_closed, d_sum
from infrastructure.fs.config_store import load_config, tolerances_from_config
from infrastructure.fs.logger import create_logger
from infrastructure.fs.path_utils import get_app_root, resolve_in_app
from infrastructure.report.writers import emit_json, emit_rows_csv, emit_sweep_csv, to_payload, write_output

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_VERIFICATION = 4

EVAL_TARGETS = ('j0p', 'jomega', 'jomega_normalized', 'kratzel', 'd_sum', 'd_cal', 'second_main_term')
DEFAULT_FORMATS = {'eval': 'json', 'identity': 'json', 'sweep': 'csv', 'scan': 'json', 'hardy': 'json'}

LogCallback = Callable[[str], None]


class _Parser(argparse.ArgumentParser):
    """argparse raises instead of exiting so ``main`` keeps control of the exit code."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise argparse.ArgumentError(None, message)


def _finite(text: str) -> float:
    """A float flag; NaN and infinities are rejected before any computation."""
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f'expected a finite number, got {text!r}')
    return value


def _pair(text: str) -> tuple[float, float]:
    parts = text.split(',')
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f'expected two comma-separated numbers, got {text!r}')
    return _finite(parts[0]), _finite(parts[1])


def _float_list(text: str) -> tuple[float, ...]:
    values = tuple(_finite(v) for v in text.split(',') if v.strip())
    if not values:
        raise argparse.ArgumentTypeError('empty list')
    return values


def _r_grid(text: str) -> tuple[float, float, int]:
    """``a:b:n``: n log-spaced radii from a to b."""
    parts = text.split(':')
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f'expected a:b:n, got {text!r}')
    low, high = _finite(parts[0]), _finite(parts[1])
    try:
        steps = int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not (0 < low < high) or steps < 2:
        raise argparse.ArgumentTypeError(f'need 0 < a < b and n >= 2, got {text!r}')
    return low, high, steps


def _threads(text: str) -> int | str:
    if text == 'auto':
        return text
    try:
        count = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f'expected an integer or auto, got {text!r}') from exc
    if count < 1:
        raise argparse.ArgumentTypeError('threads must be >= 1')
    return count


def _positive(text: str) -> float:
    value = _finite(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f'expected a positive number, got {text!r}')
    return value


def build_parser(language: str) -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument('--output', type=Path, default=None)
    common.add_argument('--format', dest='output_format', choices=('csv', 'json'), default=None)
    common.add_argument('--tol', type=_positive, default=None)
    common.add_argument('--threads', type=_threads, default=None)
    common.add_argument('--no-log', action='store_true')
    common.add_argument('--language', choices=LANGUAGES, default=None)

    parser = _Parser(prog='pcircle', description=tr(language, 'app_description'))
    commands = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)

    ev = commands.add_parser('eval', parents=[common], help=tr(language, 'cmd_eval'))
    ev.add_argument('--target', choices=EVAL_TARGETS, default='j0p')
    ev.add_argument('--p', type=_finite, default=2.0)
    ev.add_argument('--eta', type=_pair, default=(0.0, 0.0))
    ev.add_argument('--omega', type=_finite, default=0.0)
    ev.add_argument('--nu', type=_finite, default=0.0)
    ev.add_argument('--r', type=_finite, default=1.0)
    ev.add_argument('--beta', type=_finite, default=2.0)
    ev.add_argument('--s', type=_finite, default=1.0)
    ev.add_argument('--x', type=_pair, default=(0.0, 0.0))
    ev.add_argument('--n-max', type=int, default=200)

    ident = commands.add_parser('identity', parents=[common], help=tr(language, 'cmd_identity'))
    ident.add_argument('--p', type=_finite, default=2.0)
    ident.add_argument('--beta', type=_finite, default=2.0)
    ident.add_argument('--s', type=_finite, default=1.0)
    ident.add_argument('--x', type=_pair, default=(0.0, 0.0))
    ident.add_argument('--cutoff', type=int, default=40)
    ident.add_argument('--kn', action='store_true', help='use the classical circle series (p = 2)')

    sw = commands.add_parser('sweep', parents=[common], help=tr(language, 'cmd_sweep'))
    sw.add_argument('--p', type=_finite, default=2.0)
    sw.add_argument('--r', dest='r_grid', type=_r_grid, default=(10.0, 100.0, 100))
    sw.add_argument('--fit', action='store_true')
    sw.add_argument('--window', type=int, default=1)

    sc = commands.add_parser('scan', parents=[common], help=tr(language, 'cmd_scan'))
    sc.add_argument('--p', type=_finite, default=2.0)
    sc.add_argument('--betas', type=_float_list, default=RunConfig.betas)
    sc.add_argument('--radii', type=_float_list, default=RunConfig.radii)

    hd = commands.add_parser('hardy', parents=[common], help=tr(language, 'cmd_hardy'))
    hd.add_argument('--r', type=_finite, default=0.5)
    hd.add_argument('--n-max', type=int, default=10_000)
    return parser


def run_config_from_args(args: argparse.Namespace, cfg: dict[str, Any], tolerances: Tolerances) -> RunConfig:
    run = RunConfig(command=args.command)
    for name in ('target', 'p', 'beta', 's', 'x', 'eta', 'omega', 'nu', 'r', 'cutoff', 'n_max', 'betas', 'radii', 'fit',
                 'window', 'kn'):
        if hasattr(args, name):
            setattr(run, name, getattr(args, name))
    if getattr(args, 'r_grid', None) is not None:
        run.r_min, run.r_max, run.r_steps = args.r_grid
    run.tol = args.tol if args.tol is not None else tolerances.quad_tol
    run.output_format = args.output_format or DEFAULT_FORMATS[args.command]
    run.output_path = str(args.output) if args.output is not None else None
    threads = args.threads if args.threads is not None else cfg.get('threads', 1)
    run.threads = resolve_threads(threads)
    run.language = args.language or cfg.get('language', 'en')
    return run


# --- commands ---------------------------------------------------------------------


def _eval_result(run: RunConfig, tolerances: Tolerances) -> tuple[dict[str, Any], EvalResult]:
    target = run.target
    if target in ('j0p', 'jomega', 'jomega_normalized'):
        p = PExponent.of(run.p)
        eta = PlanePoint(*run.eta)
        inputs: dict[str, Any] = {'p': run.p, 'eta': list(run.eta)}
        if target == 'j0p':
            return inputs, jomega(p, 0.0, eta, run.tol, tolerances)
        inputs['omega'] = run.omega
        if target == 'jomega':
            return inputs, jomega(p, run.omega, eta, run.tol, tolerances)
        return inputs, jomega_normalized(p, run.omega, eta, run.tol, tolerances)
    if target == 'kratzel':
        return {'p': run.p, 'nu': run.nu, 'r': run.r}, kratzel_j(run.p, run.nu, run.r, run.tol)
    if target == 'second_main_term':
        inputs = {'p': run.p, 'r': run.r, 'n_max': run.n_max}
        return inputs, second_main_term(run.p, run.r, run.n_max, run.tol)
    p = PExponent.of(run.p)
    x = PlanePoint(*run.x)
    inputs = {'p': run.p, 'beta': run.beta, 's': run.s, 'x': list(run.x)}
    if target == 'd_sum':
        res = d_sum(p, run.beta, run.s, x, tolerances)
        inputs['imag'] = res.value.imag
        return inputs, EvalResult(res.value.real, 0.0, 'enumeration', res.terms)
    return inputs, d_cal_closed(p, run.beta, run.s, x, run.tol, tolerances)


def cmd_eval(run: RunConfig, tolerances: Tolerances, log_cb: LogCallback) -> tuple[str, int]:
    started = time.perf_counter()
    inputs, result = _eval_result(run, tolerances)
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    record = {
        'target': run.target,
        **inputs,
        'value': result.value,
        'error_estimate': result.error_estimate,
        'method': result.method,
        'wall_time_ms': elapsed_ms,
    }
    log_cb(f'eval {run.target}: value={result.value!r}, method={result.method}')
    if run.output_format == 'csv':
        flat = {k: (','.join(repr(v) for v in val) if isinstance(val, list) else val) for k, val in record.items()}
        return emit_rows_csv([flat]), EXIT_OK
    return emit_json(record), EXIT_OK


def cmd_identity(run: RunConfig, tolerances: Tolerances, log_cb: LogCallback) -> tuple[str, int]:
    x = PlanePoint(*run.x)
    if run.kn:
        report = kn_series_check(run.beta, run.s, x, run.cutoff, run.tol, tolerances, log_cb)
    else:
        report = theorem_residual(PExponent.of(run.p), run.beta, run.s, x, run.cutoff, run.tol, tolerances, log_cb)
    passed = report.passes(tolerances.abs_floor)
    sys.stderr.write(tr(run.language, 'identity_passed' if passed else 'identity_failed') + '\n')
    if run.output_format == 'csv':
        rows = [
            {'cutoff': k, 'partial_sum': partial, 'shell_magnitude': magnitude}
            for (k, partial), magnitude in zip(report.trace, report.shell_magnitudes)
        ]
        text = emit_rows_csv(rows)
    else:
        payload = {
            'command': 'identity',
            'p': 2.0 if run.kn else run.p,
            'beta': run.beta,
            's': run.s,
            'x': list(run.x),
            'passes': passed,
            **to_payload(report),
        }
        text = emit_json(payload)
    return text, EXIT_OK if passed else EXIT_VERIFICATION


def sweep_radii(run: RunConfig) -> np.ndarray:
    return np.geomspace(run.r_min, run.r_max, run.r_steps)


def cmd_sweep(run: RunConfig, tolerances: Tolerances, log_cb: LogCallback) -> tuple[str, int]:
    p = PExponent.of(run.p)
    records = sweep(p, sweep_radii(run), run.threads, tolerances, log_cb)
    fit = fit_growth_exponent(records, run.window, tolerances) if run.fit else None
    if fit is not None:
        log_cb(f'fit: slope={fit.slope:.6f}, window_max_slope={fit.window_max_slope:.6f}')
    if run.output_format == 'json':
        return emit_json({'records': records, 'fit': fit}), EXIT_OK
    return emit_sweep_csv(records, fit), EXIT_OK


def cmd_scan(run: RunConfig, tolerances: Tolerances, log_cb: LogCallback) -> tuple[str, int]:
    p = PExponent.of(run.p)
    scan = beta_scan(p, run.betas, run.radii, tol=max(run.tol, 1e-10), threads=run.threads,
                     tolerances=tolerances, log_cb=log_cb)
    for verdict in scan.verdicts:
        label = tr(run.language, 'verdict_integrable' if verdict.integrable else 'verdict_not_integrable')
        exponent = 'nan' if math.isnan(verdict.decay_exponent) else f'{verdict.decay_exponent:.4f}'
        sys.stderr.write(tr(run.language, 'scan_verdict', beta=f'{verdict.beta:g}', exponent=exponent,
                            verdict=label) + '\n')
    if run.output_format == 'csv':
        return emit_rows_csv([dataclasses.asdict(cell) for cell in scan.cells]), EXIT_OK
    return emit_json(scan), EXIT_OK


def cmd_hardy(run: RunConfig, tolerances: Tolerances, log_cb: LogCallback) -> tuple[str, int]:
    report = hardy_partial(run.r, run.n_max, tolerances, log_cb)
    residuals = [abs(report.lhs - partial) for _, partial in report.trace]
    steps = max(0, len(residuals) - 1)
    down = sum(1 for a, b in zip(residuals, residuals[1:]) if b < a)
    sys.stderr.write(tr(run.language, 'hardy_trend', down=down, steps=steps) + '\n')
    if run.output_format == 'csv':
        rows = [{'n_max': n, 'partial_sum': partial, 'residual': report.lhs - partial} for n, partial in report.trace]
        return emit_rows_csv(rows), EXIT_OK
    return emit_json({'command': 'hardy', 'r': run.r, **to_payload(report)}), EXIT_OK


# --- entry point --------------------------------------------------------------------


def exit_code_for(exc: ComputationError) -> int:
    if isinstance(exc, VerificationFailure):
        return EXIT_VERIFICATION
    if isinstance(exc, (NonConvergence, EnumerationBudgetError)):
        return EXIT_CONVERGENCE
    return EXIT_VALIDATION


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    app_root = get_app_root()
    cfg = load_config(app_root)
    language = cfg.get('language', 'en')
    try:
        args = build_parser(language).parse_args(argv)
    except argparse.ArgumentError as exc:
        sys.stderr.write(f'{tr(language, "error_invalid_argument")} {exc}\n')
        return EXIT_VALIDATION
    except SystemExit as exc:
        # --help
        return int(exc.code or 0)

    tolerances = tolerances_from_config(cfg)
    try:
        run = run_config_from_args(args, cfg, tolerances)
    except ValueError as exc:
        sys.stderr.write(f'{tr(language, "error_invalid_argument")} {exc}\n')
        return EXIT_VALIDATION
    language = run.language

    log_cb: LogCallback = lambda message: None
    if not args.no_log:
        logger = create_logger(resolve_in_app(cfg.get('log_dir', 'pcircle_logs')), dataclasses.asdict(run))
        log_cb = logger

    handlers = {
        'eval': lambda: cmd_eval(run, tolerances, log_cb),
        'identity': lambda: cmd_identity(run, tolerances, log_cb),
        'sweep': lambda: cmd_sweep(run, tolerances, log_cb),
        'scan': lambda: cmd_scan(run, tolerances, log_cb),
        'hardy': lambda: cmd_hardy(run, tolerances, log_cb),
    }
    try:
        text, code = handlers[run.command]()
    except ComputationError as exc:
        log_cb(f'error: {exc}')
        detail = f' ({exc.detail})' if exc.detail else ''
        sys.stderr.write(f'{tr(language, exc.message_key)}{detail}\n')
        return exit_code_for(exc)

    try:
        write_output(text, Path(run.output_path) if run.output_path else None, stdout)
    except OSError as exc:
        sys.stderr.write(f'{tr(language, "error_output")} {exc}\n')
        return EXIT_VALIDATION
    log_cb(f'done: exit {code}')
    return code
