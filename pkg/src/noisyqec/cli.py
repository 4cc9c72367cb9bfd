"""Command line interface: closed-form tables, pipeline runs, kappa-T sweeps.

Subcommands
-----------
analytic      crossover points, optimal correction interval/count, failure floor
run           protected pipeline (and bare qubit) at explicit (kappa, T) points
sweep         grid over (kappa, T); records plus a per-kappa optimum summary
derive-table  print the syndrome -> correction table of a code
selftest      fast end-to-end sanity checks (algebra + closed-form limits)

Configuration is a flat ``key = value`` text file (``--config FILE``); command
line flags win over file values.  Output is CSV (default) or JSON with 17
significant digits, LF line endings, UTF-8.  Undefined log ratios are emitted
as empty CSV fields / JSON nulls, never as inf.  Exit codes: 0 success,
2 usage or configuration error, 3 numerical failure.

The worker thread count comes from the NOISYQEC_THREADS environment variable
(default 1); results are byte-identical for any thread count.  Trajectory
sweeps reuse the same seed at every grid point (common random numbers), so a
sweep is fully determined by (config, seed).

The ``Delta`` override feeds the closed-form columns (m_analytic, t_opt,
n_opt, ...); the simulated pipeline always uses the physical schedule
duration of its code (10 for 3bit, 20 for 5bit).
"""

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import analytics
from .codes import (PSI_PROBE, SCENARIO_STORAGE, SCENARIO_TRANSMISSION,
                    code_3bit, code_5bit, protected_run, unprotected_run)
from .lindblad import IntegrationError
from .trajectories import TrajectoryConfig

THREADS_ENV = "NOISYQEC_THREADS"
CSV_HEADER = ("kappa", "T", "m_nec", "m_ec", "m_analytic",
              "log_ratio", "log_ratio_analytic", "stderr")
TOPT_HEADER = ("kappa", "T_argmax_R", "t_opt")
_MASTER_POINT_WARN = 10_000

_CODES = {"3bit": code_3bit, "5bit": code_5bit}
_METHODS = ("master", "qsd", "jumps")
_FORMATS = ("csv", "json")
_SCENARIOS = (SCENARIO_STORAGE, SCENARIO_TRANSMISSION)


class UsageError(ValueError):
    """Bad flag/config values; maps to exit code 2."""


@dataclass(frozen=True)
class ExperimentConfig:
    code: str = "5bit"
    scenario: str = SCENARIO_STORAGE
    method: str = "master"
    kappas: tuple = (1e-3,)
    Ts: tuple = (100.0,)
    Delta: float = None        # closed-form E+D time; None = code default
    dt: float = None           # None = per-method default
    n_trajectories: int = 300
    master_seed: int = 0
    single_qubit: bool = False
    output: str = None
    format: str = "csv"

    def __post_init__(self):
        if self.code not in _CODES:
            raise UsageError("code must be one of %s, got %r" % (sorted(_CODES), self.code))
        if self.scenario not in _SCENARIOS:
            raise UsageError("scenario must be one of %s, got %r" % (list(_SCENARIOS), self.scenario))
        if self.method not in _METHODS:
            raise UsageError("method must be one of %s, got %r" % (list(_METHODS), self.method))
        if self.format not in _FORMATS:
            raise UsageError("format must be one of %s, got %r" % (list(_FORMATS), self.format))
        if not self.kappas:
            raise UsageError("kappa grid is empty")
        if any(k < 0 for k in self.kappas):
            raise UsageError("kappa must be nonnegative")
        if not self.Ts or any(t <= 0 for t in self.Ts):
            raise UsageError("T values must be positive")
        if self.Delta is not None and self.Delta <= 0:
            raise UsageError("Delta must be positive")
        if self.dt is not None and self.dt <= 0:
            raise UsageError("dt must be positive")
        if self.n_trajectories < 1:
            raise UsageError("n_trajectories must be at least 1")


@dataclass(frozen=True)
class SweepRecord:
    kappa: float
    T: float
    m_nec: float
    m_ec: float = None
    m_analytic: float = None
    log_ratio: float = None
    log_ratio_analytic: float = None
    stderr: float = None


def _thread_count():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError("%s must be an integer, got %r" % (THREADS_ENV, raw))
    if n < 1:
        raise UsageError("%s must be at least 1, got %d" % (THREADS_ENV, n))
    return n


# ---------------------------------------------------------------------------
# configuration parsing

def _parse_config_file(path):
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError("%s:%d: expected key = value" % (path, lineno))
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
    except OSError as exc:
        raise UsageError("cannot read config file: %s" % exc)
    return values


def _parse_float_list(text, name):
    try:
        vals = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise UsageError("%s: expected comma separated floats, got %r" % (name, text))
    if not vals:
        raise UsageError("%s: no values in %r" % (name, text))
    return vals


def _parse_range(text, name, spacing):
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError("%s: expected MIN:MAX:COUNT, got %r" % (name, text))
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError("%s: expected MIN:MAX:COUNT, got %r" % (name, text))
    if count < 1 or hi < lo:
        raise UsageError("%s: bad range %r" % (name, text))
    if spacing == "log":
        if lo <= 0:
            raise UsageError("%s: log range needs positive MIN" % name)
        return tuple(np.logspace(math.log10(lo), math.log10(hi), count))
    return tuple(np.linspace(lo, hi, count))


def _setting(args, file_cfg, key, default, convert=str):
    """Flag value if given, else config-file value, else default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in file_cfg:
        raw = file_cfg[key]
        try:
            return convert(raw)
        except UsageError:
            raise
        except ValueError:
            raise UsageError("config key %s: bad value %r" % (key, raw))
    return default


def _grid_setting(args, file_cfg, key, range_key, default, spacing):
    explicit = getattr(args, key, None)
    ranged = getattr(args, range_key, None)
    if explicit is not None and ranged is not None:
        raise UsageError("give either --%s or --%s, not both" % (key, range_key))
    if explicit is not None:
        return _parse_float_list(explicit, key)
    if ranged is not None:
        return _parse_range(ranged, range_key, spacing)
    if key in file_cfg and range_key in file_cfg:
        raise UsageError("config sets both %s and %s" % (key, range_key))
    if key in file_cfg:
        return _parse_float_list(file_cfg[key], key)
    if range_key in file_cfg:
        return _parse_range(file_cfg[range_key], range_key, spacing)
    return default


_SWEEP_DEFAULT_KAPPAS = ("kappa_log", "1e-4:1e-2:12")
_SWEEP_DEFAULT_TS = ("T_lin", "20:500:25")


def _build_config(args, defaults_grid=False):
    file_cfg = _parse_config_file(args.config) if args.config else {}
    known = {"code", "scenario", "method", "kappa", "kappa_log", "T", "T_lin",
             "Delta", "dt", "n_trajectories", "seed", "single_qubit",
             "output", "format"}
    unknown = set(file_cfg) - known
    if unknown:
        raise UsageError("unknown config keys: %s" % ", ".join(sorted(unknown)))

    if defaults_grid:
        kappa_default = _parse_range(_SWEEP_DEFAULT_KAPPAS[1], "kappa_log", "log")
        t_default = _parse_range(_SWEEP_DEFAULT_TS[1], "T_lin", "lin")
    else:
        kappa_default, t_default = (1e-3,), (100.0,)

    def as_bool(raw):
        if raw.lower() in ("1", "true", "yes"):
            return True
        if raw.lower() in ("0", "false", "no"):
            return False
        raise ValueError(raw)

    return ExperimentConfig(
        code=_setting(args, file_cfg, "code", "5bit"),
        scenario=_setting(args, file_cfg, "scenario", SCENARIO_STORAGE),
        method=_setting(args, file_cfg, "method", "master"),
        kappas=_grid_setting(args, file_cfg, "kappa", "kappa_log", kappa_default, "log"),
        Ts=_grid_setting(args, file_cfg, "T", "T_lin", t_default, "lin"),
        Delta=_setting(args, file_cfg, "Delta", None, float),
        dt=_setting(args, file_cfg, "dt", None, float),
        n_trajectories=_setting(args, file_cfg, "n_trajectories", 300, int),
        master_seed=_setting(args, file_cfg, "seed", 0, int),
        single_qubit=bool(_setting(args, file_cfg, "single_qubit", False, as_bool)),
        output=_setting(args, file_cfg, "output", None),
        format=_setting(args, file_cfg, "format", "csv"),
    )


# ---------------------------------------------------------------------------
# record computation

def _safe_log_ratio(m_nec, m_other):
    """log(m_nec/m_other), or None when either side is zero.

    Values below 1e-12 are integrator residue on an exactly-zero mismatch
    (noiseless runs), so the ratio is reported as undefined rather than as
    a log of roundoff.
    """
    if m_nec is None or m_other is None:
        return None
    if m_nec <= 1e-12 or m_other <= 1e-12:
        return None
    return math.log(m_nec / m_other)


def _closed_form_mismatch(code, cfg, kappa, T):
    """Worst-case closed-form estimate: every encode/decode error is fatal."""
    Delta = cfg.Delta if cfg.Delta is not None else code.delta
    kn = code.kappa_n(kappa)
    if cfg.scenario == SCENARIO_STORAGE:
        if T < Delta:
            return None
        s = analytics.s_sc(code.n, kn, kn, T, Delta / T)
    else:
        s = analytics.t_sc(code.n, kn, kn, T, Delta / T)
    return 0.5 * (1.0 - s)


def _compute_record(code, cfg, kappa, T, n_threads):
    m_nec = unprotected_run(PSI_PROBE, code.noise_kind, kappa, T, dt=cfg.dt)
    if cfg.single_qubit:
        return SweepRecord(kappa=kappa, T=T, m_nec=m_nec)
    if cfg.method == "master":
        m_ec = protected_run(PSI_PROBE, code, kappa, T, scenario=cfg.scenario,
                             dt=cfg.dt)
        stderr = None
    else:
        unraveling = "qsd" if cfg.method == "qsd" else "quantum_jumps"
        tcfg = TrajectoryConfig(n_trajectories=cfg.n_trajectories,
                                master_seed=cfg.master_seed,
                                unraveling=unraveling,
                                **({"dt": cfg.dt} if cfg.dt is not None else {}))
        m_ec, stderr = protected_run(PSI_PROBE, code, kappa, T,
                                     scenario=cfg.scenario, method="trajectories",
                                     cfg=tcfg, n_threads=n_threads,
                                     return_stderr=True)
    m_an = _closed_form_mismatch(code, cfg, kappa, T)
    return SweepRecord(kappa=kappa, T=T, m_nec=m_nec, m_ec=m_ec,
                       m_analytic=m_an,
                       log_ratio=_safe_log_ratio(m_nec, m_ec),
                       log_ratio_analytic=_safe_log_ratio(m_nec, m_an),
                       stderr=stderr)


def _compute_records(cfg):
    code = _CODES[cfg.code]()
    points = [(k, t) for k in cfg.kappas for t in cfg.Ts]
    if cfg.method == "master" and len(points) > _MASTER_POINT_WARN:
        print("warning: %d master-equation grid points; this may take a while"
              % len(points), file=sys.stderr)
    n_threads = _thread_count()
    if cfg.method == "master" and n_threads > 1 and len(points) > 1:
        # grid-level pool; assembly stays in grid order
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            futures = [pool.submit(_compute_record, code, cfg, k, t, 1)
                       for k, t in points]
            return [f.result() for f in futures]
    return [_compute_record(code, cfg, k, t, n_threads) for k, t in points]


def _topt_rows(cfg, records):
    """Per kappa: grid argmax of the measured ratio m_nec/m_ec, and the
    closed-form optimum interval."""
    code = _CODES[cfg.code]()
    Delta = cfg.Delta if cfg.Delta is not None else code.delta
    by_kappa = {}
    for rec in records:
        by_kappa.setdefault(rec.kappa, []).append(rec)
    rows = []
    for kappa in cfg.kappas:
        best_T, best = None, -math.inf
        for rec in by_kappa.get(kappa, ()):
            if rec.log_ratio is not None and rec.log_ratio > best:
                best_T, best = rec.T, rec.log_ratio
        rows.append((kappa, best_T, analytics.t_opt(code.n, code.kappa_n(kappa), Delta)))
    return rows


# ---------------------------------------------------------------------------
# serialization

def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write_csv_rows(fh, header, rows):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def _record_rows(records):
    return [tuple(getattr(r, f) for f in CSV_HEADER) for r in records]


def _open_out(path):
    return open(path, "w", encoding="utf-8", newline="")


def _emit_records(cfg, records, topt_rows=None):
    if cfg.format == "json":
        payload = {"records": [dataclasses.asdict(r) for r in records]}
        if topt_rows is not None:
            payload["t_opt_curve"] = [dict(zip(TOPT_HEADER, row)) for row in topt_rows]
        text = json.dumps(payload, indent=2)
        if cfg.output:
            with _open_out(cfg.output) as fh:
                fh.write(text + "\n")
        else:
            print(text)
        return
    if cfg.output:
        with _open_out(cfg.output) as fh:
            _write_csv_rows(fh, CSV_HEADER, _record_rows(records))
        if topt_rows is not None:
            root, ext = os.path.splitext(cfg.output)
            with _open_out(root + "_topt" + (ext or ".csv")) as fh:
                _write_csv_rows(fh, TOPT_HEADER, topt_rows)
    else:
        _write_csv_rows(sys.stdout, CSV_HEADER, _record_rows(records))
        if topt_rows is not None:
            print()
            _write_csv_rows(sys.stdout, TOPT_HEADER, topt_rows)


# ---------------------------------------------------------------------------
# subcommands

def cmd_analytic(args):
    file_cfg = _parse_config_file(args.config) if args.config else {}
    n = int(_setting(args, file_cfg, "n", 5, int))
    if n < 2:
        raise UsageError("n must be at least 2")
    if args.crossover:
        rows = [("crossover_kT", analytics.crossover_kT(n))]
        _emit_table(args, file_cfg, rows)
        return 0
    kappa_n = _setting(args, file_cfg, "kappa_n", None, float)
    if kappa_n is None:
        kappa = _setting(args, file_cfg, "kappa", None, float)
        if kappa is None:
            raise UsageError("need --kappa (with n in {3,5}) or --kappa-n")
        factors = {3: 2.0, 5: 4.0}
        if n not in factors:
            raise UsageError("--kappa maps to a per-qubit rate only for n in "
                             "{3, 5}; pass --kappa-n for other n")
        kappa_n = factors[n] * kappa
    T = _setting(args, file_cfg, "T", None, float)
    Delta = _setting(args, file_cfg, "Delta", None, float)
    if T is None or Delta is None:
        raise UsageError("need --T and --Delta")
    if T <= 0 or Delta < 0:
        raise UsageError("T must be positive and Delta nonnegative")
    delta = Delta / T
    rows = [
        ("n", float(n)),
        ("kappa_n", kappa_n),
        ("T", T),
        ("Delta", Delta),
        ("crossover_kT", analytics.crossover_kT(n)),
        ("t_opt", analytics.t_opt(n, kappa_n, Delta)),
        ("n_opt", analytics.n_opt(n, kappa_n, T, delta)),
        ("max_failure", analytics.max_failure(n, kappa_n, T, delta)),
    ]
    n_star = analytics.n_opt(n, kappa_n, T, delta)
    if math.isfinite(n_star):
        n_int = max(1, int(round(n_star)))
        if args.scenario == SCENARIO_TRANSMISSION:
            exact = analytics.t_Nsc(n, kappa_n, kappa_n, T, delta, n_int)
        else:
            exact = (analytics.s_Nsc(n, kappa_n, kappa_n, T, delta, n_int)
                     if n_int * delta < 1.0 else None)
        if exact is not None:
            rows.append(("failure_at_n_opt", 1.0 - exact))
    _emit_table(args, file_cfg, rows)
    return 0


def _emit_table(args, file_cfg, rows):
    fmt = _setting(args, file_cfg, "format", "csv")
    output = _setting(args, file_cfg, "output", None)
    if fmt == "json":
        text = json.dumps({k: v for k, v in rows}, indent=2)
        if output:
            with _open_out(output) as fh:
                fh.write(text + "\n")
        else:
            print(text)
        return
    if output:
        with _open_out(output) as fh:
            _write_csv_rows(fh, ("quantity", "value"), rows)
    else:
        _write_csv_rows(sys.stdout, ("quantity", "value"), rows)


def cmd_run(args):
    cfg = _build_config(args)
    records = _compute_records(cfg)
    _emit_records(cfg, records)
    return 0


def cmd_sweep(args):
    cfg = _build_config(args, defaults_grid=True)
    records = _compute_records(cfg)
    _emit_records(cfg, records, topt_rows=_topt_rows(cfg, records))
    return 0


def cmd_derive_table(args):
    code = _CODES[args.code]()
    rows = sorted(code.correction_table.items())
    print("syndrome,correction")
    for outcome, label in rows:
        bits = "".join(str((outcome >> i) & 1) for i in range(code.n - 1))
        print("%s,%s" % (bits, label))
    return 0


def cmd_selftest(args):
    import noisyqec
    from .codes import instant_error_run
    from .hilbert import mismatch as state_mismatch

    failures = []

    def check(name, ok, detail=""):
        print("%s %s%s" % ("PASS" if ok else "FAIL", name,
                           (" " + detail if detail else "")))
        if not ok:
            failures.append(name)

    check("kernel backend: %s" % noisyqec.KERNEL_BACKEND, True)
    for name, make in sorted(_CODES.items()):
        code = make()
        round_trip = code.decode.unitary() @ code.encode.unitary()
        psi0 = np.zeros(2 ** code.n, dtype=complex)
        psi0[0] = 1.0
        overlap = abs(np.vdot(round_trip @ psi0, psi0))
        check("%s decode(encode) identity" % name, overlap > 1.0 - 1e-9,
              "overlap=%.3e" % (1.0 - overlap))
        worst = max(instant_error_run(PSI_PROBE, code, err)
                    for err in code.allowed_errors())
        check("%s single-error correction" % name, worst < 1e-9,
              "worst=%.3e" % worst)
        n_syndromes = len(set(code.correction_table))
        check("%s syndrome count" % name, n_syndromes == 2 ** (code.n - 1))
    for kind, rate in (("dephasing", 2.0), ("isotropic", 4.0)):
        m = unprotected_run(PSI_PROBE, kind, 1e-3, 100.0)
        ref = 0.5 * (1.0 - math.exp(-rate * 0.1))
        check("%s closed form" % kind, abs(m - ref) < 1e-6, "dev=%.3e" % abs(m - ref))
    check("crossover(3) = ln 2",
          abs(analytics.crossover_kT(3) - math.log(2.0)) < 1e-9)
    check("crossover(5) = 0.14", abs(analytics.crossover_kT(5) - 0.14) < 0.005)
    check("n_opt example", abs(analytics.n_opt(3, 2e-5, 1e4, 1e-3) - math.sqrt(200.0)) < 1e-9)
    if failures:
        print("%d check(s) failed" % len(failures))
        return 3
    print("all checks passed")
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(parser):
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--output", help="write results to this path")
    parser.add_argument("--format", choices=_FORMATS, help="output format")


def _add_experiment_flags(parser):
    _add_common(parser)
    parser.add_argument("--code", choices=sorted(_CODES))
    parser.add_argument("--scenario", choices=list(_SCENARIOS))
    parser.add_argument("--method", choices=list(_METHODS))
    parser.add_argument("--kappa", help="comma separated kappa values")
    parser.add_argument("--kappa-log", dest="kappa_log",
                        help="log-spaced kappa grid MIN:MAX:COUNT")
    parser.add_argument("--T", help="comma separated total times")
    parser.add_argument("--T-lin", dest="T_lin",
                        help="linear T grid MIN:MAX:COUNT")
    parser.add_argument("--Delta", type=float,
                        help="E+D time for the closed-form columns")
    parser.add_argument("--dt", type=float, help="integrator step")
    parser.add_argument("--n-trajectories", dest="n_trajectories", type=int)
    parser.add_argument("--seed", dest="seed", type=int)
    parser.add_argument("--single-qubit", dest="single_qubit",
                        action="store_const", const=True,
                        help="bare qubit only: emit m_nec, skip the pipeline")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="noisyqec",
        description="Simulated error-corrected qubit storage/transmission "
                    "under continuous noise.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="closed-form optima and crossovers")
    _add_common(p)
    p.add_argument("--n", type=int, help="code size (default 5)")
    p.add_argument("--kappa", type=float, help="per-operator noise rate")
    p.add_argument("--kappa-n", dest="kappa_n", type=float,
                   help="per-qubit rate (any n)")
    p.add_argument("--T", type=float, help="total time")
    p.add_argument("--Delta", type=float, help="encode+decode time")
    p.add_argument("--scenario", choices=list(_SCENARIOS),
                   default=SCENARIO_STORAGE)
    p.add_argument("--crossover", action="store_true",
                   help="print only the crossover kappa_n*T")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("run", help="pipeline at explicit (kappa, T) points")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="kappa-T grid plus per-kappa optimum")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("derive-table", help="print a code's correction table")
    p.add_argument("--code", choices=sorted(_CODES), default="5bit")
    p.set_defaults(func=cmd_derive_table)

    p = sub.add_parser("selftest", help="fast sanity checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except (IntegrationError, FloatingPointError) as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return 3
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
