"""Command-line front end: ``effcap sweep``, ``effcap validate``, ``effcap version``.

Sweeps write one row per grid point with normalized (bits/s/Hz) values. With
``--mc`` every grid point is simulated with the same seed (common random
numbers), so neighbouring points on a curve are positively correlated and the
output is byte-identical for identical flags.
"""
import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from effcap import __version__
from effcap.asymptotics import cutoff_unity_check, ec_infinity, ergodic_capacity, identity_suite
from effcap.errors import BracketError, ConvergenceError
from effcap.montecarlo import DEFAULT_TRIALS, mc_effective_capacity, mc_mean_mu
from effcap.ras import ras_effective_capacity
from effcap.system import DEFAULT_BANDWIDTH_HZ, DEFAULT_FRAME_S, Power, Scheme, SystemConfig
from effcap.tas import (
    constant_power_effective_capacity,
    joint_selection_config,
    mean_mu_log_cutoff,
    solve_cutoff,
    tas_effective_capacity,
)

COLUMNS = (
    "gamma0_db", "theta", "scheme", "power", "ec_norm_analytic", "ec_norm_mc",
    "mc_std_error", "cutoff", "ergodic_norm", "ec_inf_norm", "mt", "mr",
)
DEFAULT_SNR_DB = "0:2:20"
DEFAULT_THETA_LOG = "1e-4:10"
PER_DECADE = 4

EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

NUMERIC_ERRORS = (ArithmeticError, BracketError, ConvergenceError)


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- grid parsing

def _number(text, kind):
    try:
        return kind(text)
    except ValueError:
        raise UsageError(f"not a valid {kind.__name__}: {text!r}") from None


def parse_grid(text, kind=float):
    """Parse ``a,b,c`` lists and inclusive ``start:stop`` / ``start:step:stop`` ranges."""
    values = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            raise UsageError(f"empty element in {text!r}")
        fields = part.split(":")
        if len(fields) == 1:
            values.append(_number(fields[0], kind))
            continue
        if len(fields) == 2:
            start, stop = (_number(f, kind) for f in fields)
            step = kind(1)
        elif len(fields) == 3:
            start, step, stop = (_number(f, kind) for f in fields)
        else:
            raise UsageError(f"bad range {part!r}")
        if step <= 0 or stop < start:
            raise UsageError(f"range {part!r} must have a positive step and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        # Index-based generation avoids accumulating float error in the grid.
        values.extend(kind(start + i * step) if kind is int else round(start + i * step, 12) for i in range(count))
    return values


def parse_theta_log(text):
    """``start:stop[:num]`` log-spaced grid; ``num`` defaults to 4 points per decade."""
    fields = str(text).split(":")
    if len(fields) not in (2, 3):
        raise UsageError(f"--theta-log expects start:stop[:num], got {text!r}")
    start, stop = _number(fields[0], float), _number(fields[1], float)
    if not (0 < start <= stop):
        raise UsageError("--theta-log needs 0 < start <= stop")
    if len(fields) == 3:
        num = _number(fields[2], int)
    else:
        num = int(round(PER_DECADE * math.log10(stop / start))) + 1
    if num < 1:
        raise UsageError("--theta-log needs at least one point")
    return [float(v) for v in np.logspace(math.log10(start), math.log10(stop), num)]


def read_config(path):
    """key=value lines (``#`` comments) turned into argv tokens."""
    tokens = []
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if flag in BOOLEAN_FLAGS:
            if value.lower() in ("1", "true", "yes", "on"):
                tokens.append(flag)
            elif value.lower() not in ("0", "false", "no", "off"):
                raise UsageError(f"{path}:{lineno}: {key} expects a boolean")
        else:
            tokens += [flag, value]
    return tokens


BOOLEAN_FLAGS = {"--mc", "--asymptotes", "--quick"}


# ---------------------------------------------------------------- sweep

@dataclass(frozen=True)
class GridPoint:
    scheme: Scheme
    power: Power
    mt: int
    mr: int
    gamma0_db: float
    theta: float

    def describe(self):
        return (
            f"scheme={self.scheme.value} power={self.power.value} mt={self.mt} mr={self.mr} "
            f"gamma0_db={self.gamma0_db!r} theta={self.theta!r}"
        )


def format_log_value(log_value):
    """Decimal string for ``exp(log_value)`` that survives exponents beyond double range."""
    if log_value == -math.inf:
        return "0"
    exponent10 = log_value / math.log(10.0)
    e = math.floor(exponent10)
    mantissa = 10.0 ** (exponent10 - e)
    if mantissa >= 9.9999999995:
        mantissa, e = 1.0, e + 1
    return f"{mantissa:.10f}e{e:+d}"


def evaluate_point(point, args):
    """One output row as a dict; numeric errors propagate to the caller."""
    cfg = SystemConfig.from_db(
        point.mt, point.mr, point.gamma0_db, point.theta,
        bandwidth_hz=args.bandwidth_hz, frame_s=args.frame_s,
    )
    tas_cfg = joint_selection_config(cfg) if point.scheme is Scheme.JOINT else cfg
    row = dict.fromkeys(COLUMNS)
    row.update(
        gamma0_db=point.gamma0_db, theta=point.theta, scheme=point.scheme.value,
        power=point.power.value, mt=point.mt, mr=point.mr,
    )
    policy = None
    if point.scheme is Scheme.RAS:
        ec = ras_effective_capacity(cfg, normalized=True)
    elif point.power is Power.CONSTANT:
        ec = constant_power_effective_capacity(tas_cfg, normalized=True)
    else:
        policy = solve_cutoff(tas_cfg)
        ec = tas_effective_capacity(tas_cfg, normalized=True, policy=policy)
        row["cutoff"] = format_log_value(policy.log_cutoff)
    row["ec_norm_analytic"] = ec
    if args.asymptotes and point.scheme is not Scheme.RAS and point.power is Power.OPTIMAL:
        row["ergodic_norm"] = ergodic_capacity(tas_cfg, normalized=True)
        row["ec_inf_norm"] = ec_infinity(tas_cfg, normalized=True)
    if args.mc:
        est = mc_effective_capacity(cfg, point.scheme, point.power, n=args.trials, seed=args.seed, policy=policy)
        row["ec_norm_mc"] = cfg.normalize(est.mean)
        row["mc_std_error"] = cfg.normalize(est.std_error)
    return row


def build_grid(args):
    scheme = Scheme(args.scheme)
    if args.power is None:
        powers = [Power.CONSTANT] if scheme is Scheme.RAS else [Power.OPTIMAL]
    elif args.power == "both":
        powers = [Power.OPTIMAL, Power.CONSTANT]
    else:
        powers = [Power(args.power)]
    if scheme is Scheme.RAS and Power.OPTIMAL in powers:
        raise UsageError("receive antenna selection has no power control; use --power constant")

    mts = parse_grid(args.mt, int)
    mrs = parse_grid(args.mr, int)
    if min(mts + mrs) < 1:
        raise UsageError("antenna counts must be positive")
    snrs = parse_grid(args.snr_db, float)
    if args.theta is not None and args.theta_log is not None:
        raise UsageError("--theta and --theta-log are mutually exclusive")
    if args.theta is not None:
        thetas = parse_grid(args.theta, float)
        theta_axis = False
    else:
        thetas = parse_theta_log(args.theta_log or DEFAULT_THETA_LOG)
        theta_axis = True
    if min(thetas) <= 0:
        raise UsageError("theta must be positive")
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    if not (args.bandwidth_hz > 0 and args.frame_s > 0):
        raise UsageError("--bandwidth-hz and --frame-s must be positive")

    # The swept axis is innermost: theta for --theta-log sweeps, SNR otherwise.
    outer, inner = (snrs, thetas) if theta_axis else (thetas, snrs)
    grid = []
    for mt in mts:
        for mr in mrs:
            for power in powers:
                for o in outer:
                    for i in inner:
                        db, th = (o, i) if theta_axis else (i, o)
                        grid.append(GridPoint(scheme, power, mt, mr, db, th))
    return grid


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render(rows, fmt):
    if fmt == "json":
        return json.dumps({"columns": list(COLUMNS), "rows": rows}, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in COLUMNS])
    return buf.getvalue()


def _write(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def run_sweep(args):
    grid = build_grid(args)

    def task(point):
        try:
            return evaluate_point(point, args)
        except NUMERIC_ERRORS as exc:
            raise _PointFailure(point, exc) from exc

    try:
        if args.jobs > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                rows = list(pool.map(task, grid))
        else:
            rows = [task(p) for p in grid]
    except _PointFailure as failure:
        print(f"effcap: numeric failure at {failure.point.describe()}: {failure.cause}", file=sys.stderr)
        return EXIT_NUMERIC
    _write(render(rows, args.format), args.out)
    return 0


class _PointFailure(Exception):
    def __init__(self, point, cause):
        super().__init__(str(cause))
        self.point = point
        self.cause = cause


# ---------------------------------------------------------------- validate

VALIDATION_GRID = (
    (Scheme.RAS, 3, 3),
    (Scheme.TAS, 2, 2),
    (Scheme.TAS, 3, 3),
    (Scheme.JOINT, 3, 3),
)
VALIDATION_SNR_DB = (0.0, 10.0, 20.0)
VALIDATION_THETA = (0.01, 0.1)
MC_REL_TOL = 0.01
POWER_TOL = 1e-9


def _check(name, passed, detail):
    return {"name": name, "passed": bool(passed), "detail": detail}


def validation_checks(trials, k_se, seed, jobs=1):
    """Every validation check as ``{name, passed, detail}`` dicts, in a fixed order."""
    checks = []
    identities = identity_suite()
    failed = sorted(k for k, ok in identities.items() if not ok)
    checks.append(_check("exact identities", not failed, f"{len(identities) - len(failed)}/{len(identities)} hold"))

    for row in cutoff_unity_check():
        dev = ", ".join(f"{d:.4g}" for d in row.deviation)
        checks.append(_check(
            f"cutoff -> 1 at theta=1e-5, {row.mt}x{row.mr}",
            row.passed,
            f"|cutoff-1| over {list(row.snr_db)} dB = [{dev}]; monotone={row.monotone}",
        ))

    for scheme, mt, mr in VALIDATION_GRID:
        for db in VALIDATION_SNR_DB:
            for theta in VALIDATION_THETA:
                cfg = SystemConfig.from_db(mt, mr, db, theta)
                tag = f"{scheme.value} {mt}x{mr} {db:g} dB theta={theta:g}"
                if scheme is Scheme.RAS:
                    power, policy = Power.CONSTANT, None
                    ec = ras_effective_capacity(cfg)
                else:
                    power = Power.OPTIMAL
                    tas_cfg = joint_selection_config(cfg) if scheme is Scheme.JOINT else cfg
                    policy = solve_cutoff(tas_cfg)
                    ec = tas_effective_capacity(tas_cfg, policy=policy)
                    mu_err = abs(mean_mu_log_cutoff(tas_cfg, policy.log_cutoff) - 1.0)
                    checks.append(_check(f"E{{mu}} = 1 closed form, {tag}", mu_err <= POWER_TOL, f"|E{{mu}}-1| = {mu_err:.3e}"))
                    mu = mc_mean_mu(cfg, policy, n=trials, seed=seed, scheme=scheme, jobs=jobs)
                    checks.append(_check(
                        f"E{{mu}} = 1 simulated, {tag}",
                        abs(mu.mean - 1.0) <= k_se * mu.std_error,
                        f"mean {mu.mean:.6f} +- {mu.std_error:.2e}",
                    ))
                est = mc_effective_capacity(cfg, scheme, power, n=trials, seed=seed, policy=policy, jobs=jobs)
                tol = max(MC_REL_TOL * abs(ec), k_se * est.std_error)
                checks.append(_check(
                    f"E_C analytic vs simulated, {tag}",
                    abs(ec - est.mean) <= tol,
                    f"analytic {cfg.normalize(ec):.6f} mc {cfg.normalize(est.mean):.6f} "
                    f"+- {cfg.normalize(est.std_error):.2e} bits/s/Hz",
                ))
    return checks


def format_report(checks):
    width = max(len(c["name"]) for c in checks)
    lines = [f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']:<{width}}  {c['detail']}" for c in checks]
    failed = sum(not c["passed"] for c in checks)
    lines.append(f"{len(checks) - failed} passed, {failed} failed")
    return "\n".join(lines) + "\n"


def run_validate(args):
    trials = args.trials if args.trials is not None else (100_000 if args.quick else DEFAULT_TRIALS)
    if trials < 2:
        raise UsageError("--trials must be at least 2")
    k_se = 5.0 if args.quick else 3.0
    try:
        checks = validation_checks(trials, k_se, args.seed, args.jobs)
    except NUMERIC_ERRORS as exc:
        print(f"effcap: numeric failure during validation: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    sys.stdout.write(format_report(checks))
    if args.out:
        report = {"seed": args.seed, "trials": trials, "k_std_errors": k_se, "checks": checks}
        _write(json.dumps(report, indent=2) + "\n", args.out)
    return 0 if all(c["passed"] for c in checks) else EXIT_FAILED


# ---------------------------------------------------------------- entry point

def build_parser():
    parser = argparse.ArgumentParser(prog="effcap", description="Effective capacity of antenna-selection links.")
    sub = parser.add_subparsers(dest="verb", required=True)

    sweep = sub.add_parser("sweep", help="tabulate effective capacity over a parameter grid")
    sweep.add_argument("--config", help="key=value file mirroring these flags; flags override it")
    sweep.add_argument("--scheme", choices=[s.value for s in Scheme], default="tas")
    sweep.add_argument("--mt", default="2", help="transmit antennas: int, list or start[:step]:stop")
    sweep.add_argument("--mr", default="2", help="receive antennas: int, list or start[:step]:stop")
    sweep.add_argument("--snr-db", default=DEFAULT_SNR_DB, help="average SNR grid in dB (default 0:2:20)")
    sweep.add_argument("--theta", help="QoS exponents (1/bits): list or range")
    sweep.add_argument("--theta-log", help="log-spaced QoS exponents start:stop[:num] (default 1e-4:10)")
    sweep.add_argument("--power", choices=["optimal", "constant", "both"])
    sweep.add_argument("--mc", action="store_true", help="add Monte Carlo estimates")
    sweep.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--out")
    sweep.add_argument("--format", choices=["csv", "json"], default="csv")
    sweep.add_argument("--bandwidth-hz", type=float, default=DEFAULT_BANDWIDTH_HZ)
    sweep.add_argument("--frame-s", type=float, default=DEFAULT_FRAME_S)
    sweep.add_argument("--jobs", type=int, default=1)
    sweep.add_argument("--asymptotes", action="store_true", help="add ergodic and strict-QoS limits")

    val = sub.add_parser("validate", help="run identity, cutoff and simulation checks")
    val.add_argument("--config")
    val.add_argument("--quick", action="store_true", help="1e5 trials, 5 std error tolerance")
    val.add_argument("--trials", type=int)
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--out", help="write the JSON report here")
    val.add_argument("--jobs", type=int, default=1)

    sub.add_parser("version", help="print the package version")
    return parser


def _expand_config(argv):
    """Splice ``--config`` file tokens in right after the verb so later flags win."""
    argv = list(argv)
    for i, tok in enumerate(argv):
        path = None
        if tok == "--config" and i + 1 < len(argv):
            path, cut = argv[i + 1], slice(i, i + 2)
        elif tok.startswith("--config="):
            path, cut = tok.split("=", 1)[1], slice(i, i + 1)
        if path is not None:
            del argv[cut]
            return argv[:1] + read_config(path) + argv[1:]
    return argv


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        argv = _expand_config(argv)
    except UsageError as exc:
        parser.error(str(exc))
    args = parser.parse_args(argv)
    if args.verb == "version":
        print(f"effcap {__version__}")
        return 0
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be at least 1")
    try:
        return run_sweep(args) if args.verb == "sweep" else run_validate(args)
    except UsageError as exc:
        parser.error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
