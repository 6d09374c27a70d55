"""Command-line entry point: ``hawkes-ldp <command> CONFIG [options]``.

Exit codes: 0 success, 1 configuration error, 2 numeric failure,
3 validation z-score breach.
"""
from __future__ import annotations

import argparse
import io
import math
import sys

import numpy as np

from . import mc
from .cgf import (
    critical_point_l,
    critical_point_n,
    finite_time_cgf_l,
    finite_time_cgf_n,
    gamma_l,
    gamma_n,
)
from .config import load_config
from .errors import ConfigError, HawkesLdpError, StabilityError, ThetaAboveCritical, TiltTooLarge
from .moments import clt_var_l, clt_var_n, finite_horizon_moments, limits_table, lln_mean_l, lln_mean_n
from .process import simulate, write_path_csv
from .rate import rate_curve, rate_l, rate_n

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_BREACH = 0, 1, 2, 3
Z_LIMIT = 4.0


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def _csv(out, header: str, rows) -> None:
    out.write(header + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()] if text else []


def _grid(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise ConfigError(f"--steps must be >= 1, got {steps}")
    return np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])


def cmd_limits(args, cfg, out) -> int:
    p = cfg.params()
    _csv(out, "quantity,value", limits_table(p, args.horizon))
    return EXIT_OK


def cmd_cgf(args, cfg, out) -> int:
    p = cfg.params()
    which = args.which
    solve, finite, cp = (
        (gamma_n, finite_time_cgf_n, critical_point_n(p))
        if which == "n"
        else (gamma_l, finite_time_cgf_l, critical_point_l(p))
    )
    hi = args.theta_max
    if hi is None:
        hi = cp.theta_c if math.isfinite(cp.theta_c) else 1.0
    rows = []
    for theta in _grid(args.theta_min, hi, args.steps):
        try:
            sol = solve(p, float(theta))
            row = [theta, sol.gamma, sol.gamma_prime, sol.x_star]
        except ThetaAboveCritical:
            row = [theta, math.inf, math.inf, None]
        if args.finite_t is not None:
            try:
                row.append(finite(p, float(theta), args.finite_t))
            except TiltTooLarge:
                row.append(math.inf)
        else:
            row.append(None)
        rows.append(row)
    _csv(out, "theta,gamma,gamma_prime,x_star,finite_t_value", rows)
    return EXIT_OK


def cmd_rate(args, cfg, out) -> int:
    p = cfg.params()
    mean = lln_mean_n(p) if args.which == "n" else lln_mean_l(p)
    hi = args.x_max if args.x_max is not None else 3.0 * mean
    pts = rate_curve(p, args.which, _grid(args.x_min, hi, args.steps))
    _csv(out, "x,rate,argmax_theta", [(pt.x, pt.rate, pt.argmax_theta) for pt in pts])
    return EXIT_OK


def cmd_simulate(args, cfg, out) -> int:
    p = cfg.params(require_stable=False)
    write_path_csv(simulate(p, args.horizon, args.seed), out)
    return EXIT_OK


def _z(est: float, analytic: float, se: float) -> float:
    if se > 0:
        return (est - analytic) / se
    return 0.0 if est == analytic else math.inf


def validation_rows(p, horizon: int, n_paths: int, seed: int, thetas, levels, workers=None):
    """Rows (metric, analytic, estimate, std_err, z_score); z is None for
    informational rows compared against asymptotic values."""
    s = mc.estimate_limits(p, horizon, n_paths, seed, thetas=thetas, levels=levels, workers=workers)
    rows = []
    for w, mean, mean_se, var, var_se, lln, clt in (
        ("n", s.mean_n_over_t, s.mean_n_se, s.var_n_clt_scaled, s.var_n_se, lln_mean_n(p), clt_var_n(p)),
        ("l", s.mean_l_over_t, s.mean_l_se, s.var_l_clt_scaled, s.var_l_se, lln_mean_l(p), clt_var_l(p)),
    ):
        m_exact, v_exact = finite_horizon_moments(p, horizon, w)
        rows.append((f"mean_{w}_over_t", m_exact / horizon, mean, mean_se, _z(mean, m_exact / horizon, mean_se)))
        rows.append((f"var_{w}_clt_scaled", v_exact / horizon, var, var_se, _z(var, v_exact / horizon, var_se)))
        rows.append((f"lln_mean_{w}", lln, mean, mean_se, None))
        rows.append((f"clt_var_{w}", clt, var, var_se, None))
    finite = {"n": finite_time_cgf_n, "l": finite_time_cgf_l}
    for c in s.empirical_cgf:
        exact = finite[c.which](p, c.theta, horizon)
        rows.append((f"cgf_{c.which}[theta={c.theta!r}]", exact, c.estimate, c.std_err,
                     _z(c.estimate, exact, c.std_err)))
    rate_fn = {"n": rate_n, "l": rate_l}
    for tl in s.tail_estimates:
        rows.append((f"tail_{tl.which}[a={tl.level!r}]", rate_fn[tl.which](p, tl.level).rate,
                     tl.implied_rate, tl.implied_rate_se, None))
    return rows


def _warn_cgf_variance(p, theta: float, horizon: int, n_paths: int) -> None:
    """Flag thetas whose exp(theta Y_t) weights are too dispersed for n_paths.

    The relative variance of the weights is exp(t (C_t(2 theta) - 2 C_t(theta))) - 1
    with C_t the exact finite-horizon CGF.
    """
    for w, finite in (("n", finite_time_cgf_n), ("l", finite_time_cgf_l)):
        try:
            spread = horizon * (finite(p, 2 * theta, horizon) - 2 * finite(p, theta, horizon))
        except TiltTooLarge:
            spread = math.inf
        if spread > math.log1p(n_paths / 100):
            print(
                f"warning: cgf_{w}[theta={theta!r}] weights have relative variance "
                f"exp({spread:.3g}); the estimate and its std_err are unreliable at "
                f"{n_paths} paths",
                file=sys.stderr,
            )


def cmd_validate(args, cfg, out) -> int:
    p = cfg.params()
    rows = validation_rows(
        p, args.horizon, args.paths, args.seed, _float_list(args.theta_grid), _float_list(args.levels)
    )
    _csv(out, "metric,analytic,estimate,std_err,z_score", rows)
    for theta in _float_list(args.theta_grid):
        _warn_cgf_variance(p, theta, args.horizon, args.paths)
    breach = [r[0] for r in rows if r[4] is not None and not abs(r[4]) <= Z_LIMIT]
    if breach:
        print(f"validation breach (|z| > {Z_LIMIT:g}): {', '.join(breach)}", file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hawkes-ldp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("config", help="flat 'key = value' configuration file")
        sp.add_argument("--out", default=None, help="output file (default: stdout)")
        sp.add_argument("--dump-config", action="store_true", help="print the parsed config and exit")
        return sp

    sp = add("limits", "LLN/CLT constants")
    sp.add_argument("--horizon", type=int, default=None, help="also report the CLT tail statistic at t")

    sp = add("cgf", "limiting CGF on a theta grid")
    sp.add_argument("--theta-min", type=float, default=-1.0)
    sp.add_argument("--theta-max", type=float, default=None, help="default: theta_c")
    sp.add_argument("--steps", type=int, default=21)
    sp.add_argument("--which", choices=("n", "l"), default="n")
    sp.add_argument("--finite-t", type=int, default=None)

    sp = add("rate", "rate function on an x grid")
    sp.add_argument("--which", choices=("n", "l"), default="n")
    sp.add_argument("--x-min", type=float, default=0.0)
    sp.add_argument("--x-max", type=float, default=None, help="default: 3x the LLN mean")
    sp.add_argument("--steps", type=int, default=31)

    sp = add("simulate", "simulate one path")
    sp.add_argument("--horizon", type=int, default=100)
    sp.add_argument("--seed", type=int, default=42)

    sp = add("validate", "Monte Carlo check of the analytic quantities")
    sp.add_argument("--paths", type=int, default=10_000)
    sp.add_argument("--horizon", type=int, default=50)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--theta-grid", default="-0.2", help="comma-separated thetas")
    sp.add_argument("--levels", default="", help="comma-separated upper-tail levels")
    return parser


COMMANDS = {
    "limits": cmd_limits,
    "cgf": cmd_cgf,
    "rate": cmd_rate,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.dump_config:
            sys.stdout.write(cfg.dump())
            return EXIT_OK
        buf = io.StringIO()
        code = COMMANDS[args.command](args, cfg, buf)
    except (ConfigError, StabilityError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (HawkesLdpError, ValueError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
