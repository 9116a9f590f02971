"""Command-line front end: every subcommand emits one CSV or JSON table.

Item and depth labels in the output are 1-based.  Exit status is 0 on
success, 1 when a verification property fails (or a computation does not
converge) and 2 for invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from .core import ModelParams, PopularityVector, ray_point, validate_popularity, zipf_vector
from .errors import ModelError, QuadratureNotConverged
from .exact import (
    ORACLE_CAP,
    brute_force_hit_rate,
    expected_cost_functional,
    hit_rate_residual,
    search_cost_distribution,
)
from .jacobian import master_identity_derivative
from .kernel import (
    hit_rate_pair_square,
    kernel_matrix,
    kernel_split,
    phi_psi_quadrature,
    radial_derivative,
)
from .quadrature import QuadratureConfig
from .simulate import SimConfig, estimate_hit_rate_stationary, simulate_mtf_chain
from .verify import run_suite

OUTPUT_DIR_ENV = "LRU_RADIAL_OUTPUT_DIR"


class UsageError(ModelError):
    pass


# -- input parsing ---------------------------------------------------------------


def _floats(text: str, field: str) -> List[float]:
    try:
        return [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise UsageError(f"could not parse {text!r} as comma-separated numbers", field) from None


def read_popularity_file(path: str) -> PopularityVector:
    """One probability per line (``#`` starts a comment), or JSON ``{"probs": [...]}``."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        if not isinstance(data, dict) or "probs" not in data:
            raise UsageError(f"{path}: JSON input needs a 'probs' array", "p-file")
        return validate_popularity([float(x) for x in data["probs"]])
    values = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            values.append(float(line))
    return validate_popularity(values)


def popularity_from_args(args) -> PopularityVector:
    sources = [s for s in (args.p, args.p_file, args.zipf) if s is not None]
    if len(sources) != 1:
        raise UsageError("give exactly one of --p/--q, --p-file, --zipf", "p")
    if args.p is not None:
        if args.p.strip().lower() == "uniform":
            return PopularityVector.uniform(args.n)
        return validate_popularity(_floats(args.p, "p"))
    if args.p_file is not None:
        try:
            return read_popularity_file(args.p_file)
        except OSError as exc:
            raise UsageError(f"cannot read {args.p_file}: {exc}", "p-file") from None
        except ValueError as exc:
            if isinstance(exc, ModelError):
                raise
            raise UsageError(f"{args.p_file}: {exc}", "p-file") from None
    parts = _floats(args.zipf, "zipf")
    if len(parts) != 2 or parts[0] != int(parts[0]):
        raise UsageError("--zipf expects N,EXPONENT", "zipf")
    return zipf_vector(int(parts[0]), parts[1])


def params_from_args(args, p: PopularityVector) -> ModelParams:
    return ModelParams(p.n, args.capacity)


def theta_grid(text: Optional[str]) -> List[float]:
    if text is None:
        return [k / 10 for k in range(11)]
    grid = _floats(text, "grid")
    if not grid:
        raise UsageError("theta grid is empty", "grid")
    if any(not 0.0 <= t <= 1.0 for t in grid):
        raise UsageError("theta grid entries must lie in [0, 1]", "grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise UsageError("theta grid must be strictly increasing", "grid")
    return grid


def quad_from_args(args) -> QuadratureConfig:
    return QuadratureConfig(args.t_order, args.y_order, args.refine_limit, args.quad_tol)


def sim_from_args(args) -> SimConfig:
    return SimConfig(args.seed, args.samples, args.steps, args.burn_in, args.replicas)


# -- output -----------------------------------------------------------------------


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _jsonable(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def render(command: str, columns: List[str], rows: List[list], fmt: str, footer: Optional[dict] = None) -> str:
    footer = footer or {}
    if fmt == "json":
        doc = {
            "command": command,
            "columns": columns,
            "rows": [{c: _jsonable(v) for c, v in zip(columns, row)} for row in rows],
        }
        if footer:
            doc["footer"] = {k: _jsonable(v) for k, v in footer.items()}
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    for key, value in footer.items():
        buf.write(f"# {key}={_cell(value)}\n")
    return buf.getvalue()


def emit(text: str, output: Optional[str]) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
        return
    path = Path(output)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


# -- subcommands ------------------------------------------------------------------


def cmd_hitrate(args):
    p = popularity_from_args(args)
    params = params_from_args(args, p)
    cols = ["n", "capacity", "hit_rate_residual", "hit_rate_pair_square"]
    row = [p.n, params.capacity, hit_rate_residual(p, params).value,
           hit_rate_pair_square(p, params).value]
    if args.brute_force:
        if p.n > ORACLE_CAP:
            raise UsageError(f"--brute-force needs N <= {ORACLE_CAP}", "brute-force")
        cols.append("hit_rate_brute_force")
        row.append(brute_force_hit_rate(p, params).value)
    if args.exact:
        cols.append("hit_rate_exact")
        row.append(hit_rate_residual(p, params, exact=True).value)
    return "hitrate", cols, [row], {}


def cmd_sweep(args):
    q = popularity_from_args(args)
    params = params_from_args(args, q)
    params.require_partial()
    quad = quad_from_args(args)
    rows = []
    for theta in theta_grid(args.grid):
        h = hit_rate_residual(ray_point(q, theta), params).value
        d = radial_derivative(q, theta, params).derivative
        m = master_identity_derivative(q, theta, params, quad).derivative if theta > 0 else 0.0
        rows.append([theta, h, d, m])
    return "sweep", ["theta", "hit_rate", "derivative", "master_derivative"], rows, {}


def cmd_derivative(args):
    q = popularity_from_args(args)
    params = params_from_args(args, q)
    params.require_partial()
    theta = args.theta
    rep = radial_derivative(q, theta, params)
    if theta > 0:
        master = master_identity_derivative(q, theta, params, quad_from_args(args))
        t1, t2, md = master.t1, master.t2, master.derivative
    else:
        t1 = t2 = md = 0.0
    cols = ["theta", "derivative", "master_derivative", "t1", "t2"]
    return "derivative", cols, [[theta, rep.derivative, md, t1, t2]], {}


def cmd_kernel(args):
    p = popularity_from_args(args)
    params = params_from_args(args, p)
    quad = quad_from_args(args)
    mat = kernel_matrix(p, params)
    rows = []
    for a, b in mat.pairs():
        split = kernel_split(p, params, a, b)
        if args.no_quad:
            phi_q = psi_q = float("nan")
        else:
            phi_q, psi_q = phi_psi_quadrature(p, params, a, b, quad)
        rows.append([a + 1, b + 1, mat.j_values[a, b], mat.k_values[a, b],
                     split.phi, split.psi, phi_q, psi_q])
    cols = ["a", "b", "J", "K", "Phi", "Psi", "Phi_quad", "Psi_quad"]
    return "kernel", cols, rows, {}


def cmd_searchcost(args):
    p = popularity_from_args(args)
    dist = search_cost_distribution(p)
    rows = [[d + 1, dist.cdf[d], pmf] for d, pmf in enumerate(dist.pmf)]
    footer = {"expected_search_cost": expected_cost_functional(p, np.arange(1, p.n + 1), dist=dist)}
    if args.cost is not None:
        footer["expected_cost"] = expected_cost_functional(p, _floats(args.cost, "cost"), dist=dist)
    return "searchcost", ["depth", "cdf", "pmf"], rows, footer


def cmd_simulate(args):
    p = popularity_from_args(args)
    params = params_from_args(args, p)
    cfg = sim_from_args(args)
    exact = hit_rate_residual(p, params).value
    runs = []
    if args.method in ("stationary", "both"):
        runs.append(("stationary", estimate_hit_rate_stationary(p, params, cfg)))
    if args.method in ("chain", "both"):
        runs.append(("chain", simulate_mtf_chain(p, params, cfg)))
    cols = ["method", "hit_rate_estimate", "std_error", "samples_used", "burn_in", "exact_hit_rate"]
    cols += [f"depth_{d}" for d in range(1, p.n + 1)]
    rows, footer = [], {}
    for name, res in runs:
        rows.append([name, res.hit_rate_estimate, res.std_error, res.samples_used, res.burn_in, exact,
                     *res.search_cost_histogram.tolist()])
        if res.burn_in_heuristic:
            footer[f"{name}_note"] = res.notes[0]
    return "simulate", cols, rows, footer


def cmd_verify(args):
    results = run_suite(seed=args.seed, max_n=args.max_n, full=args.full)
    for res in results:
        print(res.line(), file=sys.stderr)
    rows = [[r.name, "pass" if r.passed else "fail", r.detail, r.seconds] for r in results]
    return "verify", ["property", "status", "detail", "seconds"], rows, {}


# -- parser -------------------------------------------------------------------------


def _common(sub, popularity=True, capacity=True):
    sub.add_argument("--format", choices=["csv", "json"], default="csv")
    sub.add_argument("--output", help=f"output file (relative paths go under ${OUTPUT_DIR_ENV} if set)")
    if popularity:
        src = sub.add_argument_group("popularity source (exactly one)")
        src.add_argument("--p", "--q", dest="p", help="comma-separated probabilities, or 'uniform'")
        src.add_argument("--p-file", help="file with one probability per line or JSON {\"probs\": [...]}")
        src.add_argument("--zipf", help="N,EXPONENT")
        src.add_argument("--n", type=int, default=4, help="item count for 'uniform' (default 4)")
    if capacity:
        sub.add_argument("--capacity", "-C", type=int, required=True)


def _quad_args(sub):
    d = QuadratureConfig()
    sub.add_argument("--t-order", type=int, default=d.t_order)
    sub.add_argument("--y-order", type=int, default=d.y_order)
    sub.add_argument("--refine-limit", type=int, default=d.refine_limit)
    sub.add_argument("--quad-tol", type=float, default=d.tolerance)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lru-radial", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("hitrate", help="exact hit rate by two formulas")
    _common(s)
    s.add_argument("--brute-force", action="store_true", help=f"add the N! oracle (N <= {ORACLE_CAP})")
    s.add_argument("--exact", action="store_true", help="add the rational-arithmetic value (N <= 12)")
    s.set_defaults(func=cmd_hitrate)

    s = subs.add_parser("sweep", help="hit rate and derivatives along the ray from uniform to q")
    _common(s)
    s.add_argument("--grid", help="comma-separated theta values in [0, 1], strictly increasing")
    _quad_args(s)
    s.set_defaults(func=cmd_sweep)

    s = subs.add_parser("derivative", help="radial derivative at one theta by both formulas")
    _common(s)
    s.add_argument("--theta", type=float, default=1.0)
    _quad_args(s)
    s.set_defaults(func=cmd_derivative)

    s = subs.add_parser("kernel", help="per-pair J, K and the phi/psi split")
    _common(s)
    s.add_argument("--no-quad", action="store_true", help="skip the quadrature columns")
    _quad_args(s)
    s.set_defaults(func=cmd_kernel)

    s = subs.add_parser("searchcost", help="stationary move-to-front search-cost law")
    _common(s, capacity=False)
    s.add_argument("--cost", help="comma-separated g(1..N) for an extra E g(D) footer")
    s.set_defaults(func=cmd_searchcost)

    s = subs.add_parser("simulate", help="Monte Carlo estimates with standard errors")
    _common(s)
    d = SimConfig()
    s.add_argument("--method", choices=["stationary", "chain", "both"], default="both")
    s.add_argument("--seed", type=int, default=d.seed)
    s.add_argument("--samples", type=int, default=d.samples)
    s.add_argument("--steps", type=int, default=d.steps)
    s.add_argument("--burn-in", type=int, default=None)
    s.add_argument("--replicas", type=int, default=d.replicas)
    s.set_defaults(func=cmd_simulate)

    s = subs.add_parser("verify", help="run the property suite; exit 1 on any failure")
    _common(s, popularity=False, capacity=False)
    s.add_argument("--max-n", type=int, default=6)
    s.add_argument("--full", action="store_true", help="minutes-scale tier")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        command, cols, rows, footer = args.func(args)
    except ModelError as exc:
        print(f"lru-radial: error: {exc.field}: {exc}", file=sys.stderr)
        return 2
    except QuadratureNotConverged as exc:
        print(f"lru-radial: error: quadrature: {exc}", file=sys.stderr)
        return 1
    emit(render(command, cols, rows, args.format, footer), args.output)
    if command == "verify" and not all(row[1] == "pass" for row in rows):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
