"""Command-line front end.

Each subcommand reads an optional JSON config (``--config``), overlays any
flags given on the command line, validates the result and writes CSV files
into ``--out-dir``, each with a ``.meta.json`` sibling echoing the parameters.
Failures print one JSON line on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from . import __version__
from .errors import FracCollocError

CSV_FLOAT = "{:.16e}"

DEFAULTS: dict[str, dict] = {
    "points": {"family": "legendre", "n": None, "interval": [-1.0, 1.0]},
    "diffmat": {"kind": "rl-left", "family": "legendre", "n": None, "alpha": None, "interval": [-1.0, 1.0], "precision": None},
    "converge": {
        "example": "example1",
        "family": "legendre",
        "alpha": [1.5],
        "n": [6, 8, 10, 12, 14, 16, 18, 20],
        "tau": 0.1,
        "t_final": 1.0,
        "precision": None,
        "jobs": 1,
    },
    "solve1d": {
        "example": "example1",
        "family": "legendre",
        "n": 12,
        "alpha": 1.5,
        "tau": 0.1,
        "theta": 0.5,
        "t_final": 1.0,
        "snapshots": [],
        "kappa": None,
        "nu": None,
        "p": None,
        "q": None,
        "precision": None,
    },
    "solve2d": {
        "example": "example3",
        "family": "legendre",
        "n": 10,
        "alpha": 1.5,
        "tau": 0.1,
        "theta": 0.5,
        "t_final": 1.0,
        "snapshots": [],
        "kappa": None,
        "nu": None,
        "p": None,
        "q": None,
        "precision": None,
    },
    "eigens": {
        "example": "example1",
        "family": "legendre",
        "n": 6,
        "alpha": 1.5,
        "tau": 0.1,
        "theta": 0.5,
        "kappa": None,
        "nu": None,
        "p": None,
        "q": None,
        "precision": None,
    },
    "levy-feller": {
        "alpha": 1.8,
        "vartheta": [0.1],
        "n": 20,
        "family": "legendre",
        "tau": 0.1,
        "t_final": 1.0,
        "snapshots": [0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
        "nu": 1.0,
        "precision": None,
    },
    "coeff-report": {"n": [15, 20, 25, 30, 35], "bits": 256, "method": "henrici"},
}


class CliError(FracCollocError, ValueError):
    """Invalid command-line input."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


# ------------------------------------------------------------------ output


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if np.isnan(v) or np.isinf(v):
        return "inf"
    return CSV_FLOAT.format(v)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def write_meta(path: Path, command: str, params: dict, **extra) -> None:
    meta = {"command": command, "version": __version__, "parameters": params, **extra}
    meta_path = path.with_name(path.name + ".meta.json")
    meta_path.write_bytes((json.dumps(meta, indent=2, sort_keys=True) + "\n").encode("utf-8"))


def _tag(v: float) -> str:
    return f"{v:g}"


# -------------------------------------------------------------- validation


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise CliError(message)


def _positive_int(name: str, v) -> int:
    _require(v is not None, f"{name} is required")
    _require(float(v) == int(v) and int(v) >= 1, f"{name} must be an integer >= 1, got {v}")
    return int(v)


def _order(v, lo=1.0, hi=2.0) -> float:
    _require(v is not None, "alpha is required")
    v = float(v)
    _require(lo < v < hi, f"alpha must lie in ({lo:g}, {hi:g}), got {v}")
    return v


def _precision(v):
    from .numerics import PrecisionMode

    return PrecisionMode.parse(v) if v else None


def _precision_label(v, N: int) -> str:
    from .numerics import PrecisionMode

    return str(_precision(v) or PrecisionMode.for_degree(N))


def _coefficients(cfg: dict) -> dict:
    return {k: float(cfg[k]) for k in ("kappa", "nu", "p", "q") if cfg.get(k) is not None}


# ---------------------------------------------------------------- commands


def cmd_points(cfg: dict, out: Path) -> list[Path]:
    from .grids import make_grid

    N = _positive_int("n", cfg["n"])
    grid = make_grid(cfg["family"], N, tuple(cfg["interval"]))
    path = out / f"points_{grid.family.value}_N{N}.csv"
    if grid.weights is not None:
        write_csv(path, ["i", "x", "w"], ((i, x, w) for i, (x, w) in enumerate(zip(grid.points, grid.weights))))
    else:
        write_csv(path, ["i", "x"], enumerate(grid.points))
    write_meta(path, "points", cfg)
    return [path]


def cmd_diffmat(cfg: dict, out: Path) -> list[Path]:
    from .fracmat import Kind, diff_matrix
    from .grids import make_grid

    N = _positive_int("n", cfg["n"])
    kind = Kind(cfg["kind"])
    alpha = None
    if kind is not Kind.FIRST:
        _require(cfg["alpha"] is not None, f"{kind.value} needs --alpha")
        alpha = float(cfg["alpha"])
        _require(not alpha.is_integer(), f"alpha must be non-integer for {kind.value}, got {alpha}")
    grid = make_grid(cfg["family"], N, tuple(cfg["interval"]))
    D = diff_matrix(kind, grid, alpha, _precision(cfg["precision"]))
    path = out / f"diffmat_{kind.value}_{grid.family.value}_N{N}.csv"
    write_csv(path, ["j"] + [f"c{i}" for i in range(N + 1)], ([j, *row] for j, row in enumerate(D.entries)))
    write_meta(
        path,
        "diffmat",
        cfg,
        precision=_precision_label(cfg["precision"], N) if alpha is not None else "double",
        undefined_rows=sorted(D.undefined_rows),
    )
    return [path]


def cmd_converge(cfg: dict, out: Path) -> list[Path]:
    from .analysis import convergence_sweep
    from .source_oracle import get_case

    case = get_case(cfg["example"])
    Ns = [_positive_int("n", n) for n in _as_list(cfg["n"])]
    _require(len(Ns) > 0, "N list must not be empty")
    alphas = [_order(a) for a in _as_list(cfg["alpha"])]
    _require(len(alphas) > 0, "alpha list must not be empty")
    _require(float(cfg["tau"]) > 0, "tau must be positive")
    jobs = _positive_int("jobs", cfg["jobs"])
    tables = convergence_sweep(
        case.key, cfg["family"], alphas, Ns, float(cfg["tau"]), float(cfg["t_final"]), cfg["precision"], jobs
    )
    paths = []
    for table in tables:
        path = out / f"converge_{case.key}_{table.family}_a{_tag(table.alpha)}.csv"
        write_csv(path, ["N", "Linf", "L2"], table.rows)
        write_meta(
            path,
            "converge",
            {**cfg, "alpha": table.alpha},
            precision={str(n): _precision_label(cfg["precision"], n) for n in table.Ns},
        )
        paths.append(path)
    return paths


def _as_list(v) -> list:
    if v is None:
        return []
    return list(v) if isinstance(v, (list, tuple)) else [v]


def cmd_solve1d(cfg: dict, out: Path) -> list[Path]:
    from .analysis import error_norms, norm_weights
    from .grids import make_grid
    from .solver1d import manufactured_problem_1d, solve_1d
    from .source_oracle import get_case

    case = get_case(cfg["example"])
    _require(case.dimensionality == 1, f"{case.key} is not a 1D example")
    N = _positive_int("n", cfg["n"])
    grid = make_grid(cfg["family"], N)
    prb = manufactured_problem_1d(
        case,
        grid,
        _order(cfg["alpha"]),
        float(cfg["tau"]),
        float(cfg["t_final"]),
        theta=float(cfg["theta"]),
        precision=_precision(cfg["precision"]),
        **_coefficients(cfg),
    )
    times = sorted(set(float(t) for t in _as_list(cfg["snapshots"])) | {prb.T})
    _, snaps = solve_1d(prb, times)
    paths = []
    for t, state in snaps.items():
        path = out / f"solve1d_{case.key}_{grid.family.value}_N{N}_t{_tag(t)}.csv"
        write_csv(path, ["x", "u"], zip(grid.points, state.values))
        linf, l2 = error_norms(state.values, case.exact(t, grid.points), norm_weights(grid))
        write_meta(path, "solve1d", cfg, t=t, precision=_precision_label(cfg["precision"], N), Linf=linf, L2=l2)
        paths.append(path)
    return paths


def cmd_solve2d(cfg: dict, out: Path) -> list[Path]:
    from .analysis import error_norms, norm_weights
    from .grids import make_grid
    from .solver2d import grid_mesh, make_scheme, manufactured_problem_2d, solve_2d
    from .source_oracle import get_case

    case = get_case(cfg["example"])
    _require(case.dimensionality == 2, f"{case.key} is not a 2D example")
    N = _positive_int("n", cfg["n"])
    grid = make_grid(cfg["family"], N)
    prb = manufactured_problem_2d(
        case,
        grid,
        _order(cfg["alpha"]),
        float(cfg["tau"]),
        float(cfg["t_final"]),
        theta=float(cfg["theta"]),
        precision=_precision(cfg["precision"]),
        **_coefficients(cfg),
    )
    times = sorted(set(float(t) for t in _as_list(cfg["snapshots"])) | {prb.T})
    scheme = make_scheme(prb)
    _, snaps = solve_2d(prb, times, scheme)
    X, Y = grid_mesh(grid)
    newton = [r.iterations for r in getattr(scheme, "reports", [])]
    paths = []
    for t, state in snaps.items():
        path = out / f"solve2d_{case.key}_{grid.family.value}_N{N}_t{_tag(t)}.csv"
        write_csv(path, ["x", "y", "u"], zip(X.ravel(), Y.ravel(), state.values.ravel()))
        linf, l2 = error_norms(state.values, case.exact(t, X, Y), norm_weights(grid))
        write_meta(
            path, "solve2d", cfg, t=t, precision=_precision_label(cfg["precision"], N), Linf=linf, L2=l2,
            newton_iterations=newton,
        )
        paths.append(path)
    return paths


def cmd_eigens(cfg: dict, out: Path) -> list[Path]:
    from .analysis import eigenvalues_dense
    from .grids import make_grid
    from .solver1d import Problem1D, iteration_matrix_1d
    from .solver2d import Problem2D, iteration_matrix_2d
    from .source_oracle import get_case

    case = get_case(cfg["example"])
    N = _positive_int("n", cfg["n"])
    _require(N >= 2, "n must be at least 2")
    grid = make_grid(cfg["family"], N)
    coef = {**case.defaults, **_coefficients(cfg)}
    common = dict(
        grid=grid,
        alpha=_order(cfg["alpha"]),
        tau=float(cfg["tau"]),
        T=float(cfg["tau"]),
        theta=float(cfg["theta"]),
        precision=_precision(cfg["precision"]),
        **coef,
    )
    if case.dimensionality == 1:
        G = iteration_matrix_1d(Problem1D(**common))
    else:
        G = iteration_matrix_2d(Problem2D(**common))
    spectrum = eigenvalues_dense(G, source=f"{case.key} iteration matrix")
    path = out / f"eigens_{case.key}_{grid.family.value}_N{N}_a{_tag(common['alpha'])}.csv"
    write_csv(path, ["re", "im"], zip(spectrum.eigenvalues.real, spectrum.eigenvalues.imag))
    write_meta(
        path,
        "eigens",
        cfg,
        precision=_precision_label(cfg["precision"], N),
        matrix="interior unknowns, homogeneous Dirichlet boundary eliminated",
        order=int(G.shape[0]),
        spectral_radius=spectrum.radius,
    )
    return [path]


def cmd_levy_feller(cfg: dict, out: Path) -> list[Path]:
    from .grids import make_grid
    from .solver1d import levy_feller_pq, levy_feller_problem, solve_1d

    alpha = _order(cfg["alpha"])
    N = _positive_int("n", cfg["n"])
    varthetas = [float(v) for v in _as_list(cfg["vartheta"])]
    _require(len(varthetas) > 0, "vartheta list must not be empty")
    for v in varthetas:
        _require(abs(v) < 2 - alpha, f"|vartheta| must be below 2 - alpha = {2 - alpha:g}, got {v}")
    grid = make_grid(cfg["family"], N)
    paths = []
    for v in varthetas:
        prb = levy_feller_problem(
            alpha, v, N, float(cfg["tau"]), float(cfg["t_final"]), grid, float(cfg["nu"]), _precision(cfg["precision"])
        )
        times = sorted(set(float(t) for t in _as_list(cfg["snapshots"])) | {prb.T})
        _, snaps = solve_1d(prb, times)
        p, q = levy_feller_pq(alpha, v)
        for t, state in snaps.items():
            path = out / f"levy_feller_a{_tag(alpha)}_th{_tag(v)}_N{N}_t{_tag(t)}.csv"
            write_csv(path, ["x", "u"], zip(grid.points, state.values))
            write_meta(
                path, "levy-feller", {**cfg, "vartheta": v}, t=t, p=p, q=q,
                precision=_precision_label(cfg["precision"], N),
            )
            paths.append(path)
    return paths


def cmd_coeff_report(cfg: dict, out: Path) -> list[Path]:
    from .lagrange import coeff_error_report

    Ns = [_positive_int("n", n) for n in _as_list(cfg["n"])]
    _require(len(Ns) > 0, "N list must not be empty")
    bits = _positive_int("bits", cfg["bits"])
    _require(bits >= 128, f"bits must be at least 128, got {bits}")
    method = str(cfg["method"])
    _require(method in ("henrici", "vandermonde"), f"method must be henrici or vandermonde, got {method!r}")
    path = out / f"coeff_report_{method}.csv"
    write_csv(path, ["N", "max_abs_error"], ((n, coeff_error_report(n, bits, method)) for n in Ns))
    write_meta(path, "coeff-report", cfg, grid="legendre", anchor="left")
    return [path]


COMMANDS = {
    "points": cmd_points,
    "diffmat": cmd_diffmat,
    "converge": cmd_converge,
    "solve1d": cmd_solve1d,
    "solve2d": cmd_solve2d,
    "eigens": cmd_eigens,
    "levy-feller": cmd_levy_feller,
    "coeff-report": cmd_coeff_report,
}


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fraccolloc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="JSON file with parameters; flags override it")
        p.add_argument("--out-dir", type=Path, default=None, help="output directory (default: current)")
        return p

    def family(p):
        p.add_argument("--family", choices=["legendre", "chebyshev"])

    def precision(p):
        p.add_argument("--precision", help="double, extended or extended:<bits> (default depends on N)")

    def coefficients(p):
        for name in ("kappa", "nu", "p", "q"):
            p.add_argument(f"--{name}", type=float)

    p = add("points", "collocation nodes (and Legendre weights)")
    family(p)
    p.add_argument("--n", type=int)
    p.add_argument("--interval", type=float, nargs=2)

    p = add("diffmat", "dump a differentiation matrix")
    p.add_argument("--kind", choices=["rl-left", "rl-right", "caputo-left", "caputo-right", "first"])
    family(p)
    p.add_argument("--n", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--interval", type=float, nargs=2)
    precision(p)

    p = add("converge", "error table over N for one or more alpha")
    p.add_argument("--example")
    family(p)
    p.add_argument("--alpha", type=float, nargs="+")
    p.add_argument("--n", type=int, nargs="*")
    p.add_argument("--tau", type=float)
    p.add_argument("--t-final", type=float)
    p.add_argument("--jobs", type=int)
    precision(p)

    for name, help_text in (("solve1d", "1D manufactured-solution run"), ("solve2d", "2D manufactured-solution run")):
        p = add(name, help_text)
        p.add_argument("--example")
        family(p)
        p.add_argument("--n", type=int)
        p.add_argument("--alpha", type=float)
        p.add_argument("--tau", type=float)
        p.add_argument("--theta", type=float)
        p.add_argument("--t-final", type=float)
        p.add_argument("--snapshots", type=float, nargs="*")
        coefficients(p)
        precision(p)

    p = add("eigens", "eigenvalues of the iteration matrix")
    p.add_argument("--example")
    family(p)
    p.add_argument("--n", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--theta", type=float)
    coefficients(p)
    precision(p)

    p = add("levy-feller", "source-free Levy-Feller runs")
    p.add_argument("--alpha", type=float)
    p.add_argument("--vartheta", type=float, nargs="+")
    family(p)
    p.add_argument("--n", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--t-final", type=float)
    p.add_argument("--snapshots", type=float, nargs="*")
    p.add_argument("--nu", type=float)
    precision(p)

    p = add("coeff-report", "binary64 vs extended error of power-basis coefficients")
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--bits", type=int)
    p.add_argument("--method", choices=["henrici", "vandermonde"])
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then the JSON config, then explicit flags."""
    cfg = dict(DEFAULTS[args.command])
    if args.config is not None:
        try:
            loaded = json.loads(args.config.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CliError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise CliError("config must be a JSON object")
        loaded = {k.replace("-", "_"): v for k, v in loaded.items()}
        unknown = sorted(set(loaded) - set(cfg) - {"out_dir"})
        if unknown:
            raise CliError(f"unknown config keys for {args.command}: {unknown}")
        cfg.update(loaded)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "out_dir") and v is not None}
    cfg.update(flags)
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        out = args.out_dir or Path(cfg.pop("out_dir", ".") or ".")
        cfg.pop("out_dir", None)
        out.mkdir(parents=True, exist_ok=True)
        for path in COMMANDS[args.command](cfg, out):
            print(path)
        return 0
    except (FracCollocError, ValueError, ArithmeticError, OSError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
