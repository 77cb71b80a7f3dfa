"""Command-line surface: smooth approximant search plus Ψ/ρ/α tabulation,
Kloosterman averages, and dispersion reports, emitted as JSON or CSV.

Every flag can also be supplied through a line-based key=value config file
(--config); explicit flags win.  Outputs are deterministic byte-for-byte for
a fixed configuration.

Exit codes: 0 success, 2 empty result, 3 budget/capacity exceeded,
4 bad configuration.
"""

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .diophantine import (
    build_target_set,
    cf_convergents,
    connection_bound,
    derive_params,
    dist_nearest,
    parse_alpha,
)
from .dispersion import DispersionParams, bilinear_B, dispersion_sums, sigma_qR, type1_report, type2_report
from .errors import BudgetExceededError, CapacityError, NonConvergenceError
from .expsums import KloostermanParams, kl_smooth_average, kloos_bound_rhs, optimal_z
from .smooth import dickman_rho, largest_prime_factor_array, psi, saddle_alpha

EXIT_OK = 0
EXIT_EMPTY = 2
EXIT_BUDGET = 3
EXIT_BAD_CONFIG = 4

COMMANDS = ("search", "psi", "rho", "alpha", "kloosterman", "dispersion")


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------


@dataclass
class SearchResult:
    """Verified approximants for one convergent a/q.

    Member columns are parallel arrays: n, ‖nα‖, n^{−θ}, P⁺(n), plus the
    connection-bound and strict-power flags for each member.
    """

    q: int
    a: int
    X: float
    R: float
    Y: float
    n: np.ndarray
    dist: np.ndarray
    n_power: np.ndarray
    pplus: np.ndarray
    within_bound: np.ndarray
    below_power: np.ndarray

    @property
    def members(self):
        return list(zip(self.n.tolist(), self.dist.tolist(), self.n_power.tolist(), self.pplus.tolist()))


def _convergents_in_range(alpha, qmin: int, qmax: int):
    out = []
    count = 12
    while True:
        try:
            convs = cf_convergents(alpha, count)
        except CapacityError:
            # decimal fallback ran out of certified precision: walk up one
            # convergent at a time and keep what certifies
            convs = []
            for k in range(1, count):
                try:
                    convs = cf_convergents(alpha, k)
                except CapacityError:
                    break
            out = convs
            break
        out = convs
        if convs[-1].q > qmax or count >= 192:
            break
        count *= 2
    return [c for c in out if qmin <= c.q <= qmax and c.q >= 2]


def search_results(alpha, theta, qmin: int, qmax: int, C: float = 10.0, Y: float = None, budget: int = 10**9):
    """Yield one SearchResult per continued-fraction convergent a/q with
    q in [qmin, qmax]: derive scales, build the target set, and verify every
    member with exact surd arithmetic."""
    theta = Fraction(theta)
    tf = float(theta)
    for conv in _convergents_in_range(alpha, max(qmin, 2), qmax):
        params = derive_params(conv.q, theta, C, Y)
        ns = build_target_set(params, conv.a)
        if len(ns) > budget:
            raise BudgetExceededError(f"{len(ns)} members at q = {conv.q} exceed budget")
        dist = np.array([dist_nearest(int(n), alpha) for n in ns])
        n_power = ns.astype(np.float64) ** (-tf)
        pplus = largest_prime_factor_array(ns)
        bound = connection_bound(params)
        yield SearchResult(
            conv.q,
            conv.a,
            params.X,
            params.R,
            params.Y,
            ns,
            dist,
            n_power,
            pplus,
            dist <= bound,
            dist < n_power,
        )


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_FLAG_NAMES = (
    "alpha",
    "theta",
    "C",
    "qmin",
    "qmax",
    "Y",
    "eta",
    "delta",
    "budget",
    "out",
    "format",
    "x",
    "y",
    "u",
    "M",
    "N",
    "q",
    "a",
    "R",
    "tol",
    "report",
)


@dataclass
class RunConfig:
    command: str
    alpha: str = None
    theta: str = None
    C: float = 10.0
    qmin: int = 2
    qmax: int = None
    Y: str = None
    eta: float = 0.05
    delta: float = 0.1
    budget: int = 10**9
    out: str = None
    format: str = "json"
    x: str = None
    y: str = None
    u: str = None
    M: str = None
    N: float = None
    q: int = None
    a: int = None
    R: float = None
    tol: float = 1e-9
    report: str = "all"


def _read_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"bad config line {raw!r}")
            key, val = line.split("=", 1)
            key = key.strip()
            if key not in _FLAG_NAMES:
                raise ValueError(f"unknown config key {key!r}")
            out[key] = val.strip()
    return out


def _float_list(text: str):
    return [float(t) for t in text.split(",") if t.strip() != ""]


def _parse_Y(text):
    if text is None:
        return None
    if str(text).lower() in ("inf", "infinity"):
        return float("inf")
    return float(text)


def build_config(argv) -> RunConfig:
    ap = argparse.ArgumentParser(prog="smoothdio", description=__doc__)
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", default=None)
    for name in _FLAG_NAMES:
        ap.add_argument(f"--{name}", default=None)
    ns = ap.parse_args(argv)

    merged = {}
    if ns.config:
        merged.update(_read_config_file(ns.config))
    for name in _FLAG_NAMES:
        val = getattr(ns, name)
        if val is not None:
            merged[name] = val

    cfg = RunConfig(command=ns.command)
    casts = {
        "C": float,
        "qmin": int,
        "qmax": int,
        "eta": float,
        "delta": float,
        "budget": int,
        "N": float,
        "q": int,
        "a": int,
        "R": float,
        "tol": float,
    }
    for key, val in merged.items():
        setattr(cfg, key, casts.get(key, str)(val))
    if cfg.format not in ("json", "csv"):
        raise ValueError(f"bad format {cfg.format!r}")
    if cfg.budget <= 0:
        raise ValueError("budget must be positive")
    return cfg


# ---------------------------------------------------------------------------
# command handlers: each returns (columns, rows) with rows a list of dicts
# ---------------------------------------------------------------------------


def _run_search(cfg: RunConfig):
    if cfg.alpha is None or cfg.theta is None or cfg.qmax is None:
        raise ValueError("search needs --alpha, --theta, --qmax")
    alpha = parse_alpha(cfg.alpha)
    theta = Fraction(cfg.theta)
    if not (0 < theta < Fraction(6, 17)):
        raise ValueError("theta must lie in (0, 6/17)")
    cols = ["q", "a", "X", "R", "Y", "n", "dist", "n_power", "pplus", "within_bound", "below_power"]
    rows = []
    for res in search_results(alpha, theta, cfg.qmin, cfg.qmax, cfg.C, _parse_Y(cfg.Y), cfg.budget):
        for i in range(len(res.n)):
            rows.append(
                {
                    "q": res.q,
                    "a": res.a,
                    "X": res.X,
                    "R": res.R,
                    "Y": res.Y,
                    "n": int(res.n[i]),
                    "dist": float(res.dist[i]),
                    "n_power": float(res.n_power[i]),
                    "pplus": int(res.pplus[i]),
                    "within_bound": bool(res.within_bound[i]),
                    "below_power": bool(res.below_power[i]),
                }
            )
    return cols, rows


def _run_psi(cfg: RunConfig):
    if cfg.x is None or cfg.y is None:
        raise ValueError("psi needs --x and --y (comma lists)")
    cols = ["x", "y", "psi"]
    rows = []
    for x in _float_list(cfg.x):
        for y in _float_list(cfg.y):
            rows.append({"x": x, "y": y, "psi": psi(x, y)})
    return cols, rows


def _run_rho(cfg: RunConfig):
    if cfg.u is None:
        raise ValueError("rho needs --u (comma list)")
    cols = ["u", "rho", "tol"]
    rows = [{"u": u, "rho": dickman_rho(u, cfg.tol), "tol": cfg.tol} for u in _float_list(cfg.u)]
    return cols, rows


def _run_alpha(cfg: RunConfig):
    if cfg.x is None or cfg.y is None:
        raise ValueError("alpha needs --x and --y (comma lists)")
    cols = ["x", "y", "alpha", "residual"]
    rows = []
    for x in _float_list(cfg.x):
        for y in _float_list(cfg.y):
            sp = saddle_alpha(x, y)
            rows.append({"x": x, "y": y, "alpha": sp.alpha, "residual": sp.residual})
    return cols, rows


def _run_kloosterman(cfg: RunConfig):
    if cfg.M is None or cfg.x is None or cfg.a is None or cfg.q is None or cfg.y is None:
        raise ValueError("kloosterman needs --M, --x, --a, --q, --y")
    cols = ["M", "x", "a", "q", "y", "value", "z", "bound_rhs", "ratio"]
    rows = []
    ys = _float_list(cfg.y)
    if len(ys) != 1:
        raise ValueError("kloosterman takes a single --y")
    y = ys[0]
    for M in _float_list(cfg.M):
        for x in _float_list(cfg.x):
            value = kl_smooth_average(M, x, cfg.a, cfg.q, y, cfg.budget)
            z = optimal_z(M, x, y)
            rhs = kloos_bound_rhs(KloostermanParams(M, x, cfg.a, cfg.q, y, z, cfg.eta))
            rows.append(
                {
                    "M": M,
                    "x": x,
                    "a": cfg.a,
                    "q": cfg.q,
                    "y": y,
                    "value": value,
                    "z": z,
                    "bound_rhs": rhs,
                    "ratio": value / rhs if rhs else None,
                }
            )
    return cols, rows


def _run_dispersion(cfg: RunConfig):
    if cfg.q is None or cfg.a is None:
        raise ValueError("dispersion needs --q and --a")
    cols = ["kind", "value", "main_term", "ratio", "truncation_error", "runtime_ms", "params"]
    rows = []
    kinds = ("type1", "type2", "sums", "bilinear", "sigma") if cfg.report == "all" else (cfg.report,)
    theta = Fraction(cfg.theta) if cfg.theta else None

    if any(k in kinds for k in ("type1", "type2", "sums", "bilinear")):
        if cfg.M is None or cfg.N is None or cfg.R is None or cfg.Y is None:
            raise ValueError("type1/type2/sums need --M, --N, --R, --Y")
        Ms = _float_list(cfg.M)
        if len(Ms) != 1:
            raise ValueError("dispersion takes a single --M")
        params = DispersionParams(
            Ms[0], cfg.N, cfg.q, cfg.a, cfg.R, _parse_Y(cfg.Y), theta, cfg.delta, cfg.eta
        )
    for kind in kinds:
        if kind == "type1":
            rows.append(_report_row("type1", type1_report(params, cfg.budget)))
        elif kind == "type2":
            rows.append(_report_row("type2", type2_report(params, cfg.budget)))
        elif kind == "sums":
            S1, S2, S3, Sp = dispersion_sums(params, cfg.budget)
            rows.append(
                {
                    "kind": "sums",
                    "value": Sp,
                    "main_term": 0.0,
                    "ratio": None,
                    "truncation_error": 0.0,
                    "runtime_ms": 0.0,
                    "params": {"S1": S1, "S2": S2, "S3": S3},
                }
            )
        elif kind == "bilinear":
            rows.append(_report_row("bilinear", bilinear_B(params, cfg.budget)))
        elif kind == "sigma":
            if theta is None:
                raise ValueError("sigma needs --theta")
            rows.append(_report_row("sigma", sigma_qR(cfg.q, cfg.a, theta, cfg.C, _parse_Y(cfg.Y), cfg.budget)))
        else:
            raise ValueError(f"unknown report kind {kind!r}")
    return cols, rows


def _report_row(kind: str, rep) -> dict:
    d = rep.to_json_dict(deterministic=True)
    d["kind"] = kind
    return d


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _emit(cfg: RunConfig, cols, rows) -> None:
    if cfg.format == "json":
        text = json.dumps({"command": cfg.command, "rows": rows}, sort_keys=True, indent=2) + "\n"
        if cfg.out:
            with open(cfg.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        if cfg.out:
            with open(cfg.out, "w", newline="") as fh:
                _write_csv(fh, cols, rows)
        else:
            _write_csv(sys.stdout, cols, rows)


def _write_csv(fh, cols, rows) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_csv_cell(row.get(c)) for c in cols])


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=True)
    return v


_HANDLERS = {
    "search": _run_search,
    "psi": _run_psi,
    "rho": _run_rho,
    "alpha": _run_alpha,
    "kloosterman": _run_kloosterman,
    "dispersion": _run_dispersion,
}


def main(argv=None) -> int:
    try:
        cfg = build_config(argv if argv is not None else sys.argv[1:])
    except SystemExit as exc:  # argparse reports its own message
        return EXIT_BAD_CONFIG if exc.code not in (0, None) else 0
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG

    try:
        cols, rows = _HANDLERS[cfg.command](cfg)
    except (BudgetExceededError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, NonConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG

    try:
        _emit(cfg, cols, rows)
    except BrokenPipeError:
        return EXIT_OK
    return EXIT_OK if rows else EXIT_EMPTY


if __name__ == "__main__":
    sys.exit(main())
