"""Command-line entry point: one subcommand per operation, CSV or JSON out.

Exit codes: 0 success, 2 argument error, 3 truncation refusal.  Output goes to
``--output``, else to ``$OPFRACTAL_OUTPUT_DIR/<subcommand>.<fmt>`` when that
variable is set, else to stdout.  Files are written atomically.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .basis import expand, gamma_set, gram_matrix, parseval_defect
from .operators import (
    TruncationError,
    build_S,
    build_U,
    commutator_norms,
    iterate_regression,
)
from .sampling import (
    FIGURE_COLUMNS,
    IntervalQuery,
    empirical_char,
    figure1_data,
    hutchinson_residual,
    pushforward_mass,
    sample_batch,
    truncation_error,
)
from .spectral import (
    atom_at_one,
    cesaro_average,
    fejer_density,
    herglotz_defect,
    moments,
    named_vector,
)
from .transform import mu_hat

SCHEMA = 1
EXIT_OK, EXIT_ARGS, EXIT_REFUSED = 0, 2, 3
OUTPUT_DIR_ENV = "OPFRACTAL_OUTPUT_DIR"


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    fmt: str = "json"
    output: str | None = None
    tol: float = 1e-12
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.fmt not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        if self.threads < 0:
            raise ValueError("threads must be >= 0")


@dataclass
class Result:
    header: list
    rows: list
    summary: dict
    truncation: dict | None = None
    leakage_budget: float | None = None


def _fraction(text: str) -> float:
    return float(Fraction(text))


def _leakage_limit(text: str):
    return None if text.lower() in ("none", "inf") else float(text)


# handlers ------------------------------------------------------------------


def _transform(c: RunConfig) -> Result:
    rows = []
    for t in c.params["t"]:
        tv = mu_hat(t, c.params["lam"], c.tol)
        rows.append([tv.t, tv.value, tv.depth, tv.tail_bound])
    summary = {"values": [dict(zip(("t", "value", "depth", "tail_bound"), r)) for r in rows]}
    return Result(["t", "value", "depth", "tail_bound"], rows, summary)


def _gamma(c: RunConfig) -> Result:
    S = gamma_set(c.params["m"], c.params["scale"])
    rows = [[i, int(g), "".join(map(str, reversed(S.digits(i)))) or "0"] for i, g in enumerate(S.elements)]
    summary = {"size": len(S), "max": int(S.elements[-1]), "scale": S.scale}
    return Result(["index", "gamma", "digits"], rows, summary, {"m": S.digit_count, "terms": len(S)})


def _gram(c: RunConfig) -> Result:
    S = gamma_set(c.params["m"], c.params["scale"])
    G = gram_matrix(S.elements, c.tol)
    off = G - np.diag(np.diag(G))
    rows = [[i, j, G[i, j]] for i in range(len(S)) for j in range(len(S))]
    summary = {
        "max_offdiagonal": float(np.max(np.abs(off))),
        "max_diagonal_deviation": float(np.max(np.abs(np.diag(G) - 1))),
        "scale": S.scale,
    }
    return Result(["i", "j", "value"], rows, summary, {"m": S.digit_count, "terms": len(S)})


def _expand(c: RunConfig) -> Result:
    S = gamma_set(c.params["m"])
    v = expand(c.params["t"], S, c.tol)
    rows = [[i, int(g), z.real, z.imag] for i, (g, z) in enumerate(zip(S.elements, v.coeffs))]
    summary = {"t": c.params["t"], "norm2": v.norm2, "defect": 1 - v.norm2}
    return Result(
        ["index", "gamma", "coefficient_real", "coefficient_imag"],
        rows,
        summary,
        {"m": S.digit_count, "terms": len(S)},
    )


def _parseval(c: RunConfig) -> Result:
    t, m = c.params["t"], c.params["m"]
    rows = [[k, 2**k, parseval_defect(t, gamma_set(k), c.tol)] for k in range(m + 1)]
    summary = {"t": t, "defect": rows[-1][2], "defects": [r[2] for r in rows]}
    return Result(["m", "terms", "defect"], rows, summary, {"m": m, "terms": 2**m})


def _operator(c: RunConfig) -> Result:
    S = gamma_set(c.params["m"])
    kind = c.params["kind"]
    base = {"U5": lambda: build_U(S, c.tol, c.threads), "S0": lambda: build_S(S, 0), "S1": lambda: build_S(S, 1)}
    op = base[kind.replace("_adjoint", "")]()
    if kind.endswith("_adjoint"):
        op = op.adjoint()
    E = op.entries
    nz = np.argwhere(E != 0)
    rows = [[int(S.elements[i]), int(S.elements[j]), E[i, j].real, E[i, j].imag] for i, j in nz]
    cn = op.column_norms2()
    summary = {
        "kind": op.kind,
        "size": len(S),
        "column_norm2_min": float(cn.min()),
        "column_norm2_max": float(cn.max()),
        "column_leakage_max": float(1 - cn.min()),
        "nonzeros": int(len(nz)),
    }
    if kind == "U5" and c.params["m"] <= 10:
        summary["commutators"] = asdict(commutator_norms(S, c.tol))
    return Result(["row_gamma", "col_gamma", "real", "imag"], rows, summary, {"m": S.digit_count, "terms": len(S)})


def _regression(c: RunConfig) -> Result:
    r = iterate_regression(c.params["m"], c.tol)
    summary = asdict(r)
    return Result(list(summary), [list(summary.values())], summary, {"m": c.params["m"], "terms": r.terms})


def _vector(c: RunConfig, key: str):
    S = gamma_set(c.params["m"])
    return S, named_vector(c.params[key], S, c.seed, c.params.get("support_m"))


def _moments(c: RunConfig) -> Result:
    S, v = _vector(c, "v")
    ms = moments(v, c.params["K"], S, c.tol, c.params["max_leakage"])
    rows = [[k, ms.moment(k).real, ms.moment(k).imag, ms.cumulative_leakage[k]] for k in range(ms.K + 1)]
    summary = {
        "moments": [{"k": int(k), "re": z.real, "im": z.imag} for k, z in zip(ms.orders, ms.c)],
        "atom_at_1": atom_at_one(ms),
        "herglotz_defect": herglotz_defect(ms),
        "adjoint_leakage": ms.adjoint_leakage,
    }
    return Result(["k", "re", "im", "cumulative_leakage"], rows, summary, {"m": S.digit_count, "terms": len(S)}, ms.leakage_budget)


def _atom(c: RunConfig) -> Result:
    S, v = _vector(c, "v")
    ms = moments(v, c.params["K"], S, c.tol, c.params["max_leakage"])
    est = fejer_density(ms)
    rows = [[th, d] for th, d in zip(est.grid, est.density)]
    summary = {
        "atom_at_1": est.atom_at_1,
        "herglotz_defect": herglotz_defect(ms),
        "density_min": float(est.density.min()),
        "density_integral": float(est.density.mean()),
    }
    return Result(["theta", "density"], rows, summary, {"m": S.digit_count, "terms": len(S)}, ms.leakage_budget)


def _ergodic(c: RunConfig) -> Result:
    S, f = _vector(c, "f")
    r = cesaro_average(f, c.params["N"], S, c.tol, c.params["max_leakage"])
    summary = {
        "N": r.N,
        "projection_coeff_re": r.projection_coeff.real,
        "projection_coeff_im": r.projection_coeff.imag,
        "residual_norm": r.residual_norm,
    }
    return Result(list(summary), [list(summary.values())], summary, {"m": S.digit_count, "terms": len(S)}, r.leakage_budget)


def _batch(c: RunConfig):
    p = c.params
    return sample_batch(p["lam"], p["depth"], p["samples"], c.seed, c.threads)


def _sample(c: RunConfig) -> Result:
    b = _batch(c)
    rows = [[i, x] for i, x in enumerate(b.points)]
    summary = {
        "n": b.n,
        "mean": float(b.points.mean()),
        "variance": float(b.points.var()),
        "min": float(b.points.min()),
        "max": float(b.points.max()),
        "hutchinson_residual": hutchinson_residual(b),
    }
    return Result(["index", "x"], rows, summary, {"depth": b.depth, "truncation_error": truncation_error(b.lam, b.depth)})


def _char(c: RunConfig) -> Result:
    b = _batch(c)
    rows = []
    for t in c.params["t"]:
        z = empirical_char(t, b)
        ref = mu_hat(t, b.lam, c.tol).value
        rows.append([t, z.real, z.imag, ref, abs(z - ref)])
    summary = {"bound": 4 / math.sqrt(b.n), "max_abs_error": max(r[4] for r in rows)}
    return Result(["t", "re", "im", "mu_hat", "abs_error"], rows, summary, {"depth": b.depth, "samples": b.n})


def _pushforward(c: RunConfig) -> Result:
    p = c.params
    b = _batch(c)
    q = IntervalQuery(p["a"], p["b"], unit=not p["symmetric"])
    r = pushforward_mass(b, p["n_scale"], q)
    summary = asdict(r) | {"n_scale": p["n_scale"], "interval": [q.a, q.b], "unit_embedded": q.unit}
    return Result(list(summary)[:5], [list(asdict(r).values())], summary, {"depth": b.depth, "samples": b.n})


def _figure1(c: RunConfig) -> Result:
    rows = [list(r) for r in figure1_data(c.params["levels"], c.params["grid"])]
    series = sorted({r[0] for r in rows})
    summary = {"series": series, "rows": len(rows)}
    return Result(list(FIGURE_COLUMNS), rows, summary)


HANDLERS = {
    "transform": (_transform, "csv"),
    "gamma": (_gamma, "csv"),
    "gram": (_gram, "json"),
    "expand": (_expand, "csv"),
    "parseval": (_parseval, "json"),
    "operator": (_operator, "json"),
    "regression": (_regression, "json"),
    "moments": (_moments, "csv"),
    "atom": (_atom, "json"),
    "ergodic": (_ergodic, "json"),
    "sample": (_sample, "csv"),
    "char": (_char, "json"),
    "pushforward": (_pushforward, "json"),
    "figure1": (_figure1, "csv"),
}


# parsing -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-12)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"))
    common.add_argument("--output", "-o")

    p = argparse.ArgumentParser(prog="opfractal", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    s = add("transform", "truncated product value of mu_hat")
    s.add_argument("--t", type=float, nargs="+", default=[0.0, 1.0, 10.0, 30.0, 120.0])
    s.add_argument("--lam", type=_fraction, default=0.25)

    for name, help_ in (("gamma", "enumerate the spectrum"), ("gram", "Gram matrix of exponentials")):
        s = add(name, help_)
        s.add_argument("--m", type=int, default=9)
        s.add_argument("--scale", type=int, default=1)

    for name, help_ in (("expand", "ONB coefficients of e_t"), ("parseval", "Parseval partial-sum defect")):
        s = add(name, help_)
        s.add_argument("--t", type=_fraction, required=True)
        s.add_argument("--m", type=int, default=9)

    s = add("operator", "truncated U, U*, S0, S1")
    s.add_argument("--m", type=int, default=9)
    s.add_argument("--kind", default="U5", choices=("U5", "U5_adjoint", "S0", "S1", "S0_adjoint", "S1_adjoint"))

    s = add("regression", "coefficient of e_5 in U^3 e_1 and in e_125")
    s.add_argument("--m", type=int, default=9)

    for name, key, count, default in (("moments", "v", "K", 8), ("atom", "v", "K", 8), ("ergodic", "f", "N", 64)):
        s = add(name, f"{name} of a named vector")
        s.add_argument(f"--{key}", default="e1", help="e0, e1+e5, ... or random")
        s.add_argument(f"--{count}", type=int, default=default)
        s.add_argument("--m", type=int, default=10)
        s.add_argument("--support-m", type=int, help="support of a random vector")
        s.add_argument("--max-leakage", type=_leakage_limit, default=0.1)

    for name, help_ in (("sample", "Monte Carlo points"), ("char", "empirical characteristic function"), ("pushforward", "tau_n pushforward mass")):
        s = add(name, help_)
        s.add_argument("--samples", type=int, default=10**6)
        s.add_argument("--depth", type=int, default=30)
        s.add_argument("--lam", type=_fraction, default=0.25)
        if name == "char":
            s.add_argument("--t", type=float, nargs="+", default=[float(k) for k in range(1, 21)])
        if name == "pushforward":
            s.add_argument("--n-scale", type=int, default=5)
            s.add_argument("--a", type=_fraction, default=2 / 3)
            s.add_argument("--b", type=_fraction, default=1.0)
            s.add_argument("--symmetric", action="store_true", help="skip the +1/3 shift")

    s = add("figure1", "tau_5 graph and Cantor-set covers")
    s.add_argument("--levels", type=int, default=2)
    s.add_argument("--grid", type=int, default=501)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    d = vars(ns).copy()
    command = d.pop("command")
    fmt = d.pop("fmt") or HANDLERS[command][1]
    return RunConfig(
        command=command,
        fmt=fmt,
        output=d.pop("output"),
        tol=d.pop("tol"),
        seed=d.pop("seed"),
        threads=d.pop("threads"),
        params=d,
    )


# output --------------------------------------------------------------------


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _envelope(c: RunConfig, res: Result | None, reason: str | None = None) -> dict:
    return {
        "schema": SCHEMA,
        "tool": "opfractal",
        "version": __version__,
        "subcommand": c.command,
        # threads is left out on purpose: results do not depend on it
        "config": _plain({"params": c.params, "tol": c.tol, "seed": c.seed, "format": c.fmt}),
        "seed": c.seed,
        "truncation": _plain(res.truncation) if res else None,
        "leakage_budget": _plain(res.leakage_budget) if res else None,
        "result": _plain(res.summary) if res and res.summary is not None else None,
        "reason": reason,
    }


def render(c: RunConfig, res: Result | None, reason: str | None = None) -> str:
    if c.fmt == "json":
        return json.dumps(_envelope(c, res, reason), indent=2, sort_keys=True, allow_nan=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(res.header)
    for row in res.rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _destination(c: RunConfig) -> Path | None:
    if c.output:
        return Path(c.output)
    d = os.environ.get(OUTPUT_DIR_ENV)
    if d:
        return Path(d) / f"{c.command}.{c.fmt}"
    return None


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(c: RunConfig, text: str) -> None:
    dest = _destination(c)
    if dest is None:
        sys.stdout.write(text)
    else:
        write_atomic(dest, text)


def run(c: RunConfig) -> int:
    handler, _ = HANDLERS[c.command]
    try:
        res = handler(c)
    except TruncationError as e:
        print(f"opfractal {c.command}: {e}", file=sys.stderr)
        partial = Result(["status", "reason"], [["refused", str(e)]], None, {"m": c.params.get("m"), "refused_after_steps": e.steps}, e.budget)
        _emit(c, render(c, partial, str(e)))
        return EXIT_REFUSED
    except (ValueError, OverflowError) as e:
        print(f"opfractal {c.command}: {e}", file=sys.stderr)
        return EXIT_ARGS
    _emit(c, render(c, res))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        config = config_from_args(ns)
    except ValueError as e:
        parser.print_usage(sys.stderr)
        print(f"opfractal: {e}", file=sys.stderr)
        return EXIT_ARGS
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
