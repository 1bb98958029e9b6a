"""Command-line driver: ``degenflow {rate,dos,toy,norm,spectrum,sweep} [options]``.

Settings come from built-in defaults, then an optional ``--config`` file of
``key = value`` lines (``#`` starts a comment), then command-line flags.
Each run can write a CSV table and a JSON document (``"schema": 1``, see
``schema/run.schema.json``) next to the ``--out`` path.

Exit codes: 0 success, 2 invalid parameters, 3 flagged non-convergence,
64 unknown flag or subcommand.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import (DomainError, ExperimentRecord, FlowProfile, NotInSpaceError, ParameterError,
                   SpectralParams, TabulatedProfile, make_mgrid)
from .ensemble import EnsembleSpec, make_random, make_separable
from .experiments import alpha_sweep, envelope_check, prepare_ensemble, rate_experiment
from .sobolev import full_norm
from .spectral import band_spectrum, dos_oracle, dos_series, resonance_shift
from .toy import EnergyBranch, dos_toy, dos_toy_oracle

EXIT_OK, EXIT_PARAM, EXIT_FLAGGED, EXIT_USAGE = 0, 2, 3, 64
COMMANDS = ("rate", "dos", "toy", "norm", "spectrum", "sweep")
RATE_COLUMNS = ("T", "sup_error", "predicted_envelope")
DOS_COLUMNS = ("lambda", "member", "shifted", "series_re", "series_im", "oracle_re", "oracle_im",
               "oracle_error", "tail_bound", "flagged")
SWEEP_COLUMNS = ("alpha", "gamma", "measured_slope", "predicted_rate", "envelope_ok", "max_excess")
SCHEMA_PATH = Path(__file__).with_name("schema") / "run.schema.json"


@dataclass
class Config:
    """Flat run configuration; every field is a ``key = value`` entry of a config file."""

    kind: str = "rate"
    alpha: float = 1.0
    c: float = 1.0
    s: float = 0.75
    gamma: float = 0.0
    kmax: int = 32
    mgrid: int = 128
    grading: float = 2.0
    family: str = "random-decay"
    count: int = 16
    seed: int = 7
    k: int = 1
    beta: float = 1.0
    T: str = "10:1e4:25"
    lam: str = "0.1:0.9:9"
    geometric: bool | None = None   # spacing of the grid; default geometric for T, linear for lambda
    branch: str = "(m-0.5)^2"
    window: str = ""
    tabulated: str = ""
    alphas: str = "0.25,0.5,1,2"
    tol: float = 0.15
    out: str = ""
    oracle: bool = False
    gnuplot: bool = False
    plot: bool = False
    jobs: int = 1

    def params(self) -> SpectralParams:
        return SpectralParams(self.s, self.gamma, self.alpha)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**{k: _coerce(k, v) for k, v in data.items()})


_FIELD_TYPES = {f.name: f.type for f in fields(Config)}
_ALIASES = {"lambda": "lam", "T_grid": "T"}


def _coerce(key, value):
    kind = _FIELD_TYPES[key]
    if value is None:
        return None
    if "bool" in kind:
        if isinstance(value, bool):
            return value
        low = str(value).strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ParameterError(f"{key} expects a boolean, got {value!r}")
    try:
        if kind == "int":
            as_float = float(value)
            if as_float != int(as_float):
                raise ValueError
            return int(as_float)
        if kind == "float":
            return float(value)
    except ValueError:
        raise ParameterError(f"{key} expects a {kind}, got {value!r}") from None
    return str(value)


def read_config_file(path) -> dict:
    """``key = value`` pairs from a UTF-8 file; blank lines and ``#`` comments are skipped."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in _FIELD_TYPES:
            raise ParameterError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def parse_grid(text: str, geometric: bool) -> np.ndarray:
    """``start:stop:points`` (or a single value, or a comma list) to an array."""
    text = text.strip()
    if "," in text:
        return np.array([float(v) for v in text.split(",")])
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) != 3:
            raise ValueError
        start, stop, points = float(parts[0]), float(parts[1]), int(float(parts[2]))
    except ValueError:
        raise ParameterError(f"grid must be 'start:stop:points', got {text!r}") from None
    if points < 1:
        raise ParameterError("grid needs at least one point")
    if geometric:
        if start <= 0 or stop <= 0:
            raise ParameterError("geometric grids need positive endpoints")
        return np.geomspace(start, stop, points)
    return np.linspace(start, stop, points)


# --------------------------------------------------------------------------- #
# Argument parsing
# --------------------------------------------------------------------------- #

class _UsageError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        unknown = "unrecognized arguments" in message or "invalid choice" in message
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}",
                          EXIT_USAGE if unknown else EXIT_PARAM)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="degenflow", description="Time averages and density of states for degenerate annulus flows.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    S = argparse.SUPPRESS
    for name in COMMANDS:
        sp = sub.add_parser(name, argument_default=S)
        sp.add_argument("--config", help="key = value file; flags override it")
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--c", type=float, help="flow speed prefactor")
        sp.add_argument("--s", type=float)
        sp.add_argument("--gamma", type=float)
        sp.add_argument("--kmax", type=int)
        sp.add_argument("--mgrid", type=int, help="number of m-quadrature nodes")
        sp.add_argument("--grading", type=float)
        sp.add_argument("--family", choices=["separable", "separable-extremal", "random-decay", "smooth-bump"])
        sp.add_argument("--count", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output stem; writes <stem>.csv and <stem>.json")
        sp.add_argument("--jobs", type=int)
        sp.add_argument("--gnuplot", action="store_true", help="also write <stem>.gp")
        sp.add_argument("--plot", action="store_true", help="also write <stem>.png (needs matplotlib)")
        sp.add_argument("--geometric", action="store_true", help="geometric grid spacing")
        sp.add_argument("--linear", dest="geometric", action="store_false", help="linear grid spacing")
        if name == "rate":
            sp.add_argument("--T", dest="T", help="start:stop:points")
            sp.add_argument("--tol", type=float, help="log-space envelope tolerance")
        if name in ("dos", "toy"):
            sp.add_argument("--lambda", dest="lam", help="value or start:stop:points")
            sp.add_argument("--oracle", action="store_true", help="also run the difference-quotient oracle")
        if name == "toy":
            sp.add_argument("--branch", help="polynomial in m, e.g. \"(m-0.5)^2\"")
            sp.add_argument("--window", help="energy window a,b")
        if name == "norm":
            sp.add_argument("--k", type=int)
            sp.add_argument("--beta", type=float)
        if name == "spectrum":
            sp.add_argument("--tabulated", help="piecewise-linear profile m1:phi1,m2:phi2,...")
        if name == "sweep":
            sp.add_argument("--alphas", help="comma-separated list")
            sp.add_argument("--T", dest="T", help="start:stop:points")
            sp.add_argument("--tol", type=float)
    return parser


def load_config(argv) -> Config:
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    merged = {"kind": command}
    path = ns.pop("config", None)
    if path is not None:
        file_values = read_config_file(path)
        file_values.pop("kind", None)
        merged.update(file_values)
    merged.update(ns)
    return Config.from_dict(merged)


# --------------------------------------------------------------------------- #
# Output
# --------------------------------------------------------------------------- #

def _fmt(x: float) -> str:
    return repr(float(f"{x:.10g}"))


def _write_csv(path: Path, columns, rows):
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(columns)
        writer.writerows(rows)


def _write_outputs(cfg: Config, document: dict, columns=None, rows=None, gnuplot=None, plot=None):
    if not cfg.out:
        return
    stem = Path(cfg.out)
    if stem.suffix in (".csv", ".json"):
        stem = stem.with_suffix("")
    stem.parent.mkdir(parents=True, exist_ok=True)
    if columns is not None:
        _write_csv(stem.with_suffix(".csv"), columns, rows)
    stem.with_suffix(".json").write_text(json.dumps(document, indent=2, default=_json_default) + "\n",
                                         encoding="utf-8")
    if cfg.gnuplot and gnuplot is not None:
        stem.with_suffix(".gp").write_text(gnuplot(stem), encoding="utf-8")
    if cfg.plot and plot is not None:
        plot(stem.with_suffix(".png"))


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Fraction):
        return str(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _document(cfg: Config, results, records=(), flagged=False, note=None) -> dict:
    doc = {"schema": 1, "command": cfg.kind, "config": cfg.to_dict(), "results": results,
           "flagged": bool(flagged), "records": [r.to_dict() for r in records]}
    if note:
        doc["note"] = note
    return doc


def _plotting():
    try:
        from . import plotting
    except ImportError as exc:
        raise ParameterError("--plot needs matplotlib: pip install 'artifact[plot]'") from exc
    return plotting


# --------------------------------------------------------------------------- #
# Commands
# --------------------------------------------------------------------------- #

def _spec(cfg: Config, p: SpectralParams) -> EnsembleSpec:
    family = "separable-extremal" if cfg.family == "separable" else cfg.family
    return EnsembleSpec(p, cfg.kmax, cfg.count, cfg.seed, family, mgrid=cfg.mgrid, grading=cfg.grading)


def _profile(cfg: Config) -> FlowProfile:
    return FlowProfile(cfg.alpha, cfg.c)


def cmd_rate(cfg: Config, out) -> int:
    p = cfg.params().require_valid()
    T_grid = parse_grid(cfg.T, True if cfg.geometric is None else cfg.geometric)
    members, norms = prepare_ensemble(_spec(cfg, p), jobs=cfg.jobs)
    fit = rate_experiment(members, _profile(cfg), p, T_grid, jobs=cfg.jobs)
    results = fit.to_dict()
    if fit.degenerate:
        print(f"degenerate data: {fit.note}", file=out)
        rows = [(t, e, "") for t, e in fit.samples]
    else:
        rep = envelope_check(fit, -p.rate, cfg.tol)
        results["envelope_check"] = dataclasses.asdict(rep)
        env = fit.predicted_envelope()
        rows = [(t, e, v) for (t, e), v in zip(fit.samples, env)]
        print(f"fitted slope {fit.fitted_slope:.6f} over T in [{fit.window[0]:g}, {fit.window[1]:g}]", file=out)
        print(f"predicted slope {-p.rate:.6f}; envelope check "
              f"{'PASS' if rep.passed else 'FAIL'} (max log excess {rep.max_excess:.4f}, tol {cfg.tol})", file=out)
        print(fit.note, file=out)
    records = [ExperimentRecord("rate-sample", p, t, e, grid={"mgrid": cfg.mgrid, "grading": cfg.grading},
                                kmax=cfg.kmax, seed=cfg.seed) for t, e in fit.samples]
    results["norms"] = norms.tolist()

    def gp(stem):
        return (f"set logscale xy\nset datafile separator ','\nset key autotitle columnhead\n"
                f"set xlabel 'T'\nset ylabel 'sup error'\n"
                f"plot '{stem.name}.csv' using 1:2 with linespoints, '' using 1:3 with lines dt 2\n"
                f"pause -1\n")

    def png(path):
        _plotting().plot_rate(fit, path)

    _write_outputs(cfg, _document(cfg, results, records, note=fit.note), RATE_COLUMNS, rows, gp, png)
    return EXIT_OK


def cmd_dos(cfg: Config, out) -> int:
    p = cfg.params().require_valid()
    lambdas = parse_grid(cfg.lam, False if cfg.geometric is None else cfg.geometric)
    profile = _profile(cfg)
    members = make_random(_spec(cfg, p))
    rows, records, flagged = [], [], False
    series_vals, oracle_vals, lam_used = [], [], []
    for j, f in enumerate(members):
        for lam in lambdas:
            lam_s, shifted = resonance_shift(f, profile, lam)
            sample = dos_series(f, f, p, lam_s, profile=profile)
            oracle = dos_oracle(f, f, profile, lam_s) if cfg.oracle else None
            bad = (not sample.converged) or (oracle is not None and oracle.flagged)
            flagged |= bad
            ov = oracle.value if oracle else None
            rows.append((lam_s, j, int(shifted), sample.series_value.real, sample.series_value.imag,
                         "" if ov is None else ov.real, "" if ov is None else ov.imag,
                         "" if oracle is None else oracle.error, sample.tail_bound, int(bad)))
            records.append(ExperimentRecord("dos-sample", p, lam_s, sample.series_value, ov,
                                            grid={"mgrid": cfg.mgrid}, kmax=cfg.kmax, seed=cfg.seed,
                                            extra={"member": j, "shifted": shifted,
                                                   "tail_bound": sample.tail_bound,
                                                   "terms_used": sample.terms_used}))
            series_vals.append(sample.series_value)
            oracle_vals.append(np.nan if ov is None else ov)
            lam_used.append(lam_s)
            line = f"member {j} lambda {lam_s:.6g} dos {sample.series_value.real:.10g}"
            if ov is not None:
                line += f" oracle {ov.real:.10g}"
            print(line + (" FLAGGED" if bad else ""), file=out)

    def png(path):
        _plotting().plot_dos(lam_used, series_vals, oracle_vals, path)

    def gp(stem):
        return (f"set datafile separator ','\nset key autotitle columnhead\nset xlabel 'lambda'\n"
                f"plot '{stem.name}.csv' using 1:4 with points, '' using 1:6 with points\npause -1\n")

    _write_outputs(cfg, _document(cfg, [r.to_dict() for r in records], records, flagged),
                   DOS_COLUMNS, rows, gp, png)
    return EXIT_FLAGGED if flagged else EXIT_OK


def cmd_toy(cfg: Config, out) -> int:
    window = None
    if cfg.window:
        try:
            window = tuple(float(v) for v in cfg.window.split(","))
        except ValueError:
            raise ParameterError(f"window must be 'a,b', got {cfg.window!r}") from None
    branch = EnergyBranch.polynomial(cfg.branch, window)
    lambdas = parse_grid(cfg.lam, False if cfg.geometric is None else cfg.geometric)
    p = cfg.params()
    rows, records, flagged = [], [], False
    for lam in lambdas:
        value = dos_toy(branch, lam)
        oracle = dos_toy_oracle(branch, lam) if cfg.oracle else None
        flagged |= bool(oracle and oracle.flagged)
        print(_fmt(value.real) if oracle is None else f"{_fmt(value.real)} oracle {oracle.value.real:.10g}"
              + (f" FLAGGED ({oracle.reason})" if oracle.flagged else ""), file=out)
        ov = oracle.value if oracle else None
        rows.append((lam, value.real, "" if ov is None else ov.real))
        records.append(ExperimentRecord("toy-sample", p, lam, value, ov, extra={"branch": cfg.branch}))
    _write_outputs(cfg, _document(cfg, [r.to_dict() for r in records], records, flagged),
                   ("lambda", "dos", "oracle"), rows)
    return EXIT_FLAGGED if flagged else EXIT_OK


def cmd_norm(cfg: Config, out) -> int:
    p = cfg.params()
    if not 0.5 < p.s < 1.0 or p.gamma < 0:
        raise ParameterError("norm needs 1/2 < s < 1 and gamma >= 0")
    grid = make_mgrid(max(1, cfg.mgrid // 4), cfg.grading, 4)
    if cfg.family == "separable":
        members = [make_separable(cfg.k, cfg.beta, grid)]
    else:
        members = make_random(_spec(cfg, p), grid)
    results, records = [], []
    for j, f in enumerate(members):
        rep = full_norm(f, p)
        print(f"total {_fmt(rep.total)}" if len(members) == 1 else
              f"member {j} total {_fmt(rep.total)} (l2 {rep.l2_part:.10g}, seminorm {rep.seminorm_part:.10g})",
              file=out)
        results.append(rep.to_dict())
        records.append(ExperimentRecord("norm-report", p, j, rep.total, grid=grid.metadata(), kmax=f.kmax,
                                        seed=cfg.seed, extra=rep.to_dict()))
    _write_outputs(cfg, _document(cfg, results, records), ("member", "l2_part", "seminorm_part", "total"),
                   [(j, r["l2_part"], r["seminorm_part"], r["total"]) for j, r in enumerate(results)])
    return EXIT_OK


def _parse_tabulated(text: str) -> TabulatedProfile:
    try:
        pairs = [item.split(":") for item in text.split(",")]
        nodes = tuple(Fraction(m) for m, _ in pairs)
        values = tuple(Fraction(v) for _, v in pairs)
    except ValueError:
        raise ParameterError(f"tabulated profile must be 'm1:phi1,m2:phi2,...', got {text!r}") from None
    return TabulatedProfile(nodes, values)


def cmd_spectrum(cfg: Config, out) -> int:
    profile = _parse_tabulated(cfg.tabulated) if cfg.tabulated else _profile(cfg)
    spec = band_spectrum(profile, cfg.kmax)
    for lo, hi in spec.bands:
        print(f"band [{lo}, {hi}]", file=out)
    gap = spec.gap()
    print("gap at zero: " + (f"({gap[0]}, {gap[1]})" if gap else "none"), file=out)
    results = {"bands": [[str(lo), str(hi)] for lo, hi in spec.bands], "gap_at_zero": spec.gap_at_zero,
               "gap": None if gap is None else [str(g) for g in gap]}
    _write_outputs(cfg, _document(cfg, results), ("lo", "hi"), [(str(a), str(b)) for a, b in spec.bands])
    return EXIT_OK


def cmd_sweep(cfg: Config, out) -> int:
    try:
        alphas = [float(a) for a in cfg.alphas.split(",") if a.strip()]
    except ValueError:
        raise ParameterError(f"alphas must be a comma list, got {cfg.alphas!r}") from None
    T_grid = parse_grid(cfg.T, True if cfg.geometric is None else cfg.geometric)
    rows = alpha_sweep(alphas, cfg.s, kmax=cfg.kmax, count=cfg.count, seed=cfg.seed, mgrid=cfg.mgrid,
                       T_grid=T_grid, tol=cfg.tol, jobs=cfg.jobs)
    for r in rows:
        print(f"alpha {r.alpha:g} gamma {r.gamma:.4g} measured {r.measured_slope:.4f} "
              f"predicted {-r.predicted_rate:.4f} envelope {'PASS' if r.envelope_ok else 'FAIL'}", file=out)
    table = [dataclasses.astuple(r) for r in rows]

    def png(path):
        _plotting().plot_sweep(rows, path)

    _write_outputs(cfg, _document(cfg, [dataclasses.asdict(r) for r in rows]), SWEEP_COLUMNS, table, None, png)
    return EXIT_OK


HANDLERS = {"rate": cmd_rate, "dos": cmd_dos, "toy": cmd_toy, "norm": cmd_norm,
            "spectrum": cmd_spectrum, "sweep": cmd_sweep}


def run(argv=None, out=None, err=None) -> int:
    """Parse ``argv``, run the command and return the exit code."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = load_config(argv)
    except _UsageError as exc:
        print(exc, file=err)
        return exc.code
    except (ParameterError, OSError) as exc:
        print(f"degenflow: {exc}", file=err)
        return EXIT_PARAM
    try:
        return HANDLERS[cfg.kind](cfg, out)
    except (ParameterError, DomainError, NotInSpaceError) as exc:
        print(f"degenflow: {exc}", file=err)
        return EXIT_PARAM


def main() -> None:
    sys.exit(run())
