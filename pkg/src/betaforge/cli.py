"""Command-line front end.

    betaforge classical --ensemble hermite --n 1000 --beta 2 --chains 1 --seed 42 --out run1/
    betaforge gibbs --potential quartic:g4=0.25 --rescale --n 200 --beta 2 --passes 10 \\
        --chains 100 --snapshot-every 1 --seed 7 --target auto --out run2/
    betaforge stats ks --input run2/eigenvalues.csv --target auto
    betaforge stats tw --input run2/eigenvalues.csv --target auto
    betaforge replay --manifest run2/manifest.json --out run3/

Runs write ``eigenvalues.csv`` (``chain,pass,index,value``), ``manifest.json``
and, when a target law is known, ``ks_by_pass.csv`` (and ``tw_summary.json``
with ``--tw``).  Chain i always draws from stream (seed, i), so outputs do not
depend on the number of worker threads.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .ensembles import EnsembleSpec, Hermite, Jacobi, Laguerre, sample_coefficients
from .errors import BetaForgeError, ConfigError, ParseError
from .gibbs import GibbsChain, MalaSettings, PolynomialPotential, run_chain
from .rng import RngStream
from .spectral import tridiag_eigvals
from .stats import (
    EquilibriumMeasure,
    arcsine,
    edge_rescale,
    equilibrium_polynomial,
    ks_distance,
    marchenko_pastur,
    semicircle,
    tracy_widom2_cdf_many,
)

CSV_HEADER = ("chain", "pass", "index", "value")
PARTIAL_MARKER = "PARTIAL"
_ENSEMBLE_PARAMS = {"hermite": ("mu", "sigma"), "laguerre": ("k", "theta"), "jacobi": ("p", "q")}
_ENSEMBLE_DEFAULTS = {"mu": 0.0, "sigma": 1.0, "k": 1.0, "theta": 1.0, "p": 1.0, "q": 1.0}
_POTENTIAL_DEFAULTS = {"quartic": {"g4": 0.25}, "sextic": {"g6": 1.0 / 6.0}, "poly": {}}


def fmt(x: float) -> str:
    return "%.17g" % x


# ----------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    mode: str
    n: int
    beta: float
    chains: int
    seed: int
    out: str
    ensemble: str | None = None
    ensemble_params: dict = field(default_factory=dict)
    potential: str | None = None
    rescale: bool = False
    passes: int = 1
    snapshot_every: int = 1
    target: str | None = None
    tw: bool = False
    mala_steps: int | None = None
    step_a: float | None = None
    step_b: float = 0.5

    def validate(self) -> RunConfig:
        if self.mode not in ("classical", "gibbs"):
            raise ConfigError("mode", f"unknown mode {self.mode!r}")
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigError("n", "must be an integer >= 1")
        if not (isinstance(self.beta, (int, float)) and math.isfinite(self.beta) and self.beta > 0):
            raise ConfigError("beta", "must be a positive number")
        if self.chains < 1:
            raise ConfigError("chains", "must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        if self.mode == "classical":
            if self.ensemble not in _ENSEMBLE_PARAMS:
                raise ConfigError("ensemble", f"expected one of {sorted(_ENSEMBLE_PARAMS)}")
            try:
                self.ensemble_spec()
            except BetaForgeError as exc:
                raise ConfigError("ensemble_params", str(exc)) from None
        else:
            if self.potential is None:
                raise ConfigError("potential", "required in gibbs mode")
            self.polynomial()
            if self.passes < 1:
                raise ConfigError("passes", "must be >= 1")
            if self.snapshot_every < 1:
                raise ConfigError("snapshot_every", "must be >= 1")
            if self.mala_steps is not None and self.mala_steps < 1:
                raise ConfigError("mala_steps", "must be >= 1")
            if self.step_a is not None and not self.step_a > 0:
                raise ConfigError("step_a", "must be positive")
            if not self.step_b > 0:
                raise ConfigError("step_b", "must be positive")
        if self.tw and self.target is None:
            raise ConfigError("tw", "needs a --target")
        return self

    def ensemble_spec(self) -> EnsembleSpec:
        names = _ENSEMBLE_PARAMS[self.ensemble]
        unknown = set(self.ensemble_params) - set(names)
        if unknown:
            raise ConfigError("ensemble_params", f"unknown parameter(s) {sorted(unknown)} for {self.ensemble}")
        vals = [float(self.ensemble_params.get(k, _ENSEMBLE_DEFAULTS[k])) for k in names]
        kind = {"hermite": Hermite, "laguerre": Laguerre, "jacobi": Jacobi}[self.ensemble](*vals)
        spec = EnsembleSpec(kind, self.n, float(self.beta))
        return spec.rescaled() if self.rescale else spec

    def polynomial(self) -> PolynomialPotential:
        return parse_potential(self.potential, self.rescale)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration field")
        return cls(**data).validate()


def _parse_keyvals(text: str, fieldname: str) -> dict[str, float]:
    out = {}
    if not text:
        return out
    for item in text.split(","):
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(fieldname, f"expected key=value, got {item!r}")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise ConfigError(f"{fieldname}.{key.strip()}", f"not a number: {val!r}") from None
    return out


def parse_potential(text: str, rescale: bool = False) -> PolynomialPotential:
    """``name:key=val,...`` with name in quartic/sextic/poly and keys g1..g6."""
    name, _, rest = text.partition(":")
    name = name.strip()
    if name not in _POTENTIAL_DEFAULTS:
        raise ConfigError("potential", f"unknown potential {name!r}; expected quartic, sextic or poly")
    coeffs = dict(_POTENTIAL_DEFAULTS[name])
    for key, val in _parse_keyvals(rest, "potential").items():
        if key not in {f"g{i}" for i in range(1, 7)}:
            raise ConfigError(f"potential.{key}", "keys are g1..g6")
        coeffs[key] = val
    if name == "quartic" and coeffs.get("g6", 0.0) != 0.0:
        raise ConfigError("potential.g6", "quartic potentials have no x^6 term")
    g = tuple(coeffs.get(f"g{i}", 0.0) for i in range(1, 7))
    try:
        return PolynomialPotential(g, rescale)
    except BetaForgeError as exc:
        raise ConfigError("potential", str(exc)) from None


def parse_target(text: str) -> EquilibriumMeasure:
    """Named law ``semicircle``/``marchenko_pastur``/``arcsine`` with ``:key=val`` parameters,
    or a potential spec (its equilibrium measure)."""
    name, _, rest = text.partition(":")
    laws = {"semicircle": semicircle, "marchenko_pastur": marchenko_pastur, "arcsine": arcsine}
    if name in laws:
        try:
            return laws[name](**_parse_keyvals(rest, "target"))
        except TypeError as exc:
            raise ConfigError("target", str(exc)) from None
    return equilibrium_polynomial(parse_potential(text))


def classical_limit(config: RunConfig) -> EquilibriumMeasure:
    if not config.rescale:
        raise ConfigError("target", "'auto' needs --rescale (no fixed limit otherwise)")
    kind = config.ensemble_spec().kind
    raw = {k: float(config.ensemble_params.get(k, _ENSEMBLE_DEFAULTS[k])) for k in _ENSEMBLE_PARAMS[config.ensemble]}
    if isinstance(kind, Hermite):
        return semicircle(raw["mu"], 2.0 * raw["sigma"])
    if isinstance(kind, Laguerre):
        if raw["k"] < 1.0:
            raise ConfigError("target", "no Marchenko-Pastur limit for k < 1")
        return marchenko_pastur(raw["k"] - 1.0, raw["theta"])
    if raw["p"] == 1.0 and raw["q"] == 1.0:
        return arcsine()
    raise ConfigError("target", "'auto' limit only available for Jacobi p = q = 1")


def resolve_target(config: RunConfig) -> EquilibriumMeasure | None:
    if config.target is None:
        return None
    if config.target == "auto":
        if config.mode == "classical":
            return classical_limit(config)
        if not config.rescale:
            raise ConfigError("target", "'auto' needs --rescale (no fixed limit otherwise)")
        return equilibrium_polynomial(config.polynomial())
    return parse_target(config.target)


# ----------------------------------------------------------------------------
# running


def _classical_chain(config: RunConfig, spec: EnsembleSpec, chain: int) -> list[tuple[int, np.ndarray]]:
    J = sample_coefficients(spec, RngStream(config.seed, chain))
    return [(0, tridiag_eigvals(J.a, J.b))]


def _gibbs_chain(config: RunConfig, potential: PolynomialPotential, chain: int) -> list[tuple[int, np.ndarray]]:
    mala = MalaSettings(step_a=config.step_a, step_b=config.step_b, steps_per_update=config.mala_steps)
    state = GibbsChain.initial(config.n, potential, float(config.beta), RngStream(config.seed, chain), mala)
    snaps = run_chain(state, config.passes, config.snapshot_every)
    return [((i + 1) * config.snapshot_every, s.eigenvalues) for i, s in enumerate(snaps)]


def default_threads() -> int:
    env = os.environ.get("BETAFORGE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("BETAFORGE_THREADS", f"not an integer: {env!r}") from None
    return os.cpu_count() or 1


def simulate(config: RunConfig, threads: int | None = None) -> list[list[tuple[int, np.ndarray]]]:
    """Per-chain lists of (pass, ascending eigenvalues), ordered by chain id."""
    threads = threads or default_threads()
    if config.mode == "classical":
        spec = config.ensemble_spec()

        def work(c):
            return _classical_chain(config, spec, c)
    else:
        potential = config.polynomial()

        def work(c):
            return _gibbs_chain(config, potential, c)

    if threads == 1:
        return [work(c) for c in range(config.chains)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, range(config.chains)))


def write_eigenvalues(path: Path, results) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(CSV_HEADER) + "\n")
        for chain, snaps in enumerate(results):
            rows = []
            for t, values in snaps:
                rows.extend(f"{chain},{t},{i + 1},{fmt(v)}\n" for i, v in enumerate(values))
            fh.write("".join(rows))


def _versions() -> dict:
    import numba
    import scipy

    return {
        "betaforge": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
    }


def run(config: RunConfig, threads: int | None = None) -> int:
    config.validate()
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    marker = out / PARTIAL_MARKER
    marker.write_text("run in progress\n")
    manifest = {"config": config.to_dict(), "seed": config.seed, "versions": _versions()}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    target = resolve_target(config)
    results = simulate(config, threads)
    write_eigenvalues(out / "eigenvalues.csv", results)
    if target is not None:
        by_pass = _group(results)
        write_ks_csv(out / "ks_by_pass.csv", ks_by_pass(by_pass, target))
        if config.tw:
            summary = tw_by_pass(by_pass, target)
            (out / "tw_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    marker.unlink()
    return 0


# ----------------------------------------------------------------------------
# diagnostics on eigenvalue tables


def _group(results) -> dict[int, np.ndarray]:
    """pass -> (chains, N) array."""
    by_pass: dict[int, list] = {}
    for snaps in results:
        for t, values in snaps:
            by_pass.setdefault(t, []).append(values)
    return {t: np.array(v) for t, v in sorted(by_pass.items())}


def read_eigenvalues(path) -> dict[int, np.ndarray]:
    """Parse an eigenvalue CSV into pass -> (chains, N), with line-numbered errors."""
    path = str(path)
    table: dict[int, dict[int, dict[int, float]]] = {}
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ParseError(path, 0, str(exc)) from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise ParseError(path, 1, f"expected header {','.join(CSV_HEADER)}")
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(path, line, f"expected 4 columns, got {len(row)}")
            try:
                chain, t, idx = int(row[0]), int(row[1]), int(row[2])
                val = float(row[3])
            except ValueError as exc:
                raise ParseError(path, line, str(exc)) from None
            if not math.isfinite(val):
                raise ParseError(path, line, "non-finite value")
            table.setdefault(t, {}).setdefault(chain, {})[idx] = val
    if not table:
        raise ParseError(path, 1, "no data rows")
    out = {}
    for t, chains in sorted(table.items()):
        sizes = {len(v) for v in chains.values()}
        if len(sizes) != 1:
            raise ParseError(path, 0, f"pass {t}: chains have different numbers of eigenvalues")
        out[t] = np.array([[vals[i] for i in sorted(vals)] for _, vals in sorted(chains.items())])
    return out


def ks_by_pass(by_pass: dict[int, np.ndarray], target: EquilibriumMeasure) -> list[tuple[int, float]]:
    return [(t, ks_distance(x.ravel(), target.cdf)) for t, x in by_pass.items()]


def tw_by_pass(by_pass: dict[int, np.ndarray], target: EquilibriumMeasure) -> dict:
    passes = []
    for t, x in by_pass.items():
        s = edge_rescale(x.max(axis=1), x.shape[1], target)
        passes.append({"pass": t, "samples": int(s.size), "ks": ks_distance(s, tracy_widom2_cdf_many)})
    return {
        "right_edge": target.right_edge,
        "edge_coefficient": target.edge_coefficient,
        "passes": passes,
    }


def write_ks_csv(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("pass,ks\n")
        for t, v in rows:
            fh.write(f"{t},{fmt(v)}\n")


def _stats_target(args) -> EquilibriumMeasure:
    if args.target == "auto":
        manifest = Path(args.manifest) if args.manifest else Path(args.input).parent / "manifest.json"
        if not manifest.exists():
            raise ConfigError("target", f"'auto' needs a manifest ({manifest} not found)")
        config = RunConfig.from_dict(json.loads(manifest.read_text())["config"])
        config.target = "auto"
        return resolve_target(config)
    return parse_target(args.target)


def stats_cmd(args) -> dict:
    data = read_eigenvalues(args.input)
    target = _stats_target(args)
    if args.which == "ks":
        summary = {"passes": [{"pass": t, "ks": v} for t, v in ks_by_pass(data, target)]}
    else:
        summary = tw_by_pass(data, target)
    text = json.dumps(summary, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return summary


# ----------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, help="matrix size N")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--rescale", action="store_true", help="target (beta N / 2) V")
    p.add_argument("--target", default=None, help="'auto', a named law (semicircle, ...) or a potential")
    p.add_argument("--tw", action="store_true", help="also write tw_summary.json")
    p.add_argument("--threads", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="betaforge", description="Sample beta-ensembles on the real line.")
    parser.add_argument("--version", action="version", version=f"betaforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("classical", help="exact Hermite/Laguerre/Jacobi draws")
    pc.add_argument("--ensemble", required=True, choices=sorted(_ENSEMBLE_PARAMS))
    for name in ("mu", "sigma", "k", "theta", "p", "q"):
        pc.add_argument(f"--{name}", type=float, default=None)
    _add_common(pc)

    pg = sub.add_parser("gibbs", help="Gibbs sampling for a polynomial potential")
    pg.add_argument("--potential", required=True, help="e.g. quartic:g4=0.25,g2=-1.25")
    pg.add_argument("--passes", type=int, default=10)
    pg.add_argument("--snapshot-every", type=int, default=1)
    pg.add_argument("--mala-steps", type=int, default=None)
    pg.add_argument("--step-a", type=float, default=None)
    pg.add_argument("--step-b", type=float, default=0.5)
    _add_common(pg)

    ps = sub.add_parser("stats", help="diagnostics on an eigenvalue CSV")
    ps.add_argument("which", choices=("ks", "tw"))
    ps.add_argument("--input", required=True)
    ps.add_argument("--target", required=True)
    ps.add_argument("--manifest", default=None, help="manifest for --target auto (default: next to input)")
    ps.add_argument("--out", default=None, help="summary JSON path (default: stdout)")

    pr = sub.add_parser("replay", help="re-run a manifest")
    pr.add_argument("--manifest", required=True)
    pr.add_argument("--out", required=True)
    pr.add_argument("--threads", type=int, default=None)
    return parser


def config_from_args(args) -> RunConfig:
    common = dict(n=args.n, beta=args.beta, chains=args.chains, seed=args.seed, out=args.out,
                  rescale=args.rescale, target=args.target, tw=args.tw)
    if args.command == "classical":
        names = _ENSEMBLE_PARAMS[args.ensemble]
        for other in ("mu", "sigma", "k", "theta", "p", "q"):
            if other not in names and getattr(args, other) is not None:
                raise ConfigError(other, f"not a parameter of the {args.ensemble} ensemble")
        params = {k: getattr(args, k) for k in names if getattr(args, k) is not None}
        return RunConfig(mode="classical", ensemble=args.ensemble, ensemble_params=params, **common)
    return RunConfig(mode="gibbs", potential=args.potential, passes=args.passes,
                     snapshot_every=args.snapshot_every, mala_steps=args.mala_steps,
                     step_a=args.step_a, step_b=args.step_b, **common)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = None
    try:
        if args.command == "stats":
            stats_cmd(args)
            return 0
        if args.command == "replay":
            try:
                manifest = json.loads(Path(args.manifest).read_text())
            except (OSError, ValueError) as exc:
                raise ConfigError("manifest", str(exc)) from None
            config = RunConfig.from_dict(dict(manifest["config"], out=args.out))
        else:
            config = config_from_args(args).validate()
        threads = args.threads if args.threads is not None else default_threads()
        if threads < 1:
            raise ConfigError("threads", "must be >= 1")
        out_dir = Path(config.out)
        return run(config, threads)
    except ConfigError as exc:
        print(f"betaforge: configuration error: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"betaforge: parse error: {exc}", file=sys.stderr)
        return 3
    except (BetaForgeError, OSError) as exc:
        if out_dir is not None and out_dir.is_dir():
            (out_dir / PARTIAL_MARKER).write_text(f"{type(exc).__name__}: {exc}\n")
        print(f"betaforge: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
