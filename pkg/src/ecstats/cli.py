"""Command line front end: ecstats <subcommand> [options]."""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import gcd
from pathlib import Path

from . import __version__
from .arith import is_prime
from .errors import BadInputError, EcstatsError, MissingCacheError
from .levels import LevelSpec, parse_level

log = logging.getLogger("ecstats")

DEFAULTS = {
    "q_range": None,
    "q": None,
    "level": None,
    "B": None,
    "X": None,
    "sigma": 0.6,
    "R": "0,1,2",
    "k": 2,
    "out": None,
    "format": "csv",
    "jobs": 1,
    "seed": 0,
    "cache_dir": None,
    "materialize": False,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(BadInputError.exit_code, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    primes: list[int] = field(default_factory=list)
    levels: list[LevelSpec] = field(default_factory=list)
    B: Fraction | None = None
    X: float | None = None
    sigma: float = 0.6
    R: list[int] = field(default_factory=lambda: [0, 1, 2])
    k: int = 2
    out: str | None = None
    format: str = "csv"
    jobs: int = 1
    seed: int = 0
    cache_dir: str | None = None
    materialize: bool = False

    def digest(self) -> str:
        d = asdict(self)
        d["levels"] = [lv.token for lv in self.levels]
        d["B"] = str(self.B) if self.B is not None else None
        d.pop("out")
        blob = json.dumps(d, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def read_config_file(path: str) -> dict:
    """key = value lines; '#' starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise BadInputError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadInputError(f"{path}:{n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise BadInputError(f"{path}:{n}: unknown key {key!r}")
        out[key] = val
    return out


def _parse_range(text: str) -> list[int]:
    text = text.strip()
    for sep in ("..", ":", "-"):
        if sep in text:
            lo, hi = text.split(sep, 1)
            try:
                return list(range(int(lo), int(hi) + 1))
            except ValueError:
                break
    raise BadInputError(f"bad range {text!r}; use LO..HI")


def _parse_number(text: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise BadInputError(f"not a number: {text!r}") from exc


def _ints(text) -> list[int]:
    if isinstance(text, list):
        vals = []
        for t in text:
            vals.extend(_ints(t))
        return vals
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise BadInputError(f"expected integers, got {text!r}") from exc


def build_config(args: argparse.Namespace) -> RunConfig:
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        merged.update(read_config_file(args.config))
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None and v is not False:
            merged[key] = v
    cfg = RunConfig()
    primes = []
    if merged["q_range"]:
        primes.extend(_parse_range(str(merged["q_range"])))
    if merged["q"]:
        primes.extend(_ints(merged["q"]))
    cfg.primes = sorted(set(primes))
    if merged["level"]:
        toks = merged["level"] if isinstance(merged["level"], list) else str(merged["level"]).split(",")
        cfg.levels = [parse_level(t.strip()) for tok in toks for t in str(tok).split(",") if t.strip()]
    if merged["B"] is not None:
        try:
            cfg.B = Fraction(str(merged["B"]).strip())
        except ValueError as exc:
            raise BadInputError(f"bad height bound {merged['B']!r}") from exc
    if merged["X"] is not None:
        cfg.X = _parse_number(str(merged["X"]))
    cfg.sigma = _parse_number(str(merged["sigma"]))
    cfg.R = _ints(merged["R"])
    cfg.k = int(merged["k"])
    cfg.out = merged["out"]
    cfg.format = str(merged["format"])
    if cfg.format not in ("csv", "json"):
        raise BadInputError("--format must be csv or json")
    cfg.jobs = max(1, int(merged["jobs"]))
    cfg.seed = int(merged["seed"])
    cfg.cache_dir = merged["cache_dir"]
    cfg.materialize = str(merged["materialize"]).lower() in ("1", "true", "yes")
    return cfg


# ---------------------------------------------------------------- output


def emit(cfg: RunConfig, command: str, rows: list[dict], footer: list[str] | None = None,
         payload: dict | None = None) -> None:
    """Write rows (or a JSON payload) with the version and config hash embedded."""
    meta = {"command": command, "version": __version__, "config_hash": cfg.digest()}
    if cfg.format == "json" or payload is not None:
        doc = dict(meta)
        if payload is not None:
            doc.update(payload)
        else:
            doc["rows"] = rows
        if footer:
            doc["notes"] = footer
        text = json.dumps(doc, indent=1, sort_keys=True, default=str) + "\n"
    else:
        buf = io.StringIO()
        buf.write(f"# ecstats {__version__} {command} config={meta['config_hash']}\n")
        if rows:
            w = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        for line in footer or ():
            buf.write(f"# {line}\n")
        text = buf.getvalue()
    if cfg.out:
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _need(cond, msg):
    if not cond:
        raise BadInputError(msg)


def _good_primes(cfg: RunConfig, level: LevelSpec | None = None, extra: int = 1) -> list[int]:
    """Primes of the configured set usable for this level; skipped values are reported once."""
    out, composite, shared = [], [], []
    for q in cfg.primes:
        if not is_prime(q):
            composite.append(q)
        elif level is not None and gcd(q, level.level * extra) != 1:
            shared.append(q)
        else:
            out.append(q)
    if composite:
        log.warning("skipping non-primes: %s", ", ".join(map(str, composite)))
    if shared:
        log.warning("skipping primes dividing %d: %s", level.level * extra, ", ".join(map(str, shared)))
    if not out:
        raise BadInputError("no usable prime in the requested set"
                            + (f"; primes must be coprime to {level.level * extra}" if level else ""))
    return out


# ---------------------------------------------------------------- subcommands


def _census_one(args):
    p, cache_dir = args
    from .ff_curves import build_census, load_census, save_census

    status = "cached"
    try:
        census = load_census(cache_dir, p)
    except (MissingCacheError, EcstatsError, ValueError, KeyError):
        census = build_census(p)
        save_census(census, cache_dir)
        status = "built"
    return {"p": p, "classes": len(census.classes), "status": status,
            "sum_inv_aut": str(sum(Fraction(1, r.aut_count) for r in census)),
            "orbit_total": sum(r.orbit_size for r in census)}


def cmd_census(cfg: RunConfig) -> None:
    _need(cfg.primes, "census needs --q-range or --q")
    _need(cfg.cache_dir, "census needs --cache-dir")
    primes = _good_primes(cfg)
    tasks = [(p, cfg.cache_dir) for p in primes]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            rows = list(pool.map(_census_one, tasks))
    else:
        rows = [_census_one(t) for t in tasks]
    emit(cfg, "census", rows)


def cmd_cusps(cfg: RunConfig) -> None:
    from .cusp_census import cusp_report_row

    _need(cfg.levels, "cusps needs --level")
    rows = [cusp_report_row(lv, q) for lv in cfg.levels for q in _good_primes(cfg, lv)]
    emit(cfg, "cusps", rows)


def cmd_hgamma(cfg: RunConfig) -> None:
    from .ff_curves import get_census
    from .level_fibers import expected_total, h_gamma

    _need(cfg.levels and cfg.primes, "hgamma needs --level and --q")
    rows, footer = [], []
    for lv in cfg.levels:
        for q in _good_primes(cfg, lv, 6):
            table = h_gamma(lv, get_census(q))
            rows.extend(dict(level=lv.token, **r) for r in table.rows())
            tot = table.total()
            footer.append(f"{lv.token} q={q} sum={tot} expected={expected_total(lv, q)}")
    emit(cfg, "hgamma", rows, footer)


def cmd_moments(cfg: RunConfig) -> None:
    from .ff_curves import get_census
    from .level_fibers import h_gamma, moment_identity_sides, moments_row

    _need(cfg.levels and cfg.primes, "moments needs --level and --q-range")
    rows = []
    for lv in cfg.levels:
        for q in _good_primes(cfg, lv, 6):
            census = get_census(q)
            row = {"level": lv.token, **moments_row(h_gamma(lv, census), cfg.R)}
            row["identity_ok"] = all(a == b for a, b in
                                     (moment_identity_sides(lv, census, R) for R in cfg.R))
            rows.append(row)
    emit(cfg, "moments", rows)


def cmd_family(cfg: RunConfig) -> None:
    from .torsion_families import generate_family

    _need(len(cfg.levels) == 1 and cfg.B is not None, "family needs one --level and --B")
    fam = generate_family(cfg.levels[0], cfg.B)
    if not fam.complete:
        log.warning("completeness self-test failed; the list may miss curves")
    if cfg.out:
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.out).write_text(fam.to_jsonl())
    else:
        sys.stdout.write(fam.to_jsonl())
    sys.stderr.write(f"# ecstats {__version__} family config={cfg.digest()} level={fam.level.token} "
                     f"B={fam.bound} curves={len(fam)} parameters={fam.parameter_points} "
                     f"complete={fam.complete}\n")


def cmd_local_stats(cfg: RunConfig) -> None:
    from .torsion_families import generate_family, local_statistics, stats_to_csv, stream_statistics

    _need(len(cfg.levels) == 1 and cfg.B is not None and cfg.primes,
          "local-stats needs one --level, --B and --q")
    lv = cfg.levels[0]
    qs = _good_primes(cfg, lv, 6)
    if cfg.materialize:
        fam = generate_family(lv, cfg.B)
        stats = [local_statistics(fam, q) for q in qs]
    else:
        got = stream_statistics(lv, cfg.B, qs)
        stats = [got[q] for q in qs]
    rows = list(csv.DictReader(io.StringIO(stats_to_csv(stats))))
    footer = []
    for s in stats:
        footer.append(f"q={s.q} total={s.total} unit={s.unit} split={s.split} nonsplit={s.nonsplit} "
                      f"additive={s.additive} multiplicative_fraction={s.multiplicative_fraction:.6f}"
                      + (f" predicted={s.predicted_multiplicative}" if lv.representable else ""))
    emit(cfg, "local-stats", rows, footer)


def cmd_trace(cfg: RunConfig) -> None:
    from .ff_curves import get_census
    from .trace_formula import solve_trace

    _need(cfg.levels and cfg.primes, "trace needs --level and --q-range")
    rows, footer = [], []
    for lv in cfg.levels:
        n1, n2 = lv.torsion_group
        for q in _good_primes(cfg, lv):
            if gcd(q - 1, n1) != n2:
                footer.append(f"{lv.token} q={q} skipped: gcd(q-1, {n1}) != {n2}")
                continue
            rep = solve_trace(cfg.k, get_census(q), (n1, n2))
            rows.append(rep.row())
    emit(cfg, "trace", rows, footer)


def cmd_rank_bound(cfg: RunConfig) -> None:
    from .analytic import family_report, limiting_rank_bound

    _need(len(cfg.levels) == 1 and cfg.X is not None, "rank-bound needs one --level and --X")
    rep = family_report(cfg.levels[0], cfg.X, cfg.sigma, cfg.materialize)
    payload = json.loads(rep.to_json())
    payload["level"] = cfg.levels[0].token
    payload["limit_12_over_sigma_plus_half"] = limiting_rank_bound(cfg.sigma)
    emit(cfg, "rank-bound", [], payload=payload)


COMMANDS = {
    "census": (cmd_census, "build and cache curve censuses for a prime range"),
    "cusps": (cmd_cusps, "cusp orbits and rational cusp counts"),
    "hgamma": (cmd_hgamma, "weighted Hurwitz class numbers H_Gamma(a, q)"),
    "moments": (cmd_moments, "moments of H_Gamma and the omega-lattice identity"),
    "family": (cmd_family, "generate a torsion family up to height B (JSON lines)"),
    "local-stats": (cmd_local_stats, "reduction statistics of a family at primes q"),
    "trace": (cmd_trace, "Hecke traces recovered from finite-field expectations"),
    "rank-bound": (cmd_rank_bound, "explicit-formula sums and the average-rank bound"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ecstats", description=__doc__)
    parser.add_argument("--version", action="version", version=f"ecstats {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key = value file; flags override it")
        p.add_argument("--level", action="append", help="G1-<N>, G-<N> or G1-<M>-<N>; repeatable")
        p.add_argument("--q", action="append", help="prime(s), comma separated; repeatable")
        p.add_argument("--q-range", dest="q_range", help="LO..HI")
        p.add_argument("--B", help="height bound for families")
        p.add_argument("--X", help="height bound for the explicit formula")
        p.add_argument("--sigma", help="support of the test function (default 0.6)")
        p.add_argument("--R", help="moment orders, comma separated (default 0,1,2)")
        p.add_argument("--k", help="weight for trace (default 2)")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--jobs", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--cache-dir", dest="cache_dir")
        p.add_argument("--materialize", action="store_true", default=None,
                       help="materialize the family instead of streaming counts")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = build_config(args)
        if cfg.cache_dir:
            from .ff_curves import set_default_cache_dir

            set_default_cache_dir(cfg.cache_dir)
        COMMANDS[args.command][0](cfg)
    except EcstatsError as exc:
        sys.stderr.write(f"ecstats: {type(exc).__name__}: {exc}\n")
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
