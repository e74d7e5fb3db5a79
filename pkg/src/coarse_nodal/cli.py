"""coarse-nodal command line: barcode, sweep and mdp subcommands.

Exit codes: 0 ok, 2 malformed input, 3 resolution rejected, 4 bad config,
5 subdivision depth cap.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .approx import SobolevParams, build_mdp, mdp_count_check, mdp_size_constant, write_report_csv
from .barcode import barcode_to_records, n_delta
from .cubical import GridField, coarse_m, read_grid, sublevel_barcode
from .errors import ConfigError, DepthCapError, InputError, PackingError, QuadratureError, ResolutionError
from .spectral import (ENSEMBLE, SharpnessConfig, TrigPoly, VectorTrigField, courant_sweep, norm_field,
                       nyquist_samples, random_combination, sample, sharpness_construct, wiggly_example,
                       wiggly_values)

EXIT_OK, EXIT_INPUT, EXIT_RESOLUTION, EXIT_CONFIG, EXIT_DEPTH = 0, 2, 3, 4, 5


def _floats(text):
    if text is None:
        return None
    try:
        return [float(x) for x in str(text).replace(" ", "").split(",") if x]
    except ValueError:
        raise ConfigError(f"not a comma separated list of numbers: {text!r}")


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()[:16]


def _header(cfg: dict, ensemble: str = ENSEMBLE) -> dict:
    return {"version": __version__, "config_hash": config_hash(cfg), "ensemble": ensemble}


def _load_config(path):
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read config {path}: {e}")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"config {path} is not valid JSON: {e}")
    if not isinstance(cfg, dict):
        raise InputError("config must be a JSON object")
    return cfg


# ---------------------------------------------------------------------------
# field specs

def _trig_from_spec(spec: dict) -> TrigPoly:
    n = int(spec.get("n", 1))
    if "terms" in spec:
        f = TrigPoly.zero(n)
        for t in spec["terms"]:
            f = f + TrigPoly.mode(t["freq"], t.get("type", "sin"), float(t.get("amp", 1.0)))
        return f
    if "coeffs" in spec:
        rows = np.asarray(spec["coeffs"], np.float64).reshape(-1, n + 2)
        return TrigPoly(rows[:, :n].astype(np.int64), rows[:, n] + 1j * rows[:, n + 1], n=n)
    raise InputError("trig spec needs 'terms' or 'coeffs'")


def descriptor_from_spec(spec: dict, seed: int | None = None):
    """TrigPoly / VectorTrigField for analytic specs, GridField for grids and 'wiggly'."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InputError("field spec must be an object with a 'kind'")
    kind = spec["kind"]
    if seed is None:
        seed = spec.get("seed", 0)
    if kind == "grid":
        if "path" in spec:
            return read_grid(spec["path"])
        if "values" in spec:
            vals = np.asarray(spec["values"], np.float64)
            if vals.size == 0:
                raise InputError("empty grid")
            return GridField(vals, spacing=spec.get("spacing"), topology=spec.get("topology", "box"))
        raise InputError("grid spec needs 'path' or 'values'")
    if kind == "trig":
        return _trig_from_spec(spec)
    if kind == "vector":
        comps = tuple(descriptor_from_spec(c, seed) for c in spec["components"])
        if not all(isinstance(c, TrigPoly) for c in comps):
            raise InputError("vector components must be trig or named trig fields")
        return VectorTrigField(comps)
    if kind != "named":
        raise InputError(f"unknown field kind {kind!r}")
    name = spec.get("name")
    n = int(spec.get("n", 1))
    if name == "sin_j":
        return TrigPoly.sin(int(spec.get("j", 1)), int(spec.get("axis", 0)), n)
    if name == "random_Flambda":
        return random_combination(n, float(spec["lambda"]), seed)
    if name == "sharpness":
        cfg = SharpnessConfig(n, float(spec["lambda"]), float(spec.get("delta", 1.0)),
                              float(spec.get("A", 16.0)), float(spec.get("a1", 1.0)))
        return sharpness_construct(cfg, seed).f
    if name == "wiggly":
        a, b = float(spec.get("alpha", 4.0)), float(spec.get("beta", 1.0))
        dims = spec.get("dims", 4096)
        N = int(dims[0] if isinstance(dims, list) else dims)
        x = np.linspace(2 * math.pi / N, 2 * math.pi, N)
        return GridField(wiggly_values(a, b, x), spacing=x[1] - x[0], topology="box", origin=x[0])
    raise InputError(f"unknown named field {name!r}")


def field_from_spec(spec: dict, seed: int | None = None) -> GridField:
    """Resolve a JSON field spec to grid samples (|s| for vector fields)."""
    f = descriptor_from_spec(spec, seed)
    if isinstance(f, GridField):
        return f
    dims = spec.get("dims")
    if dims is None:
        dims = [nyquist_samples(f.lambda_cut)] * f.n
    topo = spec.get("topology", "torus")
    if isinstance(f, VectorTrigField):
        return norm_field(f, dims, topo, spec.get("bounds"))
    return sample(f, dims, topo, spec.get("bounds"))


# ---------------------------------------------------------------------------
# subcommands

def _write(out, name, text):
    if out is None:
        sys.stdout.write(text)
        return
    p = Path(out)
    if p.suffix:
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
    else:
        p.mkdir(parents=True, exist_ok=True)
        (p / name).write_text(text)


def cmd_barcode(args, cfg) -> int:
    spec = cfg.get("field", cfg)
    g = field_from_spec(spec, args.seed)
    if spec.get("abs") or args.abs:
        g = g.abs()
    if spec.get("negate") or args.negate:
        g = g.replace(samples=-g.samples, sign=None)
    b = sublevel_barcode(g.replace(sign=None))
    deltas = _floats(args.delta) or cfg.get("delta_list", [])
    resolved = {"field": spec, "abs": bool(spec.get("abs") or args.abs),
                "negate": bool(spec.get("negate") or args.negate), "delta": deltas}
    doc = {"header": _header(resolved, "deterministic"), "bars": barcode_to_records(b)}
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for k, v in doc["header"].items():
            buf.write(f"# {k}: {v}\n")
        w.writerow(["degree", "birth", "death", "multiplicity"])
        for r in doc["bars"]:
            w.writerow([r["degree"], r["birth"], r["death"], r["multiplicity"]])
        _write(args.out, "barcode.csv", buf.getvalue())
    else:
        _write(args.out, "barcode.json", json.dumps(doc, sort_keys=True, indent=1) + "\n")
    if deltas:
        table = sys.stdout if args.out is not None else sys.stderr
        table.write("delta\t" + "\t".join(f"N_d[{r}]" for r in range(b.max_degree + 1)) + "\n")
        for d in deltas:
            table.write(f"{d:g}\t" + "\t".join(str(n_delta(b, d, r)) for r in range(b.max_degree + 1)) + "\n")
    return EXIT_OK


def _sweep_config(args, cfg) -> dict:
    c = {"mode": cfg.get("mode", "single"), "n": int(cfg.get("n", 1)), "trials": int(cfg.get("trials", 10)),
         "seed": int(cfg.get("seed", 0)), "l": int(cfg.get("l", 2))}
    if args.mode:
        c["mode"] = args.mode
    if args.n is not None:
        c["n"] = args.n
    if args.trials is not None:
        c["trials"] = args.trials
    if args.seed is not None:
        c["seed"] = args.seed
    lam = _floats(args.lam) or cfg.get("lambda")
    delta = _floats(args.delta) or cfg.get("delta")
    if c["mode"] == "wiggly":
        c.update(alpha=float(cfg.get("alpha", 4.0)), beta=float(cfg.get("beta", 1.0)),
                 delta=[float(d) for d in (delta if isinstance(delta, list) else [delta])] if delta else
                 list(np.logspace(-10, -8, 5)))
        if len(set(c["delta"])) < 3:
            raise ConfigError("need at least 3 delta values")
        return c
    if lam is None:
        raise ConfigError("no lambda list given")
    c["lambda"] = [float(x) for x in (lam if isinstance(lam, list) else [lam])]
    if len(set(c["lambda"])) < 3:
        raise ConfigError("need at least 3 lambda values")
    d = delta[0] if isinstance(delta, list) else (delta if delta is not None else 0.5)
    c["delta"] = float(d)
    if c["mode"] == "sharpness":
        c.update(A=float(cfg.get("A", 16.0)), a1=float(cfg.get("a1", 1.0)), depth_fraction=float(
            cfg.get("depth_fraction", 0.99)))
    elif c["mode"] not in ("single", "product", "bezout", "critical"):
        raise ConfigError(f"unknown mode {c['mode']!r}")
    return c


def sharpness_sweep(n, lams, delta, A, a1, seed, depth_fraction=0.99):
    """Rows (lambda, trial, m_0 at the guaranteed depth, resolution, seed) and constructions."""
    rows, results = [], []
    for i, lam in enumerate(sorted(lams)):
        res = sharpness_construct(SharpnessConfig(n, lam, delta, A, a1), seed=seed + i)
        N = nyquist_samples(lam)
        g = sample(res.f, (N,) * n).abs()
        rows.append((lam, 0, coarse_m(g, depth_fraction * res.depth, 0).value, N, seed + i))
        results.append(res)
    return rows, results


def cmd_sweep(args, cfg) -> int:
    c = _sweep_config(args, cfg)
    if args.dry_run:
        sys.stdout.write(json.dumps({"header": _header(c), "config": c}, sort_keys=True, indent=1) + "\n")
        return EXIT_OK
    from .spectral import fit_exponent
    extra = {}
    if c["mode"] == "wiggly":
        rep = wiggly_example(c["alpha"], c["beta"], c["delta"])
        rows, param, ens = rep.rows, "delta", "deterministic"
        summary = {"exponent": rep.exponent, "ci": list(rep.ci), "C1": rep.C1, "C2": rep.C2}
        extra = {"oracle": rep.meta["oracle"], "slope_ok": rep.meta["slope_ok"]}
    elif c["mode"] == "sharpness":
        rows, results = sharpness_sweep(c["n"], c["lambda"], max(1.0, c["delta"]), c["A"], c["a1"], c["seed"],
                                        c["depth_fraction"])
        e, ci, C1, C2 = fit_exponent([r[0] for r in rows], [r[2] for r in rows])
        summary = {"exponent": e, "ci": list(ci), "C1": C1, "C2": C2}
        extra = {"passing": [r.passing for r in results], "N": [r.config.N for r in results],
                 "remainder_ok": [r.remainder_ok for r in results]}
        param, ens = "lambda", "deterministic construction (random packing)"
    else:
        rep = courant_sweep(c["n"], c["lambda"], c["delta"], c["trials"], c["mode"], c["seed"], c["l"])
        rows, param, ens = rep.rows, "lambda", ENSEMBLE
        summary = {"exponent": rep.exponent, "ci": list(rep.ci), "C1": rep.C1, "C2": rep.C2}
    header = _header(c, ens)
    buf = io.StringIO()
    for k, v in header.items():
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([param, "trial", "count", "resolution", "seed"])
    for r in sorted(rows, key=lambda r: (r[0], r[1])):
        w.writerow([repr(float(r[0])), r[1], r[2], r[3], r[4]])
    summary.update(extra)
    doc = json.dumps({"header": header, "config": c, "summary": summary}, sort_keys=True, indent=1) + "\n"
    if args.out is None:
        sys.stdout.write(buf.getvalue() if args.format == "csv" else doc)
    else:
        _write(args.out, "sweep.csv", buf.getvalue())
        _write(args.out, "summary.json", doc)
    return EXIT_OK


def cmd_mdp(args, cfg) -> int:
    spec = cfg.get("field", cfg)
    k = args.k if args.k is not None else int(cfg.get("k", 2))
    p = args.p if args.p is not None else float(cfg.get("p", 2.0))
    deltas = _floats(args.delta) or cfg.get("delta_list") or [cfg.get("delta", 0.1)]
    f = descriptor_from_spec(spec, args.seed)
    n = f.n
    params = SobolevParams(k, p, n)
    resolved = {"field": spec, "k": k, "p": p, "delta": deltas}
    if args.dry_run:
        sys.stdout.write(json.dumps({"header": _header(resolved, "deterministic"), "config": resolved},
                                    sort_keys=True, indent=1) + "\n")
        return EXIT_OK
    checks, trees = [], {}
    for d in deltas:
        part = build_mdp(f, float(d), params)
        chk = mdp_count_check(f, float(d), params, partition=part)
        checks.append(chk)
        trees[repr(float(d))] = {"tree": part.to_tree(), "K_size": part.size, "estimates_hold": part.estimates_hold,
                                 "holds": chk.holds, "explicit_C": mdp_size_constant(params)}
    header = _header(resolved, "deterministic")
    doc = json.dumps({"header": header, "mdp": trees}, sort_keys=True) + "\n"
    buf = io.StringIO()
    for key, v in header.items():
        buf.write(f"# {key}: {v}\n")
    write_report_csv(checks, buf)
    if args.out is None:
        sys.stdout.write(buf.getvalue())
    else:
        _write(args.out, "mdp.json", doc)
        _write(args.out, "report.csv", buf.getvalue())
    sys.stderr.write("holds: " + ("true" if all(c.holds for c in checks) else "false") + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="coarse-nodal", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config or field spec")
        p.add_argument("--seed", type=int)
        p.add_argument("--delta", help="comma separated list")
        p.add_argument("--out", help="output file or directory (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="json")
        p.add_argument("--dry-run", action="store_true")

    pb = sub.add_parser("barcode", help="sublevel barcode of a field")
    common(pb)
    pb.add_argument("--abs", action="store_true", help="use |s|")
    pb.add_argument("--negate", action="store_true", help="use -s (after --abs)")
    ps = sub.add_parser("sweep", help="scaling sweeps")
    common(ps)
    ps.add_argument("--lambda", dest="lam", help="comma separated list")
    ps.add_argument("--n", type=int, help="torus dimension")
    ps.add_argument("--trials", type=int)
    ps.add_argument("--mode", choices=("single", "product", "bezout", "critical", "wiggly", "sharpness"))
    pm = sub.add_parser("mdp", help="multiscale dyadic partition and cube-count check")
    common(pm)
    pm.add_argument("--k", type=int)
    pm.add_argument("--p", type=float)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        if args.command == "barcode":
            if args.dry_run:
                sys.stdout.write(json.dumps({"config": cfg}, sort_keys=True, indent=1) + "\n")
                return EXIT_OK
            return cmd_barcode(args, cfg)
        if args.command == "sweep":
            return cmd_sweep(args, cfg)
        return cmd_mdp(args, cfg)
    except ResolutionError as e:
        sys.stderr.write(f"resolution: {e}\n")
        return EXIT_RESOLUTION
    except (ConfigError, PackingError) as e:
        sys.stderr.write(f"config: {e}\n")
        return EXIT_CONFIG
    except DepthCapError as e:
        sys.stderr.write(f"depth cap: {e}\n")
        return EXIT_DEPTH
    except (InputError, ValueError, KeyError, TypeError, QuadratureError) as e:
        sys.stderr.write(f"input: {e}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
