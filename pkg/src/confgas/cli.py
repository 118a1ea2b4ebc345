"""Command-line front end: ``confgas <command> [flags]``.

Every command takes ``--config PATH`` (a JSON object with a ``command`` key),
``--seed``, ``--out`` and repeated ``--tol-override KEY=VAL``; flags override
config values.  Curves go to CSV with 12 significant digits, summaries to JSON.
The exit status is 1 iff a declared check fails, and the failing checks are
named on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import ginibre, orthopoly, profiles, sampler, ward
from . import potential as pot
from .errors import ConfgasError, ConfigError

THREADS_ENV = "CONFGAS_THREADS"

# per-command defaults; these are also the only accepted config keys
DEFAULTS = {
    "profile": {"c": "1,10,inf", "x": "-4:4:0.05"},
    "kernel": {"n": "256,1024,4096", "c": "1", "x": "-3:2:1", "potential": "ginibre"},
    "maxmod": {"n": "10000", "c": "1", "samples": 20000, "crosscheck": False, "potential": "ginibre"},
    "ward": {"c": "0.1,1,10", "x": "-2:2:1", "perturb": None},
    "quasipoly": {"table": "profile", "n": "500", "j": "100:500:20", "c": "1,0.05,50", "r": "0:1.4:0.01",
                  "x": "-1:1:0.5", "potential": "ginibre"},
    "growth": {"tau": "0.1:1:0.1", "potential": "ginibre", "step": 1e-3},
}
COMMON = {"command", "seed", "out", "tol", "threads"}
TOLERANCES = {
    "profile": {},
    "kernel": {"edge_error": 0.05},
    "maxmod": {"ks": 0.08, "crosscheck_se": 3.0},
    "ward": {"mass_one": 1e-8, "ward": 1e-6},
    "quasipoly": {"p1_growth": 1.5, "pointwise": 0.05},
    "growth": {"mass_residual": 1e-12},
}


# ---------------------------------------------------------------------------
# parsing helpers


def parse_grid(text) -> np.ndarray:
    """``a:b:step`` (inclusive of ``b`` up to rounding) or a comma list."""
    if isinstance(text, (list, tuple)):
        vals = np.asarray(text, dtype=float)
    elif ":" in str(text):
        parts = str(text).split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid {text!r} must be a:b:step")
        a, b, step = (float(p) for p in parts)
        if not step > 0:
            raise ConfigError("grid step must be positive")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        vals = a + step * np.arange(max(count, 0))
    else:
        vals = np.asarray([float(v) for v in str(text).split(",") if v.strip()], dtype=float)
    if vals.size == 0:
        raise ConfigError(f"empty grid {text!r}")
    return vals


def parse_list(text, kind=float) -> list:
    if isinstance(text, (list, tuple)):
        out = [kind(v) for v in text]
    else:
        out = [kind(float(v)) if kind is int else kind(v) for v in str(text).split(",") if v.strip()]
    if not out:
        raise ConfigError(f"empty list {text!r}")
    return out


def parse_c_list(text) -> list:
    return [profiles.confinement(v) for v in parse_list(text, str)]


def _kv(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise ConfigError(f"expected KEY=VAL, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), v.strip()


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def write_csv(path, header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
    return text


def write_json(path, obj) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _summary_path(out):
    return None if out is None else str(Path(out).with_suffix(".json"))


def _threads(cfg) -> int:
    return max(1, int(cfg.get("threads") or os.environ.get(THREADS_ENV, "1")))


def _model(n, c, potential):
    p = pot.from_config(potential)
    if p.name == "ginibre":
        return ginibre.build_model(n, c, verify=False)
    return orthopoly.build_ensemble(n, c, p)


def _finite(cp, command):
    if cp.mode != "finite":
        raise ConfigError(f"{command} needs finite c > 0, got {cp}")
    return cp.c


# ---------------------------------------------------------------------------
# commands; each returns a dict of named checks (True = pass)


def cmd_profile(cfg) -> dict:
    xs = parse_grid(cfg["x"])
    cs = parse_c_list(cfg["c"])

    def one(cp):
        try:
            return profiles.profile_curve(xs, cp)
        except ConfgasError as exc:
            raise ConfgasError(f"profile failed at c={cp}: {exc}") from exc

    with ThreadPoolExecutor(_threads(cfg)) as ex:
        curves = list(ex.map(one, cs))
    rows = []
    for cp, cur in zip(cs, curves):
        for x, r in zip(cur.abscissae, cur.values):
            rows.append((str(cp), x, r, 4.0 * x * x * r))
    write_csv(cfg["out"], ["c", "x", "R", "four_x2_R"], rows)
    return {}


def cmd_kernel(cfg) -> dict:
    ns = parse_list(cfg["n"], int)
    cs = [_finite(cp, "kernel") for cp in parse_c_list(cfg["c"])]
    xs = parse_grid(cfg["x"])
    tol = cfg["tol"]["edge_error"]
    rows, checks = [], {}
    for c in cs:
        errs = []
        for n in ns:
            model = _model(n, c, cfg["potential"])
            worst = 0.0
            for x in xs:
                rn = model.rescaled_density(complex(x))
                rl = profiles.density(x, c)
                worst = max(worst, abs(rn - rl))
                rows.append((n, c, x, rn, rl, abs(rn - rl)))
            errs.append(worst)
        checks[f"edge_error_decreasing[c={c:g}]"] = bool(all(b < a for a, b in zip(errs, errs[1:])))
        checks[f"edge_error[c={c:g},n={ns[-1]}]"] = bool(errs[-1] < tol)
    write_csv(cfg["out"], ["n", "c", "x", "R_n", "R_limit", "abs_diff"], rows)
    return checks


def cmd_maxmod(cfg) -> dict:
    ns = parse_list(cfg["n"], int)
    cs = [_finite(cp, "maxmod") for cp in parse_c_list(cfg["c"])]
    if len(ns) * len(cs) != 1:
        raise ConfigError("maxmod takes a single n and a single c")
    n, c = ns[0], cs[0]
    seed = int(cfg["seed"] or 0)
    model = _model(n, c, cfg["potential"])
    batch = sampler.sample_max_modulus(model, int(cfg["samples"]), seed)
    summary = batch.summary()
    checks = {"ks": bool(summary["ks_distance"] < cfg["tol"]["ks"])}
    if cfg["crosscheck"]:
        cross = sampler.crosscheck(batch, model)
        summary["crosscheck"] = cross
        for row in cross:
            checks[f"crosscheck[x={row['x']:g}]"] = bool(row["z"] <= cfg["tol"]["crosscheck_se"])
    summary["checks"] = checks
    if cfg["out"] is None:
        write_json(None, summary)
    else:
        batch.to_csv(cfg["out"])
        write_json(_summary_path(cfg["out"]), summary)
    return checks


def _perturbed_spec(c, perturb):
    spec = ward.EdgeProfileSpec(c)
    if not perturb:
        return spec
    key, val = _kv(perturb)
    if key == "scale":
        return ward.EdgeProfileSpec(c, scale=float(val))
    if key == "no_phi":
        return ward.EdgeProfileSpec(c, divide_by_phi=False)
    if key == "gap":
        # remove (-val, 0) from the support: E = (-inf, -2 val) U (-val, 0)
        g = float(val)
        return ward.EdgeProfileSpec(c, intervals=((-math.inf, -2.0 * g), (-g, 0.0)))
    raise ConfigError(f"unknown perturbation {key!r}; use scale, no_phi or gap")


def cmd_ward(cfg) -> dict:
    cs = [_finite(cp, "ward") for cp in parse_c_list(cfg["c"])]
    xs = parse_grid(cfg["x"])
    tol = cfg["tol"]
    report = {"residuals": [], "perturb": cfg["perturb"]}
    checks = {}
    for c in cs:
        spec = _perturbed_spec(c, cfg["perturb"])
        m1 = max(ward.mass_one_residual(x, spec) for x in xs)
        wd = max(ward.ward_residual(x, spec) for x in xs)
        report["residuals"].append({"c": c, "mass_one": m1, "ward": wd})
        checks[f"mass_one[c={c:g}]"] = bool(m1 < tol["mass_one"])
        checks[f"ward[c={c:g}]"] = bool(wd < tol["ward"])
    report["status"] = "pass" if all(checks.values()) else "violation detected"
    report["checks"] = checks
    write_json(cfg["out"], report)
    return checks


def cmd_quasipoly(cfg) -> dict:
    table = cfg["table"]
    ns = parse_list(cfg["n"], int)
    cs = [_finite(cp, "quasipoly") for cp in parse_c_list(cfg["c"])]
    tol = cfg["tol"]
    rows, checks = [], {}
    if table == "profile":
        js = [int(round(j)) for j in parse_grid(cfg["j"])]
        rs = parse_grid(cfg["r"])
        for n in ns:
            for c in cs:
                model = _model(n, c, cfg["potential"])
                # degrees must satisfy j < n; the grid end point n is skipped
                for j in (j for j in js if 0 <= j < n):
                    for r in rs:
                        rows.append((n, c, j, r, math.exp(model.log_terms(r, [j])[0])))
        write_csv(cfg["out"], ["n", "c", "j", "r", "w2"], rows)
    elif table == "p1":
        for c in cs:
            ks = []
            for n in ns:
                model = _model(n, c, cfg["potential"])
                j = n - math.isqrt(n)
                err = orthopoly.check_P1(j, model)
                k = err * math.sqrt(n) / math.log(n) ** 2
                ks.append(k)
                rows.append((n, c, j, err, k))
            checks[f"p1_constant_stable[c={c:g}]"] = bool(max(ks) <= tol["p1_growth"] * ks[0])
        write_csv(cfg["out"], ["n", "c", "j", "p1_error", "K"], rows)
    elif table == "pointwise":
        xs = parse_grid(cfg["x"])
        for c in cs:
            worst = []
            for n in ns:
                model = _model(n, c, cfg["potential"])
                j = n - math.isqrt(n)
                devs = [orthopoly.check_pointwise(j, model, x) for x in xs]
                worst.append(max(devs))
                rows.extend((n, c, j, x, d) for x, d in zip(xs, devs))
            checks[f"pointwise_decreasing[c={c:g}]"] = bool(all(b < a for a, b in zip(worst, worst[1:])))
            checks[f"pointwise[c={c:g},n={ns[-1]}]"] = bool(worst[-1] < tol["pointwise"])
        write_csv(cfg["out"], ["n", "c", "j", "x", "deviation"], rows)
    else:
        raise ConfigError("quasipoly table must be profile, p1 or pointwise")
    return checks


def cmd_growth(cfg) -> dict:
    p = pot.from_config(cfg["potential"])
    taus = parse_grid(cfg["tau"])
    if np.any(taus <= 0):
        raise ConfigError("tau grid must be positive")
    h = float(cfg["step"])
    rows, worst = [], 0.0
    for tau in taus:
        rho = float(pot.droplet_radius(tau, p))
        res = abs(pot.mass_residual(tau, p))
        worst = max(worst, res)
        gs = pot.growth_speed_check(p, tau, h) if tau - h > 0 else float("nan")
        rows.append((tau, rho, float(p.laplacian(rho)), res, gs))
    write_csv(cfg["out"], ["tau", "rho_tau", "laplacian", "mass_residual", "growth_speed_residual"], rows)
    return {"mass_residual": bool(worst < cfg["tol"]["mass_residual"])}


COMMANDS = {
    "profile": cmd_profile,
    "kernel": cmd_kernel,
    "maxmod": cmd_maxmod,
    "ward": cmd_ward,
    "quasipoly": cmd_quasipoly,
    "growth": cmd_growth,
}


# ---------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="confgas", description="Confined Coulomb gas edge computations.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON experiment file")
        sp.add_argument("--seed", type=int, help="unsigned 64-bit seed")
        sp.add_argument("--out", help="output path (stdout if omitted)")
        sp.add_argument("--tol-override", action="append", default=[], metavar="KEY=VAL")
        sp.add_argument("--threads", type=int, help=f"worker threads (default ${THREADS_ENV} or 1)")
        for key, default in DEFAULTS[name].items():
            flag = "--" + key.replace("_", "-")
            if isinstance(default, bool):
                sp.add_argument(flag, action="store_true", default=None)
            else:
                sp.add_argument(flag, default=None, type=type(default) if isinstance(default, (int, float)) else str)
    return parser


def resolve_config(args) -> dict:
    """Merge defaults, the config file and command-line flags, in that order."""
    command = args.command
    cfg = dict(DEFAULTS[command])
    cfg.update({"seed": None, "out": None, "threads": None})
    tol = dict(TOLERANCES[command])
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        if data.get("command", command) != command:
            raise ConfigError(f"config is for {data['command']!r}, not {command!r}")
        unknown = set(data) - set(DEFAULTS[command]) - COMMON
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        file_tol = data.pop("tol", {}) or {}
        data.pop("command", None)
        cfg.update(data)
        for k, v in file_tol.items():
            if k not in tol:
                raise ConfigError(f"unknown tolerance {k!r}")
            tol[k] = float(v)
    for key in list(DEFAULTS[command]) + ["seed", "out", "threads"]:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    for item in args.tol_override:
        k, v = _kv(item)
        if k not in tol:
            raise ConfigError(f"unknown tolerance {k!r}; known: {sorted(tol)}")
        tol[k] = float(v)
    cfg["tol"] = tol
    if cfg["seed"] is not None and not 0 <= int(cfg["seed"]) < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return cfg


def _join_negative_values(argv, parser) -> list:
    """Attach values such as ``-4:4:0.05`` to their flag so argparse does not read them as options."""
    flags = set()
    for action in parser._subparsers._group_actions[0].choices.values():
        flags.update(s for a in action._actions if a.nargs is None and a.option_strings for s in a.option_strings)
    out = []
    it = iter(argv)
    for tok in it:
        if tok in flags:
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and nxt not in flags and nxt not in ("-h", "--help"):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_negative_values(argv, parser))
    try:
        cfg = resolve_config(args)
        checks = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConfgasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    failed = [name for name, ok in checks.items() if not ok]
    for name in failed:
        print(f"FAILED check: {name}", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
