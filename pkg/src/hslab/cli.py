"""Command line interface ``hsl``: batch verification runs and one-off computations.

Exit codes: 0 when every requested check passes, 1 when any check fails,
2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys

import numpy as np

from . import checks
from .errors import HslError

log = logging.getLogger("hslab")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(HslError):
    """Malformed configuration file (message carries the line number)."""


# ---------------------------------------------------------------------------
# configuration


def _line_of(text, section, key=None):
    """1-based line of ``[section]`` (or of ``key`` inside it) in an INI text."""
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if key is None and current == section:
                return lineno
        elif current == section and key is not None:
            name = line.split("=", 1)[0].split(":", 1)[0].strip()
            if name == key:
                return lineno
    return 0


def load_config(path):
    """Parse an INI-style config.

    ``[suite]`` takes ``seed``, ``workers``, ``groups`` (``H``/``B``),
    ``checks`` and ``determinism``; ``[check.<id>]`` sections take
    ``enabled``, ``budget`` and parameter overrides.
    """
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        detail = exc.message.splitlines()[0]
        if lineno is None and getattr(exc, "errors", None):
            lineno, bad = exc.errors[0]
            detail = f"cannot parse {bad}"
        raise ConfigError(f"{path}: line {lineno}: {detail}") from None
    cfg = {"seed": 0, "workers": 1, "groups": ["H", "B"], "checks": sorted(checks.REGISTRY),
           "determinism": True, "overrides": {}, "budgets": {}}
    for section in parser.sections():
        where = f"{path}: line {_line_of(text, section)}"
        if section == "suite":
            sec = parser[section]
            for key in sec:
                kwhere = f"{path}: line {_line_of(text, section, key)}"
                try:
                    if key in ("seed", "workers"):
                        cfg[key] = sec.getint(key)
                    elif key == "determinism":
                        cfg[key] = sec.getboolean(key)
                    elif key in ("groups", "checks"):
                        cfg[key] = [v.strip() for v in sec[key].split(",") if v.strip()]
                    else:
                        raise ConfigError(f"{kwhere}: unknown suite key '{key}'")
                except ValueError as exc:
                    raise ConfigError(f"{kwhere}: {exc}") from None
        elif section.startswith("check."):
            cid = section[len("check."):]
            if cid not in checks.REGISTRY:
                raise ConfigError(f"{where}: unknown check '{cid}'")
            sec = parser[section]
            over = {}
            for key in sec:
                kwhere = f"{path}: line {_line_of(text, section, key)}"
                try:
                    if key == "enabled":
                        if not sec.getboolean(key):
                            cfg["checks"] = [c for c in cfg["checks"] if c != cid]
                    elif key == "budget":
                        cfg["budgets"][cid] = sec.getfloat(key)
                    else:
                        over[key] = sec[key]
                except ValueError as exc:
                    raise ConfigError(f"{kwhere}: {exc}") from None
            try:
                checks.coerce_params(cid, over)
            except HslError as exc:
                raise ConfigError(f"{where}: {exc}") from None
            cfg["overrides"][cid] = over
        else:
            raise ConfigError(f"{where}: unknown section '{section}'")
    unknown = [c for c in cfg["checks"] if c not in checks.REGISTRY]
    if unknown:
        raise ConfigError(f"{path}: line {_line_of(text, 'suite', 'checks')}: unknown checks {unknown}")
    bad_groups = set(cfg["groups"]) - {"H", "B"}
    if bad_groups:
        raise ConfigError(f"{path}: line {_line_of(text, 'suite', 'groups')}: unknown groups {sorted(bad_groups)}")
    return cfg


def default_config():
    return {"seed": 0, "workers": 1, "groups": ["H", "B"], "checks": sorted(checks.REGISTRY),
            "determinism": True, "overrides": {}, "budgets": {}}


def run_suite(config_path=None, seed=None, workers=None):
    """Run every enabled check of a config; returns the reports (plus determinism when enabled)."""
    cfg = load_config(config_path) if config_path else default_config()
    if seed is not None:
        cfg["seed"] = seed
    if workers is not None:
        cfg["workers"] = workers
    ids = [c for c in cfg["checks"] if checks.REGISTRY[c].group in cfg["groups"]]
    reports = _run(ids, cfg)
    if cfg["determinism"]:
        again = _run(ids, cfg)
        reports.append(checks.determinism_report(reports, again, cfg["seed"]))
    return reports


def _run(ids, cfg):
    overrides = {i: dict(cfg["overrides"].get(i, {})) for i in ids}
    reports = checks.run_checks(ids, overrides, cfg["seed"], cfg["workers"])
    out = []
    for r in reports:
        limit = cfg["budgets"].get(r.check)
        if limit is not None and r.status == "pass" and r.runtime > limit:
            r.status = "timeout"
        out.append(r)
    return out


# ---------------------------------------------------------------------------
# argument parsing


def _extra_pairs(extra):
    """``--key value`` / ``--key=value`` pairs left over by argparse."""
    out, i = {}, 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise ValueError(f"unexpected argument '{tok}'")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise ValueError(f"missing value for '{tok}'")
            val = extra[i + 1]
            i += 2
        out[key.replace("-", "_")] = val
    return out


def _floats(text):
    return tuple(float(v) for v in text.split(","))


def build_parser():
    p = argparse.ArgumentParser(prog="hsl", description="Numerical laboratory for harmonic function spaces.")
    p.add_argument("--config", help="INI config file")
    p.add_argument("--seed", type=int, default=None, help="seed of the named random streams")
    p.add_argument("--workers", type=int, default=None, help="concurrent checks")
    p.add_argument("--json-out", help="write the JSON result here as well as to stdout")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run registered checks (extra --key value pairs override parameters)")
    v.add_argument("check_ids", nargs="*", help="check ids; none or 'all' runs the suite")
    v.add_argument("--tolerance", type=float, help="override the check's primary tolerance")
    v.add_argument("--budget", type=float, help="runtime budget in seconds")
    v.add_argument("--list", action="store_true", help="list registered checks")

    nrm = sub.add_parser("norm", help="norm of a test function")
    nrm.add_argument("--fn", required=True, help="test function, e.g. poisson_shift:1.0")
    nrm.add_argument("--n", type=int, default=1)
    nrm.add_argument("--space", choices=["bergman", "mixed", "triebel", "dn"], default="bergman")
    nrm.add_argument("--p", type=float, default=2.0)
    nrm.add_argument("--q", type=float, default=2.0)
    nrm.add_argument("--lam", type=float, default=0.0)
    nrm.add_argument("--alpha", type=float, default=1.0)
    nrm.add_argument("--N", type=int, default=1)

    op = sub.add_parser("op", help="evaluate an operator at points")
    op.add_argument("name", choices=["reproduce", "extend", "s-tilde"])
    op.add_argument("--fn", required=True)
    op.add_argument("--n", type=int, default=1)
    op.add_argument("--k", type=int, default=1)
    op.add_argument("--m", type=int, default=2)
    op.add_argument("--a", type=float, default=1.0)
    op.add_argument("--b", type=float, default=0.0)
    op.add_argument("--z", action="append", required=True, help="point x1,..,xn,t (repeatable)")

    car = sub.add_parser("carleson", help="Carleson norms of a discrete measure")
    car.add_argument("--measure", help="measure file (lines: x.. t [x.. t ...] mass)")
    car.add_argument("--m", type=int, default=1)
    car.add_argument("--n", type=int, default=1)
    car.add_argument("--r", type=str, default="2.0", help="comma separated, one per factor")
    car.add_argument("--tau", type=str, default=None)
    car.add_argument("--density", type=int, default=1)
    car.add_argument("--counterexample", type=int, metavar="K_HEIGHT",
                     help="restricted and global sums of the standard counterexample")
    car.add_argument("--atoms", type=int, default=16)

    bl = sub.add_parser("ball", help="spherical-harmonic coefficient algebra")
    bl.add_argument("action", choices=["expand", "functional", "identity"])
    bl.add_argument("--fn", help="ball test function for expand, e.g. solid_harmonic:2,1")
    bl.add_argument("--n", type=int, default=3, choices=[2, 3], help="ball dimension for expand")
    bl.add_argument("--K", type=int, default=8)
    bl.add_argument("--table", help="coefficient table file ('k j value' lines)")
    bl.add_argument("--f-table", help="second table for identity (default: all ones)")
    bl.add_argument("--kind", choices=["L", "K", "N", "N1"], default="L")
    bl.add_argument("--s", type=float, default=2.0)
    bl.add_argument("--m", type=float, default=1.0)
    bl.add_argument("--N", type=int, default=1)
    bl.add_argument("--alpha", type=float, default=0.5)
    bl.add_argument("--beta", type=float, default=2.0)
    return p


# ---------------------------------------------------------------------------
# commands


def _cmd_verify(args, extra):
    if args.list:
        return {"checks": [{"id": c.id, "criterion": c.criterion, "group": c.group, "anchor": c.anchor,
                            "budget": c.budget, "defaults": checks.jsonable(c.defaults)}
                           for c in checks.REGISTRY.values()]}, EXIT_OK
    ids = args.check_ids
    if not ids or ids == ["all"]:
        if extra:
            raise ValueError("parameter overrides need explicit check ids")
        reports = run_suite(args.config, args.seed, args.workers)
    else:
        for cid in ids:
            if cid not in checks.REGISTRY:
                raise KeyError(f"unknown check '{cid}'")
        over = _extra_pairs(extra)
        if over and len(ids) > 1:
            raise ValueError("parameter overrides apply to a single check id")
        cfg = load_config(args.config) if args.config else default_config()
        seed = cfg["seed"] if args.seed is None else args.seed
        reports = []
        for cid in ids:
            params = dict(cfg["overrides"].get(cid, {}))
            params.update(over)
            spec = checks.CheckSpec(cid, params, args.tolerance, args.budget or cfg["budgets"].get(cid))
            reports.append(checks.run_spec(spec, seed))
    out = checks.summary(reports)
    return out, EXIT_OK if out["all_passed"] else EXIT_FAIL


def _cmd_norm(args):
    from . import spaces
    from .testfns import parse_testfn
    f = parse_testfn(args.fn, args.n)
    if args.space == "bergman":
        res = spaces.norm_bergman_h(f, spaces.BergmanNormParams(args.p, args.lam))
        return {"space": "bergman", "value": res.value, "error_estimate": res.error_estimate,
                "status": res.status, "flags": list(res.flags)}
    if args.space == "mixed":
        val = spaces.norm_mixed(f, spaces.MixedNormParams(args.p, args.q, args.alpha, f.n))
    elif args.space == "triebel":
        val = spaces.norm_triebel(f, args.p, args.q, args.alpha, spaces.SphereQuadSpec(f.n))
    else:
        val = spaces.norm_dn(f, args.N, args.p, args.q, args.alpha)
    return {"space": args.space, "value": val, "status": "ok"}


def _points(zs, n):
    from .halfspace import HPoint
    out = []
    for z in zs:
        v = _floats(z)
        if len(v) != n + 1:
            raise ValueError(f"point '{z}' needs {n + 1} coordinates")
        out.append(HPoint(v[:-1], v[-1]))
    return out


def _cmd_op(args):
    from . import operators
    from .testfns import parse_testfn
    f = parse_testfn(args.fn, args.n)
    zs = _points(args.z, args.n)
    if args.name == "reproduce":
        res = operators.reproduce_many(f, args.k, zs)
        exact = [float(f(z.as_array()[None])[0]) for z in zs]
        return {"values": res.value, "exact": exact, "error_estimate": res.error_estimate,
                "status": res.status, "flags": list(res.flags)}
    if args.name == "extend":
        ext = operators.Extension(f, args.k, args.m)
        Z = np.array([z.as_array() for z in zs])
        return {"trace": ext([Z] * args.m), "g": f(Z)}
    return {"values": [operators.s_tilde(args.a, args.b, f, z) for z in zs]}


def _cmd_carleson(args):
    from . import carleson
    if args.counterexample is not None:
        restricted, cum = carleson.counterexample_partial_sums(args.atoms, args.counterexample)
        return {"restricted": restricted, "global_partial_sums": cum}
    if not args.measure:
        raise ValueError("--measure or --counterexample is required")
    mu = carleson.DiscreteMeasure.load(args.measure, args.m, args.n)
    params = carleson.CarlesonParams(_floats(args.r), _floats(args.tau) if args.tau else ())
    a = carleson.carleson_norm(mu, params, density=args.density)
    b = carleson.carleson_star(mu, params, density=args.density)
    return {"norm": a.value, "norm_argmax": a.argmax, "star": b.value, "star_argmax": b.argmax,
            "atoms": a.atoms_used, "candidates": a.candidates}


def _cmd_ball(args):
    from . import ball
    if args.action == "expand":
        from .testfns import parse_testfn
        if not args.fn:
            raise ValueError("--fn is required for expand")
        f = parse_testfn(args.fn, args.n)
        table = ball.expand(f, args.K)
        return {"table": table.to_text()}
    if not args.table:
        raise ValueError("--table is required")
    with open(args.table) as fh:
        table = ball.CoeffTable.from_text(fh.read())
    if args.action == "functional":
        fn = {"L": ball.functional_L, "K": ball.functional_K, "N": ball.functional_N}.get(args.kind)
        if fn is None:
            val = ball.functional_N1(table, args.m, args.N, args.alpha, args.beta)
        else:
            val = fn(table, args.s, args.m, args.N, args.alpha, args.beta)
        return {"kind": args.kind, "value": val, "K": table.K}
    if args.f_table:
        with open(args.f_table) as fh:
            f = ball.CoeffTable.from_text(fh.read())
    else:
        f = ball.CoeffTable.ones(table.n, table.K)
    # a generic direction: many harmonics vanish at the poles
    chk = ball.verify_convolution_identity(table, f, args.N, args.m, 0.5, np.arange(1.0, table.n + 1))
    return {"lhs": chk.lhs, "rhs": chk.rhs, "literal_lhs": chk.literal_lhs}


def main(argv=None):
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if extra and args.command != "verify":
        parser.error(f"unrecognized arguments: {' '.join(extra)}")
    try:
        if args.command == "verify":
            result, code = _cmd_verify(args, extra)
        else:
            result = {"norm": _cmd_norm, "op": _cmd_op, "carleson": _cmd_carleson,
                      "ball": _cmd_ball}[args.command](args)
            code = EXIT_OK
    except ConfigError as exc:
        print(f"hsl: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyError as exc:
        print(f"hsl: usage error: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, HslError, OSError) as exc:
        print(f"hsl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = json.dumps(checks.jsonable(result), indent=2)
    print(text)
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write(text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
