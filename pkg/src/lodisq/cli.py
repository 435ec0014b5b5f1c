"""``lodisq`` command line: generate sequences, evaluate discrepancies, check bounds, count."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import export
from ._keys import derive_seed
from .counting import (EXACT_CAP, CountReport, count_exact, count_surrogate, entropy_exponent,
                       plot_rows, verify_lower_bound)
from .discrepancy1d import prefix_star_discrepancies, verify_perturbed_lattice
from .points import PointSet
from .seqgen import GuidedPolicy, PermutationPolicy, sbox_prefix, sboxplus_prefix
from .sphere import cap_discrepancy_report, sphere_prefix
from . import sweeps

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

GEN_KINDS = ("sbox", "sboxplus", "sphere-lambert", "sphere-healpix")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _p_value(text: str) -> float:
    if text.lower() in ("inf", "infinity", "oo"):
        return math.inf
    try:
        p = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad p {text!r}") from None
    if not p > 0:
        raise argparse.ArgumentTypeError("p must be positive")
    return p


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "^" in part:
            base, exp = part.split("^")
            out.append(int(base) ** int(exp))
        elif part:
            out.append(int(part))
    return out


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON file with default values; flags override it")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--threads", type=int)
    sp.add_argument("--out", help="output file (default stdout)")
    sp.add_argument("--header", action="store_true", default=None, help="write a CSV header row")


def _policy_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--perm", choices=("identity", "seeded-random"))
    sp.add_argument("--cell-choice", dest="cell_choice", choices=("mimic-sbox", "seeded-random"))
    sp.add_argument("--in-cell", dest="in_cell",
                    choices=("cell-origin", "cell-center", "seeded-random-uniform"))
    sp.add_argument("--q0", type=_float_list, help="first guided point, comma separated")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lodisq", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("gen", help="write a point sequence as CSV")
    _common(g)
    _policy_flags(g)
    g.add_argument("--kind", choices=GEN_KINDS)
    g.add_argument("--b", type=int)
    g.add_argument("--d", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--exact-json", dest="exact_json", help="also write exact coordinates (sbox only)")

    c = sub.add_parser("disc", help="discrepancy report of prefixes")
    _common(c)
    _policy_flags(c)
    c.add_argument("--input", help="CSV of points (1-d values or 3-d unit vectors)")
    c.add_argument("--space", choices=("interval", "sphere"))
    c.add_argument("--kind", choices=GEN_KINDS)
    c.add_argument("--b", type=int)
    c.add_argument("--d", type=int)
    c.add_argument("--n", type=int)
    c.add_argument("--p", type=_p_value, action="append")
    c.add_argument("--prefixes", type=_int_list)
    c.add_argument("--caps", type=int, help="random cap centers for sphere input")

    v = sub.add_parser("verify", help="check measured discrepancies against a theorem bound")
    _common(v)
    v.add_argument("--thm", type=int, choices=(2, 3, 4, 5))
    v.add_argument("--b", type=int)
    v.add_argument("--p", type=_p_value, action="append")
    v.add_argument("--nmax", "--n", dest="nmax", type=int)
    v.add_argument("--seeds", type=int)
    v.add_argument("--mmax", type=int)
    v.add_argument("--mmin", type=int)
    v.add_argument("--caps", type=int)

    n = sub.add_parser("count", help="size of the low-discrepancy prefix set")
    _common(n)
    n.add_argument("--mode", choices=("surrogate", "exact", "lower-bound"))
    n.add_argument("--b", type=int)
    n.add_argument("--d", type=int)
    n.add_argument("--n", type=_int_list)
    n.add_argument("--delta", type=float)
    n.add_argument("--C", dest="C", type=float)
    n.add_argument("--beta", type=float)
    n.add_argument("--tau", type=float)
    n.add_argument("--grid", type=_int_list)
    n.add_argument("--csv", help="exact mode: also write (m, D, digit sum) rows here")
    return parser


DEFAULTS = {
    "gen": {"kind": "sbox", "b": 2, "d": 1, "n": 16, "seed": 0, "perm": "identity",
            "cell_choice": None, "in_cell": None, "q0": None, "header": False, "exact_json": None},
    "disc": {"kind": "sbox", "b": 2, "d": 1, "n": 16, "seed": 0, "perm": "identity", "space": None,
             "cell_choice": None, "in_cell": None, "q0": None, "p": [math.inf], "prefixes": None,
             "caps": 4096, "input": None, "header": False},
    "verify": {"thm": 2, "b": 2, "p": [math.inf], "nmax": 4096, "seeds": 1, "mmax": 6, "mmin": 2,
               "caps": 4096, "seed": 0, "header": False},
    "count": {"mode": "surrogate", "b": 2, "d": 1, "n": [2**24], "delta": 0.01, "C": 1.0,
              "beta": None, "tau": None, "grid": None, "seed": 0, "header": False, "csv": None},
}

_LIST_KEYS = {"p", "n", "prefixes", "grid", "q0"}


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def resolve(args: argparse.Namespace) -> dict:
    """Defaults, then config file, then explicit flags."""
    cfg = dict(DEFAULTS[args.command])
    file_cfg = _load_config(args.config)
    unknown = set(file_cfg) - set(cfg) - {"threads", "out"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for key, value in file_cfg.items():
        if key == "p":
            value = [_p_value(str(x)) for x in (value if isinstance(value, list) else [value])]
        elif (key in _LIST_KEYS and isinstance(cfg.get(key), list)
              and not isinstance(value, list) and value is not None):
            value = [value]
        cfg[key] = value
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        cfg[key] = value
    threads = cfg.get("threads")
    if threads is None:
        env = os.environ.get("LODISQ_THREADS")
        try:
            threads = int(env) if env else 1
        except ValueError:
            raise UsageError(f"LODISQ_THREADS must be an integer, got {env!r}") from None
    if threads < 1:
        raise UsageError("--threads must be >= 1")
    cfg["threads"] = threads
    for key in ("b", "d"):
        if key in cfg and cfg[key] is not None and int(cfg[key]) < (2 if key == "b" else 1):
            raise UsageError(f"--{key} out of range")
    return cfg


def _policies(cfg: dict, d: int) -> tuple[PermutationPolicy, GuidedPolicy]:
    seed = int(cfg["seed"])
    if cfg["perm"] == "seeded-random":
        perm = PermutationPolicy.seeded(derive_seed(seed, "perm"))
    else:
        perm = PermutationPolicy.identity()
    base = GuidedPolicy.seeded(derive_seed(seed, "guided"))
    q0 = cfg.get("q0")
    if q0 is not None and len(q0) != d:
        raise UsageError(f"--q0 needs {d} coordinates")
    guided = GuidedPolicy(cfg.get("cell_choice") or base.cell_choice,
                          cfg.get("in_cell") or base.in_cell_position,
                          tuple(q0) if q0 is not None else None, base.seed)
    return perm, guided


def _generate(cfg: dict):
    """Returns ``(points array, PointSet or None, summary dict)``."""
    kind, b, N = cfg["kind"], int(cfg["b"]), int(cfg["n"])
    if N < 1:
        raise UsageError("--n must be positive")
    d = 2 if kind.startswith("sphere") else int(cfg["d"])
    perm, guided = _policies(cfg, d)
    summary = {"kind": kind, "N": N, "b": b, "d": d, "seed": int(cfg["seed"]), "perm": perm.mode}
    if kind == "sbox":
        ps = sbox_prefix(N, b, d, perm)
        return ps.values, ps, summary
    summary.update(cell_choice=guided.cell_choice, in_cell=guided.in_cell_position)
    if kind == "sboxplus":
        ps = sboxplus_prefix(N, b, d, perm, guided)
        return ps.values, ps, summary
    if kind == "sphere-lambert":
        return sphere_prefix("lambert-sboxplus", N, b, perm, guided), None, summary
    if b != 2:
        raise UsageError("sphere-healpix uses --b 2")
    return sphere_prefix("healpix-sbox", N, 2, perm), None, summary


class _Output:
    """Single writer for the main output (file or stdout)."""

    def __init__(self, path: str | None):
        self.path = path

    def write(self, text: str) -> None:
        if self.path in (None, "-"):
            sys.stdout.write(text)
            return
        with open(self.path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _note(summary: dict) -> None:
    print(" ".join(f"{k}={v}" for k, v in summary.items()), file=sys.stderr)


def cmd_gen(cfg: dict) -> int:
    pts, ps, summary = _generate(cfg)
    header = None
    if cfg["header"]:
        header = ["x", "y", "z"] if pts.shape[1] == 3 else [f"u{j + 1}" for j in range(pts.shape[1])]
    _Output(cfg.get("out")).write(export.csv_text(pts, header))
    target = cfg.get("exact_json")
    if target is None and cfg.get("out") not in (None, "-") and cfg["kind"] == "sbox":
        target = cfg["out"] + ".exact.json"
    if target:
        if cfg["kind"] != "sbox":
            raise UsageError("--exact-json is available for --kind sbox")
        payload = export.exact_json(ps)
        payload.update(summary)
        _Output(target).write(export.dumps(payload) + "\n")
    if cfg["kind"] == "sboxplus":
        K = int(cfg["b"]) ** cfg["d"]
        m = 0
        while K ** (m + 1) <= len(ps):
            m += 1
        if m and len(ps) == K**m:
            summary["perturbed_lattice"] = verify_perturbed_lattice(ps, int(cfg["b"]), m)
    _note(summary)
    return EXIT_OK


def _read_input(path: str) -> np.ndarray:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return export.read_points_csv(fh)
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc


def cmd_disc(cfg: dict) -> int:
    if cfg.get("input"):
        pts = _read_input(cfg["input"])
        space = cfg.get("space") or ("sphere" if pts.shape[1] == 3 else "interval")
        summary = {"input": cfg["input"], "N": len(pts)}
        ps = None
    else:
        pts, ps, summary = _generate(cfg)
        space = cfg.get("space") or ("sphere" if cfg["kind"].startswith("sphere") else "interval")
    report: dict = {"schema_version": export.SCHEMA_VERSION, "source": summary, "space": space}
    prefixes = cfg.get("prefixes") or [len(pts)]
    if space == "sphere":
        if pts.shape[1] != 3:
            raise ValueError("sphere input needs three coordinates per row")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("sphere input rows must be unit vectors")
        entries = []
        for N in prefixes:
            if not 1 <= N <= len(pts):
                raise ValueError(f"prefix length {N} outside 1..{len(pts)}")
            spec = sweeps.center_spec(int(cfg["caps"]), int(cfg["seed"]))
            rep = cap_discrepancy_report(pts[:N], spec)
            entries.append({"N": int(N), "N_Dinf_estimate": rep.value, "Dinf_estimate": rep.value / N,
                            "argmax_center": [float(x) for x in rep.center],
                            "argmax_radius": rep.radius, "n_centers": int(len(rep.per_center))})
        report["prefixes"] = entries
    else:
        if pts.shape[1] != 1:
            raise ValueError("interval discrepancies need one coordinate per row")
        if ps is None:
            ps = PointSet.from_floats(pts)
        report["prefixes"] = sweeps.prefix_profile(ps, cfg["p"], prefixes)
    _Output(cfg.get("out")).write(export.dumps(report) + "\n")
    return EXIT_OK


def _verify_1d(cfg: dict) -> tuple[bool, list[tuple], dict]:
    b, nmax, seeds, threads = int(cfg["b"]), int(cfg["nmax"]), int(cfg["seeds"]), cfg["threads"]
    if nmax < 1 or seeds < 1:
        raise UsageError("--nmax and --seeds must be positive")
    ps = cfg["p"]
    seed = int(cfg["seed"])
    if cfg["thm"] == 2:
        res = sweeps.verify_thm2(b, nmax, ps, sweeps.permutation_instances(seed, seeds), threads)
    else:
        res = sweeps.verify_thm3(b, nmax, ps, sweeps.guided_instances(seed, seeds), threads)
    rows = [(r.instance, r.N, r.p, r.measured, r.bound, r.slack) for r in res.rows]
    info = {"violations": len(res.violations), "checked": len(res.rows)}
    return res.ok, rows, info


def _verify_sphere(cfg: dict) -> tuple[bool, list[tuple], dict]:
    mmin, mmax, caps, seed = int(cfg["mmin"]), int(cfg["mmax"]), int(cfg["caps"]), int(cfg["seed"])
    if not 1 <= mmin <= mmax:
        raise UsageError("need 1 <= --mmin <= --mmax")
    ms = list(range(mmin, mmax + 1))
    if cfg["thm"] == 4:
        sw = sweeps.verify_thm4(int(cfg["b"]), ms, caps, seed)
    else:
        sw = sweeps.verify_thm5(ms, caps, seed)
    return sw.ok, sw.rows(), sw.to_dict()


def cmd_verify(cfg: dict) -> int:
    if cfg["thm"] in (2, 3):
        ok, rows, info = _verify_1d(cfg)
        header = ["instance", "N", "p", "measured", "bound", "slack"]
    else:
        ok, rows, info = _verify_sphere(cfg)
        header = ["N", "measured", "bound", "slack"]
    _Output(cfg.get("out")).write(export.csv_text(rows, header if cfg["header"] else None))
    info = {"thm": cfg["thm"], "ok": ok, **info}
    print(json.dumps(info, sort_keys=True), file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_count(cfg: dict) -> int:
    b, d, C = int(cfg["b"]), int(cfg["d"]), float(cfg["C"])
    mode = cfg["mode"]
    if mode == "lower-bound":
        if cfg["beta"] is None or cfg["tau"] is None:
            raise UsageError("lower-bound mode needs --beta and --tau")
        grid = cfg.get("grid") or cfg["n"]
        rep = verify_lower_bound(C, b, d, float(cfg["beta"]), float(cfg["tau"]), grid)
        _Output(cfg.get("out")).write(export.dumps(rep.to_dict()) + "\n")
        return EXIT_OK if rep.ok else EXIT_FAIL
    delta = float(cfg["delta"])
    exponent = None
    if cfg["beta"] is not None and cfg["tau"] is not None:
        exponent = entropy_exponent(b, d, float(cfg["beta"]), float(cfg["tau"]))
    params = {"C": C, "b": b, "d": d, "mode": mode}
    reports = []
    for N in cfg["n"]:
        N = int(N)
        if N < 1:
            raise UsageError("--n must be positive")
        exact = None
        if mode == "exact":
            if (b, d) != (2, 1) or C != 1.0:
                raise UsageError("exact mode evaluates N D_inf of the base-2 radical inverse (b=2, d=1, C=1)")
            if N > EXACT_CAP:
                raise UsageError(f"exact mode is capped at N <= {EXACT_CAP}")
            D = [float(x) for x in prefix_star_discrepancies(sbox_prefix(max(N - 1, 1), 2, 1))]
            exact = count_exact(D, delta, N)
            if cfg.get("csv"):
                header = ["m", "D", "digit_sum"] if cfg["header"] else None
                _Output(cfg["csv"]).write(export.csv_text(plot_rows(D[: N - 1], b, d), header))
        reports.append(CountReport(delta, N, count_surrogate(C, b, d, delta, N), exponent, exact,
                                   params).to_dict())
    if len(reports) == 1:
        payload = reports[0]
    else:
        payload = {"schema_version": export.SCHEMA_VERSION, "reports": reports}
    _Output(cfg.get("out")).write(export.dumps(payload) + "\n")
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "disc": cmd_disc, "verify": cmd_verify, "count": cmd_count}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except (UsageError, ValueError) as exc:
        print(f"lodisq: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"lodisq: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
