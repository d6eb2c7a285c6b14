"""Command line entry point: ``ginibre-loops <subcommand> [flags]``.

Every run writes into ``<out-dir>/<subcommand>-<timestamp>/`` together with a
``manifest.json``.  The output root comes from ``--out-dir``, else the
``GINIBRE_LOOPS_OUT`` environment variable, else ``./runs``.

A config file (``--config``) holds ``key = value`` lines, keys spelled like
the long flags with underscores; explicit flags take precedence.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import datetime as dt
import hashlib
import io
import json
import logging
import os
import sys
from pathlib import Path

OUT_ENV = "GINIBRE_LOOPS_OUT"
DEFAULT_OUT = "runs"

DEFAULTS = {
    "solve": {"chi_max": 3, "method": "auto"},
    "moments": {"chi_max": 2, "max_order": 7, "conjecture_order": 7},
    "enumerate_maps": {"M": 2, "profile": "3", "budget": 10 ** 8},
    "montecarlo": {"N": [40, 80, 160], "samples": 2000, "kmax": 3, "seed": 0, "bins": 60,
                   "density_samples": 0, "density_N": 200, "workers": 1},
    "density": {"points": 200, "lo": 0.0, "hi": 7.0},
    "verify": {"mc_samples": 4000, "density_samples": 1000, "seed": 0},
}

log = logging.getLogger("ginibre_loops")


# ---------------------------------------------------------------------------
# run directory
# ---------------------------------------------------------------------------


class RunDir:
    def __init__(self, root: str | os.PathLike, command: str, config: dict):
        stamp = dt.datetime.now().strftime("%Y%m%d-%H%M%S-%f")
        self.path = Path(root) / f"{command}-{stamp}"
        self.path.mkdir(parents=True, exist_ok=False)
        self.command = command
        self.config = config
        self.files: list[str] = []

    def write(self, name: str, text: str) -> Path:
        p = self.path / name
        p.write_text(text)
        self.files.append(name)
        return p

    def write_json(self, name: str, obj) -> Path:
        return self.write(name, json.dumps(obj, indent=2, default=str) + "\n")

    def write_csv(self, name: str, rows) -> Path:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(rows)
        return self.write(name, buf.getvalue())

    def close(self, status: int) -> Path:
        from . import __version__

        manifest = {
            "command": self.command,
            "argv": sys.argv[1:],
            "config": self.config,
            "version": __version__,
            "created": dt.datetime.now().isoformat(timespec="seconds"),
            "exit_status": status,
            "files": {f: hashlib.sha256((self.path / f).read_bytes()).hexdigest() for f in self.files},
        }
        p = self.path / "manifest.json"
        p.write_text(json.dumps(manifest, indent=2, default=str) + "\n")
        return p


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------


def read_config(path: str | None) -> dict:
    if not path:
        return {}
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp.read_string("[run]\n" + Path(path).read_text())
    out = {}
    for k, v in cp["run"].items():
        try:
            out[k.replace("-", "_")] = json.loads(v)
        except json.JSONDecodeError:
            out[k.replace("-", "_")] = v.strip("\"'")
    return out


def resolve(args: argparse.Namespace, command: str) -> dict:
    """Flags over config file over built-in defaults."""
    cfg = read_config(args.config)
    merged = dict(DEFAULTS.get(command, {}))
    for k, v in cfg.items():
        if k in merged or hasattr(args, k):
            merged[k] = v
    for k, v in vars(args).items():
        if v is not None and k not in ("func", "config", "command"):
            merged[k] = v
    for k in ("chi_max", "max_order", "samples", "kmax", "bins", "points", "budget", "mc_samples"):
        if k in merged and isinstance(merged[k], int) and merged[k] <= 0:
            raise SystemExit(f"--{k.replace('_', '-')} must be positive")
    return merged


def _emit(text: str, fmt: str, want: str) -> None:
    if fmt == want:
        print(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_solve(cfg: dict, run: RunDir) -> int:
    from .loops import property_report, solve_all, to_w_form

    table = solve_all(cfg["chi_max"], method=cfg["method"])
    run.write_json("table.json", table.to_json())
    lines = []
    for (g, n) in sorted(table.keys()):
        lines.append(f"w_{g},{n}(z) = {to_w_form(table, g, n).to_text(unicode=True)}")
        if (g, n) == (0, 2):
            lines.append(f"tilde-w_0,2(z) = {to_w_form(table, 0, 2, tilde=True).to_text(unicode=True)}")
    text = "\n\n".join(lines) + "\n"
    run.write("table.txt", text)
    props = [p.to_json() for p in property_report(table)]
    run.write_json("properties.json", props)
    summary = [f"({p['g']},{p['n']}) {p['method']:8s} {p['seconds']:7.2f}s poles-ok={p['confined']} "
               f"positive-numerator={p['positive_numerator']}" for p in props]
    _emit("\n".join(summary), cfg.get("format", "text"), "text")
    _emit(json.dumps(props, indent=2), cfg.get("format", "text"), "json")
    return 0 if all(p["confined"] for p in props) else 1


def cmd_moments(cfg: dict, run: RunDir) -> int:
    from .loops import solve_all
    from .moments import MomentEngine, check_conjectures, moment_table

    table = solve_all(cfg["chi_max"])
    engine = MomentEngine(table)
    rows = [["g", "k1..kn", "value", "provenance"]]
    for g, n in sorted(k for k in table.keys() if 2 * k[0] - 2 + k[1] >= -1):
        lo = 0 if (g, n) == (0, 1) else 1
        kmax = cfg["max_order"] if n <= 2 else min(cfg["max_order"], 4)
        for rec in moment_table(engine, g, n, kmax, lo):
            rows.append([rec.g, " ".join(map(str, rec.orders)), str(rec.value), rec.provenance])
    run.write_csv("cumulants.csv", rows)
    rep = check_conjectures(engine, cfg["conjecture_order"]).to_json()
    run.write_json("conjectures.json", rep)
    fmt = cfg.get("format", "text")
    if fmt == "csv":
        csv.writer(sys.stdout, lineterminator="\n").writerows(rows)
    elif fmt == "json":
        print(json.dumps(rep, indent=2))
    else:
        print(f"{len(rows) - 1} cumulants written; {rep['status']}")
    return 0


def cmd_enumerate_maps(cfg: dict, run: RunDir) -> int:
    from .maps import enumerate_cumulants, laurent_text

    profile = tuple(int(t) for t in str(cfg["profile"]).replace(" ", "").split(",") if t)
    tally = enumerate_cumulants(cfg["M"], profile, cfg["budget"])
    run.write_csv("genus_counts.csv", [["genus", "count"]] + [[g, c] for g, c in tally.connected.items()])
    cum = laurent_text(tally.cumulant_polynomial())
    mom = laurent_text(tally.moments)
    text = f"M={cfg['M']} profile={profile}\ncumulant: {cum}\nmoment: {mom}\n"
    run.write("polynomial.txt", text)
    fmt = cfg.get("format", "text")
    if fmt == "json":
        print(json.dumps({"connected": tally.connected, "cumulant": cum, "moment": mom}, indent=2))
    else:
        print(text, end="")
    return 0


def cmd_montecarlo(cfg: dict, run: RunDir) -> int:
    from .montecarlo import eigen_density, estimate_cumulants, ladder, normality_pvalue, sample_traces

    Ns = cfg["N"] if isinstance(cfg["N"], list) else [cfg["N"]]
    out = {"estimates": {}, "ladder": {}, "normality_pvalue": {}}
    ok = True
    for N in Ns:
        tr = sample_traces(int(N), cfg["kmax"], cfg["samples"], cfg["seed"], cfg["workers"])
        out["estimates"][N] = {k: e.to_json() for k, e in estimate_cumulants(tr, int(N)).items()}
        if cfg["kmax"] >= 3:
            rows = ladder(int(N), cfg["samples"], cfg["seed"], traces=tr)
            out["ladder"][N] = [r.to_json() for r in rows]
            ok &= all(r.ok for r in rows)
        out["normality_pvalue"][N] = normality_pvalue(tr)
    if cfg["density_samples"]:
        rep = eigen_density(cfg["density_N"], cfg["density_samples"], cfg["bins"], cfg["seed"], cfg["workers"])
        run.write_csv("histogram.csv", rep.csv_rows())
        out["density"] = {k: v for k, v in rep.to_json().items() if k not in ("edges", "counts", "expected_mass")}
    run.write_json("estimates.json", out)
    if cfg.get("format", "text") == "json":
        print(json.dumps(out, indent=2))
    else:
        for N, rows in out["ladder"].items():
            for r in rows:
                print(f"N={N:<4} {r['stat']:10s} {r['mean']:12.5f} +- {r['stderr']:.5f}  "
                      f"exact {r['exact_finite_N']:.5f}  z={r['z']:+.2f}")
        if "density" in out:
            print(f"density sup relative deviation {out['density']['sup_rel_dev']:.4f}")
    return 0 if ok else 1


def cmd_density(cfg: dict, run: RunDir) -> int:
    from .curve import density_grid

    rows = [["x", "rho"]] + [[x, r] for x, r in density_grid(cfg["points"], cfg["lo"], cfg["hi"])]
    run.write_csv("density.csv", rows)
    csv.writer(sys.stdout, lineterminator="\n").writerows(rows)
    return 0


def cmd_verify(cfg: dict, run: RunDir) -> int:
    from .loops import GENUS_OFFSET
    from .verify import run_verify

    rep = run_verify(full=bool(cfg.get("full")), genus_offset=cfg.get("genus_offset", GENUS_OFFSET),
                     chi_max=cfg.get("chi_max"), mc_samples=cfg["mc_samples"],
                     density_samples=cfg["density_samples"], seed=cfg["seed"],
                     log=lambda s: print(s, flush=True))
    run.write_json("report.json", rep.to_json())
    print(f"{'OK' if rep.ok else 'FAILED'}: {sum(c.ok for c in rep.checks)}/{len(rep.checks)} checks "
          f"in {rep.seconds:.1f}s")
    return 0 if rep.ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ginibre-loops", description=__doc__.splitlines()[0])
    p.add_argument("--out-dir", help=f"output root (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="key = value file presetting flags")
        sp.add_argument("--format", choices=["json", "csv", "text"])
        sp.set_defaults(func=func)
        return sp

    sp = add("solve", cmd_solve, "solve the loop equations up to chi_max")
    sp.add_argument("--chi-max", type=int)
    sp.add_argument("--method", choices=["auto", "symbolic", "sampled"])

    sp = add("moments", cmd_moments, "cumulant tables by residues, conjecture report")
    sp.add_argument("--chi-max", type=int)
    sp.add_argument("--max-order", type=int)
    sp.add_argument("--conjecture-order", type=int)

    sp = add("enumerate-maps", cmd_enumerate_maps, "brute-force bicolored map counts")
    sp.add_argument("--M", type=int, choices=[1, 2])
    sp.add_argument("--profile", help="comma separated degrees, e.g. 2,1")
    sp.add_argument("--budget", type=int)

    sp = add("montecarlo", cmd_montecarlo, "sampled traces, cumulants, eigenvalue histogram")
    sp.add_argument("--N", type=int, action="append")
    sp.add_argument("--samples", type=int)
    sp.add_argument("--kmax", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--bins", type=int)
    sp.add_argument("--density-samples", type=int)
    sp.add_argument("--density-N", type=int)
    sp.add_argument("--workers", type=int)

    sp = add("density", cmd_density, "limiting eigenvalue density on a grid")
    sp.add_argument("--points", type=int)
    sp.add_argument("--lo", type=float)
    sp.add_argument("--hi", type=float)

    sp = add("verify", cmd_verify, "run the verification report")
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--fast", action="store_const", const=False, dest="full")
    mode.add_argument("--full", action="store_const", const=True, dest="full")
    sp.add_argument("--chi-max", type=int)
    sp.add_argument("--mc-samples", type=int)
    sp.add_argument("--density-samples", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--genus-offset", type=int, help=argparse.SUPPRESS)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    command = args.command.replace("-", "_")
    root = args.out_dir or os.environ.get(OUT_ENV) or DEFAULT_OUT
    cfg = resolve(args, command)
    cfg.pop("out_dir", None)
    cfg.pop("verbose", None)
    run = RunDir(root, args.command, cfg)
    status = 1
    try:
        status = args.func(cfg, run)
    finally:
        run.close(status)
    print(f"artifacts: {run.path}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
