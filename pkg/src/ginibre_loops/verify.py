"""Exact and statistical verification report.

Each check records a short anchor naming the published object it reproduces.
Report schema (``REPORT_SCHEMA``)::

    {"ok": bool, "mode": "fast" | "full", "genus_offset": int, "seconds": float,
     "checks": [{"name": str, "anchor": str, "ok": bool, "seconds": float,
                 "detail": object}]}
"""
from __future__ import annotations

import math
import time
import traceback
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import golden
from .curve import (EDGE, build_curve, check_curve, deck_eval, density_from_cubic, density_integral,
                    density_rho01, fuss_catalan, w01_explicit_check, x_num, y_num)
from .loops import (GENUS_OFFSET, LoopSolverError, ResolventTable, base_w02, prerequisites, property_report,
                    solve_all, solve_w02_from_loop, solve_wgn, to_w_form, zvars)
from .maps import enumerate_cumulants
from .moments import MomentEngine, check_conjectures, check_planar_recurrence, recurrence_domain
from .algebra import RationalFunc

REPORT_SCHEMA = {
    "type": "object",
    "required": ["ok", "mode", "genus_offset", "seconds", "checks"],
    "properties": {
        "ok": {"type": "boolean"},
        "mode": {"enum": ["fast", "full"]},
        "genus_offset": {"type": "integer"},
        "seconds": {"type": "number"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "anchor", "ok", "seconds", "detail"],
                "properties": {
                    "name": {"type": "string"},
                    "anchor": {"type": "string"},
                    "ok": {"type": "boolean"},
                    "seconds": {"type": "number"},
                },
            },
        },
    },
}


@dataclass
class Check:
    name: str
    anchor: str
    ok: bool
    seconds: float
    detail: object = None

    def to_json(self) -> dict:
        return {"name": self.name, "anchor": self.anchor, "ok": self.ok,
                "seconds": round(self.seconds, 3), "detail": self.detail}


@dataclass
class Report:
    mode: str
    genus_offset: int
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def to_json(self) -> dict:
        return {"ok": self.ok, "mode": self.mode, "genus_offset": self.genus_offset,
                "seconds": round(self.seconds, 3), "checks": [c.to_json() for c in self.checks]}


class Runner:
    def __init__(self, report: Report, log: Callable[[str], None] | None = None):
        self.report = report
        self.log = log or (lambda s: None)

    def run(self, name: str, anchor: str, fn: Callable[[], tuple[bool, object]]) -> bool:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not a crashed report
            ok, detail = False, {"error": f"{type(exc).__name__}: {exc}",
                                 "trace": traceback.format_exc(limit=3)}
        dt = time.perf_counter() - t0
        self.report.checks.append(Check(name, anchor, bool(ok), dt, detail))
        self.log(f"{'PASS' if ok else 'FAIL'} {name} ({dt:.1f}s)")
        return bool(ok)


# ---------------------------------------------------------------------------
# exact checks
# ---------------------------------------------------------------------------


def golden_checks(r: Runner, table_fn: Callable[[], ResolventTable]) -> None:
    names = {(0, 1): "w_0,1", (0, 2): "tilde-w_0,2", (1, 1): "w_1,1", (2, 1): "w_2,1",
             (0, 3): "w_0,3", (1, 2): "w_1,2"}
    for (g, n, tilde), form in golden.CLOSED_FORMS.items():
        def fn(g=g, n=n, tilde=tilde, form=form):
            table = table_fn()
            if (g, n) not in table:
                raise table.failures[(g, n)]
            got = to_w_form(table, g, n, tilde=tilde).remap(list(range(n)), zvars(n))
            return got.equals(form()), {"computed": got.to_text()}

        r.run(f"golden {names[(g, n)]}", f"printed closed form of {names[(g, n)]}", fn)


def universality_check(r: Runner, table_fn) -> None:
    def fn():
        table = table_fn()
        z1, z2 = RationalFunc.gens(zvars(2))
        w02 = to_w_form(table, 0, 2)
        bergman = w02.equals(1 / (z1 - z2) ** 2)
        curve = build_curve("z")
        xp = curve.xprime_of_z
        loop = solve_w02_from_loop().equals(base_w02() * xp.remap([0], zvars(2)) * xp.remap([1], zvars(2)))
        return bergman and loop, {"w02_is_bergman_kernel": bergman, "loop_route_agrees": loop}

    r.run("universality w_0,2", "w_0,2 = 1/(z1-z2)^2 and the planar two-point equation", fn)


def curve_checks(r: Runner) -> None:
    def fn():
        res = check_curve(build_curve("z"))
        return all(res.values()), res

    r.run("curve identities", "rational parametrization of x^2 y^3 - x y + 1 = 0", fn)


def fuss_catalan_check(r: Runner, engine_fn) -> None:
    def fn():
        engine = engine_fn()
        got = [int(engine.cumulant(0, (k,))) for k in range(13)]
        return got == list(golden.FUSS_CATALAN_3) and got == [fuss_catalan(k) for k in range(13)], got

    r.run("Fuss-Catalan k<=12", "limiting moments C_k[3]", fn)


def table_check(r: Runner, engine_fn) -> None:
    def fn():
        engine = engine_fn()
        bad = {}
        for (i, j), want in golden.TWO_POINT_TABLE.items():
            got = engine.cumulant(0, (i, j))
            if got != want:
                bad[f"{i},{j}"] = [str(got), want]
        return not bad, {"entries": len(golden.TWO_POINT_TABLE), "mismatches": bad}

    r.run("two-point table", "table of planar two-point cumulants, i,j <= 7", fn)


def recurrence_check(r: Runner, engine_fn) -> None:
    def fn():
        engine = engine_fn()
        dom = recurrence_domain(10)
        bad = [list(kq) for kq in dom if not check_planar_recurrence(*kq, engine)]
        return not bad, {"cases": len(dom), "failures": bad}

    r.run("planar recurrence k+q<=10", "planar bicumulant recurrence", fn)


def conjecture_check(r: Runner, engine_fn) -> None:
    def fn():
        rep = check_conjectures(engine_fn(), 7)
        return rep.all_agree, rep.to_json()

    r.run("conjecture confirmations", "conjectured closed forms for c^[0]_ij and c^[1]_n", fn)


def oracle_checks(r: Runner, engine_fn) -> None:
    def planar_one():
        e = engine_fn()
        rows = []
        for k in range(1, 7):
            tally = enumerate_cumulants(2, (k,), with_moments=False)
            rows.append([k, tally.connected.get(0, 0), int(e.cumulant(0, (k,)))])
        return all(a == b for _, a, b in rows), rows

    def genus_one():
        e = engine_fn()
        rows = []
        for k in range(1, 6):
            tally = enumerate_cumulants(2, (k,), with_moments=False)
            rows.append([k, tally.connected.get(1, 0), int(e.cumulant(1, (k,)))])
        return all(a == b for _, a, b in rows), rows

    def two_point():
        e = engine_fn()
        rows = []
        for i in range(1, 6):
            for j in range(i, 7 - i):
                tally = enumerate_cumulants(2, (i, j), with_moments=False)
                rows.append([i, j, tally.connected.get(0, 0), int(e.cumulant(0, (i, j)))])
        return all(a == b for *_, a, b in rows), rows

    def catalan():
        rows = []
        for k in range(1, 9):
            tally = enumerate_cumulants(1, (k,), with_moments=False)
            rows.append([k, tally.connected.get(0, 0), math.comb(2 * k, k) // (k + 1)])
        return all(a == b for _, a, b in rows), rows

    r.run("maps vs residues c^[0]_k, k<=6", "planar one-point cumulants", planar_one)
    r.run("maps vs residues c^[1]_k, k<=5", "genus-one one-point cumulants", genus_one)
    r.run("maps vs residues c^[0]_ij, i+j<=6", "planar two-point cumulants", two_point)
    r.run("maps M=1 Catalan k<=8", "Wishart limit", catalan)


def pole_check(r: Runner, chi_max: int, genus_offset: int) -> None:
    def fn():
        table = solve_all(chi_max, genus_offset)
        reps = property_report(table)
        rows = [p.to_json() for p in reps]
        return all(p.confined for p in reps), rows

    r.run(f"pole locations chi<={chi_max}", "poles of w_g,n only at z=0 and z=-3/2", fn)


def density_checks(r: Runner, points: int = 200, seed: int = 7) -> None:
    def normalisation():
        mass = density_integral()
        first = density_integral(power=1)
        second = density_integral(power=2)
        ok = abs(mass - 1) <= 1e-8 and abs(first - 1) <= 1e-6
        return ok, {"mass": mass, "first_moment": first, "second_moment": second}

    def stieltjes():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(20):
            u = complex(rng.uniform(-1, 0.14), rng.uniform(-0.5, 0.5))
            G = w01_explicit_check(u)
            worst = max(worst, abs(u * G ** 3 - G + 1))
        return worst <= 1e-10, {"max_residual": worst}

    def deck():
        rng = np.random.default_rng(seed + 1)
        worst = 0.0
        for _ in range(points):
            z = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
            d1, d2 = deck_eval(1, z), deck_eval(2, z)
            x = x_num(z)
            scale = max(1.0, abs(x))
            # the three preimages of x are the roots of t^3 - x t - x
            worst = max(worst, abs(x_num(d1) - x) / scale, abs(x_num(d2) - x) / scale,
                        abs(z + d1 + d2) / scale, abs(z * d1 + z * d2 + d1 * d2 + x) / scale,
                        abs(z * d1 * d2 - x) / scale)
            for d in (d1, d2):
                worst = max(worst, abs(y_num(d) / y_num(z) - d / z) / max(1.0, abs(d / z)))
        return worst <= 1e-10, {"points": points, "max_residual": worst}

    def two_routes():
        xs = np.linspace(0.01, float(EDGE) - 0.01, 200)
        worst = max(abs(density_rho01(t) - density_from_cubic(t)) for t in xs)
        return worst <= 1e-9, {"max_difference": worst}

    r.run("density normalisation", "limiting density on (0, 27/4]", normalisation)
    r.run("Stieltjes cubic", "u G^3 - G + 1 = 0", stieltjes)
    r.run("deck transformations", "x(d_b(z)) = x(z) and y(d_b(z))/y(z) = d_b(z)/z", deck)
    r.run("density two routes", "closed-form density vs cubic root", two_routes)


# ---------------------------------------------------------------------------
# statistical checks
# ---------------------------------------------------------------------------


def monte_carlo_checks(r: Runner, samples: int, Ns=(40, 80, 160), seed: int = 0,
                       density_samples: int = 0, workers: int = 1) -> None:
    from .montecarlo import (eigen_density, estimate, exact_cumulant, exact_moment, fit_genus_expansion,
                             ladder, normality_pvalue, sample_traces)

    traces = {}

    def get(N):
        if N not in traces:
            traces[N] = sample_traces(N, 3, samples, seed, workers)
        return traces[N]

    for N in Ns:
        def lad(N=N):
            rows = ladder(N, samples, seed, workers, traces=get(N))
            return all(x.ok for x in rows), [x.to_json() for x in rows]

        r.run(f"MC ladder N={N}", "finite-N moments and cumulants from maps", lad)

    def fits():
        out, ok = {}, True
        specs = {"m1/N": ((1,), lambda N: 1 / N, 1.0, 0.0),
                 "m2/N": ((2,), lambda N: 1 / N, 3.0, 1.0),
                 "c_1,1": ((1, 1), lambda N: 1.0, 3.0, None)}
        for name, (orders, scale, a_exact, b_exact) in specs.items():
            pts = [estimate(get(N), orders, N, scale(N)) for N in Ns]
            f = fit_genus_expansion(pts)
            if b_exact is None:
                za, _ = f.zscores(a_exact)
                good = abs(za) <= 5
            else:
                # joint 5-sigma region of a bivariate normal
                good = f.joint_chi2(a_exact, b_exact) <= 33.7
            ok &= good
            out[name] = {"a": f.a, "sa": f.sa, "b": f.b, "sb": f.sb, "ok": good}
        return ok, out

    def clt():
        N = max(Ns)
        p = normality_pvalue(get(N))
        return p > 0.01, {"N": N, "pvalue": p}

    r.run("1/N^2 fits", "genus expansion of trace statistics", fits)
    r.run("CLT for Tr(S_2)", "Gaussian fluctuations of traces", clt)
    if density_samples:
        def hist():
            rep = eigen_density(200, density_samples, 60, seed, workers)
            ok = rep.sup_rel_dev <= 0.05 and rep.frac_above_edge <= 0.002 and rep.min_eigenvalue >= -1e-10
            return ok, {k: v for k, v in rep.to_json().items() if k not in ("edges", "counts", "expected_mass")}

        r.run("eigenvalue histogram N=200", "limiting density bin masses", hist)


# ---------------------------------------------------------------------------


def run_verify(full: bool = False, genus_offset: int = GENUS_OFFSET, chi_max: int | None = None,
               mc_samples: int = 4000, density_samples: int = 1000, seed: int = 0,
               log: Callable[[str], None] | None = None) -> Report:
    t0 = time.perf_counter()
    report = Report("full" if full else "fast", genus_offset)
    r = Runner(report, log)
    cache: dict = {}

    def table_fn():
        # entry by entry, so a broken convention shows up on the entries it breaks
        if "t" not in cache:
            table = ResolventTable(genus_offset)
            table.failures = {}
            for g, n in prerequisites([(2, 1), (1, 2), (0, 3)]):
                try:
                    solve_wgn(table, g, n)
                except LoopSolverError as exc:
                    table.failures[(g, n)] = exc
            cache["t"] = table
        return cache["t"]

    def engine_fn():
        if "e" not in cache:
            cache["e"] = MomentEngine(table_fn())
        return cache["e"]

    curve_checks(r)
    golden_checks(r, table_fn)
    universality_check(r, table_fn)
    fuss_catalan_check(r, engine_fn)
    table_check(r, engine_fn)
    recurrence_check(r, engine_fn)
    conjecture_check(r, engine_fn)
    oracle_checks(r, engine_fn)
    pole_check(r, chi_max or (4 if full else 3), genus_offset)
    density_checks(r)
    if full:
        monte_carlo_checks(r, mc_samples, seed=seed, density_samples=density_samples)
    report.seconds = time.perf_counter() - t0
    return report
