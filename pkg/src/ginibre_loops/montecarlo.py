"""Monte Carlo for S_2 = X_1 X_1^dag X_2^dag X_2 with complex Ginibre factors.

Entries have independent real and imaginary parts of variance 1/(2N), so
E|X_ij|^2 = 1/N.  Every sample draws from its own counter-based stream keyed
by (seed, N, sample index); results therefore do not depend on how samples
are split between workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numba
import numpy as np
from scipy import stats

from .curve import EDGE, bin_masses
from .maps import enumerate_cumulants, moment_polynomial

MAX_SWEEPS = 100
JACOBI_TOL = 1e-12
HERMITIAN_TOL = 1e-12
IMAG_TOL = 1e-8


class EigenError(RuntimeError):
    pass


class FitError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _generator(seed: int, N: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(N, index))
    return np.random.Generator(np.random.Philox(ss))


def _box_muller(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard complex normals (E|Z|^2 = 2) from uniforms on (0, 1]."""
    u1 = 1.0 - rng.random(shape)
    u2 = rng.random(shape)
    r = np.sqrt(-2.0 * np.log(u1))
    return r * np.cos(2 * np.pi * u2) + 1j * r * np.sin(2 * np.pi * u2)


@dataclass
class GinibreSample:
    N: int
    X1: np.ndarray
    X2: np.ndarray
    seed: int
    stream: int

    @classmethod
    def draw(cls, N: int, seed: int, stream: int) -> "GinibreSample":
        rng = _generator(seed, N, stream)
        scale = 1.0 / math.sqrt(2 * N)
        X1 = _box_muller(rng, (N, N)) * scale
        X2 = _box_muller(rng, (N, N)) * scale
        return cls(N, X1, X2, seed, stream)

    def S2(self) -> np.ndarray:
        X1, X2 = self.X1, self.X2
        return X1 @ X1.conj().T @ X2.conj().T @ X2

    def variance_zscore(self) -> float:
        """(mean |X_ij|^2 - 1/N) in standard errors, over both factors."""
        a = np.concatenate([np.abs(self.X1).ravel(), np.abs(self.X2).ravel()]) ** 2
        se = a.std(ddof=1) / math.sqrt(a.size)
        return float((a.mean() - 1.0 / self.N) / se)


def _traces_one(N: int, k_max: int, seed: int, index: int) -> np.ndarray:
    S = GinibreSample.draw(N, seed, index).S2()
    out = np.empty(k_max)
    P = S
    for k in range(k_max):
        t = np.trace(P)
        if abs(t.imag) > IMAG_TOL * abs(t.real):
            raise ArithmeticError(f"Tr(S^{k + 1}) has imaginary part {t.imag:.3e}")
        out[k] = t.real
        if k + 1 < k_max:
            P = P @ S
    return out


def _chunks(samples: int, workers: int) -> list[range]:
    step = -(-samples // workers)
    return [range(a, min(a + step, samples)) for a in range(0, samples, step)]


def _run(fn: Callable[[int], np.ndarray], samples: int, workers: int) -> list:
    if workers <= 1:
        return [fn(i) for i in range(samples)]
    with ThreadPoolExecutor(workers) as ex:
        parts = list(ex.map(lambda r: [fn(i) for i in r], _chunks(samples, workers)))
    return [v for part in parts for v in part]


def sample_traces(N: int, k_max: int, samples: int, seed: int = 0, workers: int = 1) -> np.ndarray:
    """Array of shape (samples, k_max) with Tr(S_2^k), k = 1..k_max."""
    if N < 2 or not 1 <= k_max <= 8 or samples < 100:
        raise ValueError("need N >= 2, 1 <= k_max <= 8 and samples >= 100")
    rows = _run(lambda i: _traces_one(N, k_max, seed, i), samples, workers)
    return np.vstack(rows)


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class McEstimate:
    stat: str
    mean: float
    stderr: float
    samples: int
    N: int

    def zscore(self, exact: float) -> float:
        return (self.mean - exact) / self.stderr if self.stderr > 0 else math.inf

    def to_json(self) -> dict:
        return asdict(self)


def _kstat_loo(cols: Sequence[np.ndarray]) -> tuple[float, np.ndarray]:
    """Joint k-statistic of order 1, 2 or 3 and its leave-one-out values.

    Order >= 2 k-statistics are shift invariant, so the data are centred
    first to keep the power sums well conditioned.
    """
    r = len(cols)
    n = cols[0].size
    if r == 1:
        a = cols[0]
        full = a.mean()
        return float(full), (a.sum() - a) / (n - 1)
    cols = [c - c.mean() for c in cols]
    if r == 2:
        a, b = cols
        Sa, Sb, Sab = a.sum(), b.sum(), (a * b).sum()

        def k2(m, sa, sb, sab):
            return (m * sab - sa * sb) / (m * (m - 1))

        return float(k2(n, Sa, Sb, Sab)), k2(n - 1, Sa - a, Sb - b, Sab - a * b)
    if r == 3:
        a, b, c = cols
        S = dict(a=a.sum(), b=b.sum(), c=c.sum(), ab=(a * b).sum(), ac=(a * c).sum(),
                 bc=(b * c).sum(), abc=(a * b * c).sum())

        def k3(m, s):
            num = (m * m * s["abc"] - m * (s["ab"] * s["c"] + s["ac"] * s["b"] + s["bc"] * s["a"])
                   + 2 * s["a"] * s["b"] * s["c"])
            return num / (m * (m - 1) * (m - 2))

        loo = {"a": S["a"] - a, "b": S["b"] - b, "c": S["c"] - c, "ab": S["ab"] - a * b,
               "ac": S["ac"] - a * c, "bc": S["bc"] - b * c, "abc": S["abc"] - a * b * c}
        return float(k3(n, S)), k3(n - 1, loo)
    raise ValueError("k-statistics implemented for orders 1..3")


def _jackknife(loo: np.ndarray) -> float:
    n = loo.size
    return float(math.sqrt((n - 1) / n * ((loo - loo.mean()) ** 2).sum()))


def estimate(traces: np.ndarray, orders: Sequence[int], N: int = 0, scale: float = 1.0) -> McEstimate:
    """Joint cumulant c_{k_1..k_r} (r <= 3) of the trace columns, times ``scale``."""
    traces = np.asarray(traces, dtype=float)
    if traces.shape[0] < 2:
        raise ValueError("need at least two samples")
    cols = [traces[:, k - 1] for k in orders]
    full, loo = _kstat_loo(cols)
    name = "c_" + ",".join(map(str, orders))
    return McEstimate(name, full * scale, _jackknife(loo) * abs(scale), traces.shape[0], N)


def estimate_cumulants(traces: np.ndarray, N: int = 0, max_order: int = 3) -> dict[str, McEstimate]:
    """All joint k-statistics of the trace columns up to ``max_order`` points."""
    import itertools

    k_max = np.asarray(traces).shape[1]
    out = {}
    for r in range(1, max_order + 1):
        for orders in itertools.combinations_with_replacement(range(1, k_max + 1), r):
            e = estimate(traces, orders, N)
            out[e.stat] = e
    return out


def normality_pvalue(traces: np.ndarray) -> float:
    """D'Agostino-Pearson test of the standardized Tr(S_2)."""
    t = np.asarray(traces)[:, 0]
    z = (t - t.mean()) / t.std(ddof=1)
    return float(stats.normaltest(z).pvalue)


# ---------------------------------------------------------------------------
# exact finite-N predictions from the map oracle
# ---------------------------------------------------------------------------


def exact_cumulant(orders: Sequence[int], N: int) -> Fraction:
    """Finite-N joint cumulant of traces, summed over genera from maps."""
    tally = enumerate_cumulants(2, tuple(orders), with_moments=False)
    return sum((Fraction(N) ** e * c for e, c in tally.cumulant_polynomial().items()), Fraction(0))


def exact_moment(k: int, N: int) -> Fraction:
    return sum((Fraction(N) ** e * c for e, c in moment_polynomial(2, (k,)).items()), Fraction(0))


# ---------------------------------------------------------------------------
# 1/N^2 fits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GenusFit:
    a: float
    b: float
    sa: float
    sb: float
    cov: float
    chi2: float

    def zscores(self, a_exact: float, b_exact: float | None = None) -> tuple[float, float | None]:
        za = (self.a - a_exact) / self.sa
        zb = None if b_exact is None else (self.b - b_exact) / self.sb
        return za, zb

    def joint_chi2(self, a_exact: float, b_exact: float) -> float:
        d = np.array([self.a - a_exact, self.b - b_exact])
        C = np.array([[self.sa ** 2, self.cov], [self.cov, self.sb ** 2]])
        return float(d @ np.linalg.solve(C, d))


def fit_genus_expansion(points: Sequence[McEstimate], max_cond: float = 1e8) -> GenusFit:
    """Weighted least squares of ``mean = a + b / N^2`` over three or more N."""
    if len({p.N for p in points}) < 3:
        raise FitError("need estimates at three or more distinct N")
    x = np.array([1.0 / p.N ** 2 for p in points])
    y = np.array([p.mean for p in points])
    w = np.array([1.0 / p.stderr ** 2 for p in points])
    A = np.column_stack([np.ones_like(x), x])
    F = A.T @ (A * w[:, None])
    if np.linalg.cond(F) > max_cond:
        raise FitError("ill-conditioned fit")
    C = np.linalg.inv(F)
    a, b = C @ (A.T @ (w * y))
    chi2 = float((w * (y - a - b * x) ** 2).sum())
    return GenusFit(float(a), float(b), float(math.sqrt(C[0, 0])), float(math.sqrt(C[1, 1])),
                    float(C[0, 1]), chi2)


# ---------------------------------------------------------------------------
# eigenvalues
# ---------------------------------------------------------------------------


@numba.njit(cache=True)
def _jacobi_kernel(H, target, max_sweeps):
    """In-place cyclic Jacobi on a Hermitian array; returns sweeps used or -1.

    For the block [[a, b], [conj(b), d]] the phase of b is removed first and
    a real rotation then annihilates |b|.  Only the columns are rotated
    explicitly; rows follow by Hermitian symmetry.
    """
    n = H.shape[0]
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += H[i, j].real ** 2 + H[i, j].imag ** 2
        if math.sqrt(off) <= target:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = H[p, q]
                mag = abs(b)
                if mag == 0.0:
                    continue
                ph = b / mag
                a = H[p, p].real
                d = H[q, q].real
                zeta = (d - a) / (2.0 * mag)
                if zeta == 0.0:
                    t = 1.0
                else:
                    t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                phc = ph.conjugate()
                u10 = -s * phc
                u11 = c * phc
                for k in range(n):
                    if k == p or k == q:
                        continue
                    hp = H[k, p]
                    hq = H[k, q]
                    np_ = hp * c + hq * u10
                    nq = hp * s + hq * u11
                    H[k, p] = np_
                    H[k, q] = nq
                    H[p, k] = np_.conjugate()
                    H[q, k] = nq.conjugate()
                H[p, p] = a - t * mag
                H[q, q] = d + t * mag
                H[p, q] = 0.0
                H[q, p] = 0.0
    return -1


def hermitian_eigen(H: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    """Eigenvalues of a complex Hermitian matrix by cyclic Jacobi rotations,
    sorted ascending."""
    H = np.array(H, dtype=np.complex128)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("H must be square")
    norm = np.linalg.norm(H)
    if np.linalg.norm(H - H.conj().T) > HERMITIAN_TOL * max(norm, 1.0):
        raise ValueError("H is not Hermitian")
    H = np.ascontiguousarray((H + H.conj().T) / 2)
    if H.shape[0] > 1 and norm > 0:
        if _jacobi_kernel(H, tol * norm, max_sweeps) < 0:
            raise EigenError(f"Jacobi did not converge in {max_sweeps} sweeps")
    return np.sort(np.real(np.diag(H)))


def _eigs_one(N: int, seed: int, index: int) -> np.ndarray:
    s = GinibreSample.draw(N, seed, index)
    A = s.X2 @ s.X1
    return hermitian_eigen(A.conj().T @ A)


@dataclass
class DensityReport:
    N: int
    samples: int
    edges: list[float]
    counts: list[int]
    overflow: int
    expected_mass: list[float]
    sup_rel_dev: float
    chi2: float
    dof: int
    frac_above_edge: float
    min_eigenvalue: float
    mass_floor: float

    def to_json(self) -> dict:
        return asdict(self)

    def csv_rows(self) -> list[list]:
        total = sum(self.counts) + self.overflow
        rows = [["lo", "hi", "count", "empirical_mass", "expected_mass"]]
        for i, c in enumerate(self.counts):
            rows.append([self.edges[i], self.edges[i + 1], c, c / total, self.expected_mass[i]])
        rows.append([self.edges[-1], "inf", self.overflow, self.overflow / total, 0.0])
        return rows


def eigen_density(N: int, samples: int, bins: int = 60, seed: int = 0, workers: int = 1,
                  mass_floor: float = 0.005) -> DensityReport:
    """Histogram of S_2 eigenvalues over (0, 27/4] plus an overflow bin,
    compared with the bin integrals of the limiting density."""
    if N > 400:
        raise ValueError("N <= 400 for the Jacobi eigensolver")
    eigs = np.concatenate(_run(lambda i: _eigs_one(N, seed, i), samples, workers))
    edge = float(EDGE)
    edges = np.linspace(0.0, edge, bins + 1)
    inner = eigs[eigs <= edge]
    counts, _ = np.histogram(np.clip(inner, 0.0, edge), bins=edges)
    overflow = int((eigs > edge).sum())
    total = eigs.size
    expected = bin_masses(edges)
    emp = counts / total
    big = expected >= mass_floor
    sup = float(np.max(np.abs(emp[big] - expected[big]) / expected[big]))
    exp_counts = expected * total
    chi2 = float((((counts - exp_counts) ** 2) / exp_counts)[big].sum())
    return DensityReport(
        N=N, samples=samples, edges=edges.tolist(), counts=counts.tolist(), overflow=overflow,
        expected_mass=expected.tolist(), sup_rel_dev=sup, chi2=chi2, dof=int(big.sum()),
        frac_above_edge=float((eigs > edge + 0.3).mean()), min_eigenvalue=float(eigs.min()),
        mass_floor=mass_floor,
    )


# ---------------------------------------------------------------------------
# the agreement ladder
# ---------------------------------------------------------------------------


@dataclass
class LadderRow:
    stat: str
    estimate: McEstimate
    exact: float
    leading: float
    z: float
    gate: float

    @property
    def ok(self) -> bool:
        return abs(self.z) <= self.gate

    def to_json(self) -> dict:
        return {"stat": self.stat, "mean": self.estimate.mean, "stderr": self.estimate.stderr,
                "exact_finite_N": self.exact, "leading_order": self.leading, "z": self.z,
                "gate": self.gate, "ok": self.ok}


def ladder(N: int, samples: int, seed: int = 0, workers: int = 1, gate: float = 5.0,
           traces: np.ndarray | None = None) -> list[LadderRow]:
    """Every statistic with an exact finite-N value from the map oracle."""
    traces = sample_traces(N, 3, samples, seed, workers) if traces is None else traces
    rows = []

    def add(name, est, exact, leading):
        rows.append(LadderRow(name, est, float(exact), float(leading), est.zscore(float(exact)), gate))

    add("m1/N", estimate(traces, (1,), N, 1 / N), exact_moment(1, N) / N, 1)
    add("m2/N", estimate(traces, (2,), N, 1 / N), exact_moment(2, N) / N, 3)
    add("c_1,1", estimate(traces, (1, 1), N), exact_cumulant((1, 1), N), 3)
    add("c_1,2", estimate(traces, (1, 2), N), exact_cumulant((1, 2), N), 20)
    add("N*c_1,1,1", estimate(traces, (1, 1, 1), N, N), N * exact_cumulant((1, 1, 1), N), 24)
    return rows
