"""Brute-force enumeration of labeled bicolored maps.

A map is a permutation triple on edges ``0..p-1``: the black permutation is
fixed to ``gamma`` (one cycle per trace, of length ``M k_i``) and the white
permutation runs over all permutations preserving the edge-type classes.  For
``M = 2`` consecutive edges around a black vertex alternate between the types
of ``X_1`` and ``X_2``, so the classes are the even and odd positions.  Faces
are the cycles of ``gamma o sigma`` (``sigma`` applied first).  Each map
contributes ``N^(V_white - p + F)`` to the moment; connected maps with ``n``
black vertices have exponent ``2 - 2g - n``.

The white permutations are enumerated class by class in lexicographic order:
the first class in an outer Python loop, the second as a numpy batch.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DEFAULT_BUDGET = 10 ** 8


class BudgetExceeded(RuntimeError):
    pass


class GenusError(RuntimeError):
    pass


@dataclass(frozen=True)
class MapSpec:
    M: int
    profile: tuple[int, ...]

    def __post_init__(self):
        if self.M not in (1, 2):
            raise ValueError("edge-type count M must be 1 or 2")
        if not self.profile or any(k < 1 for k in self.profile):
            raise ValueError("degree profile entries must be positive")

    @property
    def edges(self) -> int:
        return self.M * sum(self.profile)

    def gamma(self) -> np.ndarray:
        g = np.empty(self.edges, dtype=np.int64)
        start = 0
        for k in self.profile:
            L = self.M * k
            g[start:start + L] = start + (np.arange(L) + 1) % L
            start += L
        return g

    def classes(self) -> list[np.ndarray]:
        p = self.edges
        if self.M == 1:
            return [np.arange(p)]
        return [np.arange(0, p, 2), np.arange(1, p, 2)]

    def search_size(self) -> int:
        return math.prod(math.factorial(len(c)) for c in self.classes())

    def cost(self) -> int:
        return self.search_size() * self.edges


@dataclass
class MapTally:
    spec: MapSpec
    #: genus -> number of connected maps
    connected: dict[int, int] = field(default_factory=dict)
    #: exponent of N -> number of maps (connected or not)
    moments: dict[int, int] = field(default_factory=dict)
    candidates: int = 0

    def cumulant_polynomial(self) -> dict[int, int]:
        n = len(self.spec.profile)
        return {2 - 2 * g - n: c for g, c in self.connected.items()}


def _min_label_cycles(P: np.ndarray) -> np.ndarray:
    """Number of cycles of each row of a batch of permutations."""
    B, p = P.shape
    L = np.broadcast_to(np.arange(p), (B, p)).copy()
    Q = P
    span = 1
    while span < p:
        L = np.minimum(L, np.take_along_axis(L, Q, axis=1))
        Q = np.take_along_axis(Q, Q, axis=1)
        span *= 2
    return (L == np.arange(p)).sum(axis=1)


def _connected(gamma: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Rows where <gamma, sigma> acts transitively on the edges."""
    B, p = S.shape
    L = np.broadcast_to(np.arange(p), (B, p)).copy()
    G = np.broadcast_to(gamma, (B, p))
    while True:
        new = np.minimum(L, np.minimum(np.take_along_axis(L, G, axis=1),
                                       np.take_along_axis(L, S, axis=1)))
        # labels only decrease; propagate also backwards by scattering
        back = np.full_like(new, p)
        rows = np.arange(B)[:, None]
        np.minimum.at(back, (rows, G), new)
        np.minimum.at(back, (rows, S), new)
        new = np.minimum(new, back)
        if np.array_equal(new, L):
            break
        L = new
    return (L == 0).all(axis=1)


def _sweep(spec: MapSpec, budget: int, connected_only: bool):
    if spec.cost() > budget:
        raise BudgetExceeded(f"search cost {spec.cost()} exceeds budget {budget}")
    p = spec.edges
    gamma = spec.gamma()
    classes = spec.classes()
    outer_cls, inner_cls = (classes[0], classes[1]) if len(classes) == 2 else (np.array([], dtype=np.int64), classes[0])
    inner = np.array(list(itertools.permutations(range(len(inner_cls)))), dtype=np.int64)
    inner = inner_cls[inner] if len(inner_cls) else inner
    B = inner.shape[0]
    exps: Counter = Counter()
    conn: Counter = Counter()
    S = np.empty((B, p), dtype=np.int64)
    S[:, inner_cls] = inner
    for po in itertools.permutations(range(len(outer_cls))):
        if len(outer_cls):
            S[:, outer_cls] = outer_cls[list(po)]
        v_white = _min_label_cycles(S)
        faces = _min_label_cycles(gamma[S])
        e = v_white - p + faces
        if not connected_only:
            exps.update(Counter(e.tolist()))
        mask = _connected(gamma, S)
        conn.update(Counter(e[mask].tolist()))
    return exps, conn, spec.search_size()


def enumerate_cumulants(M: int, profile: Sequence[int], budget: int = DEFAULT_BUDGET,
                        with_moments: bool = True) -> MapTally:
    """Per-genus counts of connected maps, i.e. c^{[g]}_{k_1..k_n}."""
    spec = MapSpec(M, tuple(profile))
    exps, conn, size = _sweep(spec, budget, connected_only=not with_moments)
    n = len(spec.profile)
    connected = {}
    for e, c in conn.items():
        twice_g = 2 - n - e
        if twice_g < 0 or twice_g % 2:
            raise GenusError(f"connected map with exponent {e} has no integer genus")
        connected[twice_g // 2] = connected.get(twice_g // 2, 0) + c
    return MapTally(spec, dict(sorted(connected.items())), dict(sorted(exps.items())), size)


def moment_polynomial(M: int, profile: Sequence[int], budget: int = DEFAULT_BUDGET) -> dict[int, int]:
    """E prod Tr(S^{k_i}) as a Laurent polynomial {exponent of N: coefficient}.

    Zero entries contribute Tr(1) = N.
    """
    zeros = sum(1 for k in profile if k == 0)
    rest = tuple(k for k in profile if k)
    if not rest:
        return {zeros: 1}
    tally = enumerate_cumulants(M, rest, budget)
    return {e + zeros: c for e, c in tally.moments.items()}


def genus_of(spec: MapSpec, sigma_white: Sequence[int]) -> list[dict]:
    """Components of the map with their vertex, edge, face counts and genus."""
    p = spec.edges
    s = [int(v) for v in sigma_white]
    if sorted(s) != list(range(p)):
        raise ValueError("sigma_white is not a permutation of the edges")
    for cls in spec.classes():
        cs = set(cls.tolist())
        if any(s[i] not in cs for i in cls.tolist()):
            raise ValueError("sigma_white does not preserve the edge-type classes")
    gamma = spec.gamma().tolist()
    face = [gamma[s[i]] for i in range(p)]
    parent = list(range(p))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for perm in (gamma, s):
        for i in range(p):
            ra, rb = find(i), find(perm[i])
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    def cycle_reps(perm):
        seen, reps = [False] * p, []
        for i in range(p):
            if not seen[i]:
                reps.append(i)
                j = i
                while not seen[j]:
                    seen[j] = True
                    j = perm[j]
        return reps

    comps: dict[int, dict] = {}
    for i in range(p):
        comps.setdefault(find(i), {"edges": 0, "black": 0, "white": 0, "faces": 0})["edges"] += 1
    for key, perm in (("black", gamma), ("white", s), ("faces", face)):
        for r in cycle_reps(perm):
            comps[find(r)][key] += 1
    out = []
    for root, c in sorted(comps.items()):
        chi = c["black"] + c["white"] - c["edges"] + c["faces"]
        if chi > 2 or chi % 2:
            raise GenusError(f"component at edge {root} has Euler characteristic {chi}")
        out.append({**c, "genus": (2 - chi) // 2})
    return out


# ---------------------------------------------------------------------------
# moment-cumulant inversion
# ---------------------------------------------------------------------------


def _set_partitions(items: list) -> Iterable[list[list]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in _set_partitions(rest):
        yield [[first]] + p
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]


def _lmul(a: dict, b: dict) -> dict:
    out: Counter = Counter()
    for ea, ca in a.items():
        for eb, cb in b.items():
            out[ea + eb] += ca * cb
    return {e: c for e, c in out.items() if c}


def cumulants_by_inversion(M: int, profile: Sequence[int], budget: int = DEFAULT_BUDGET) -> dict[int, int]:
    """Connected Laurent polynomial from moments alone, via
    m_S = sum over set partitions K of S of prod_b c_{K_b}."""
    profile = tuple(profile)
    idx = list(range(len(profile)))
    cache: dict = {}

    def cum(sub: tuple[int, ...]) -> dict:
        if sub in cache:
            return cache[sub]
        m = Counter(moment_polynomial(M, [profile[i] for i in sub], budget))
        for part in _set_partitions(list(sub)):
            if len(part) == 1:
                continue
            prod = {0: 1}
            for block in part:
                prod = _lmul(prod, cum(tuple(block)))
            for e, c in prod.items():
                m[e] -= c
        cache[sub] = {e: c for e, c in m.items() if c}
        return cache[sub]

    return dict(sorted(cum(tuple(idx)).items()))


def laurent_text(poly: dict[int, int], var: str = "N") -> str:
    if not poly:
        return "0"
    parts = []
    for e in sorted(poly, reverse=True):
        c = poly[e]
        mono = "" if e == 0 else var if e == 1 else f"{var}^{e}"
        coef = str(abs(c)) if (abs(c) != 1 or not mono) else ""
        body = f"{coef}*{mono}" if coef and mono else coef or mono
        parts.append(("-" if c < 0 else "+", body))
    s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        s += f" {sign} {body}"
    return s
