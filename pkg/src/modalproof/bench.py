"""Empirical scaling measurements: log-log degree fits over doubling ladders,
and a comparison of the compiled and pure-Python propagation kernels."""

from __future__ import annotations

import math
import random
import statistics
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import build as B
from . import hornsolve
from .calculus import Proof, builtin, postorder
from .corpus import kdia_tower, nested_and, pi_ladder
from .extract import extract_disjunction
from .core import Atom, Imp, big_and
from .preserve import preserve


@dataclass
class BenchReport:
    """(input size, wall time) points, the fitted log-log slope and the verdict."""

    ladder: list
    fitted_degree: float
    passed: bool
    bound: float
    name: str = ""
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "ladder": [list(p) for p in self.ladder],
            "fittedDegree": round(self.fitted_degree, 4),
            "bound": self.bound,
            "pass": self.passed,
            **self.extra,
        }


def fit_degree(points: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of log(y) against log(x)."""
    xs = [math.log(x) for x, _ in points]
    ys = [math.log(max(y, 1e-9)) for _, y in points]
    slope, _ = statistics.linear_regression(xs, ys)
    return slope


def max_doubling_ratio(points: Sequence[tuple[float, float]]) -> float:
    """The largest y(2n)/y(n) over consecutive ladder points."""
    r = 0.0
    for (_, a), (_, b) in zip(points, points[1:]):
        r = max(r, b / max(a, 1e-9))
    return r


def _timed(fn: Callable[[], object], reps: int) -> float:
    best = math.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def doubling_ladder(lo: int, hi: int) -> list[int]:
    out = []
    n = lo
    while n <= hi:
        out.append(n)
        n *= 2
    return out


# ---------------------------------------------------------------------------
# Ladders


def bench_extract(sizes: Sequence[int] = (16, 32, 64, 128, 256, 512, 1024), reps: int = 1,
                  degree_bound: float = 5.0, ratio_bound: float = 40.0) -> BenchReport:
    """End-to-end extraction on the nested conjunction/disjunction family in CK."""
    g = builtin("CK")
    points = []
    for n in sizes:
        pi = pi_ladder(n)
        size = len(postorder(pi))
        points.append((size, _timed(lambda: extract_disjunction(g, pi, check=False), reps)))
    deg = fit_degree(points)
    ratio = max_doubling_ratio(points)
    ok = deg <= degree_bound and ratio <= ratio_bound
    return BenchReport(points, deg, ok, degree_bound, "extract", {"maxRatio": round(ratio, 3), "ratioBound": ratio_bound})


def horn_instance(rng: random.Random, size: int) -> tuple[list, list]:
    """A valid implicational Horn sequent with about `size` symbols whose target
    is reached only at the end of a planted derivation, with noise clauses."""
    m = max(3, size // 8)
    ats = [Atom(f"a{i}") for i in range(m)]
    gamma = [ats[0]]
    for i in range(1, m):
        body = {ats[i - 1]} | {ats[rng.randrange(i)] for _ in range(rng.randint(0, 1))}
        gamma.append(Imp(big_and(sorted(body, key=lambda a: a.name)), ats[i]))
    for _ in range(m // 2):
        body = [ats[rng.randrange(m)] for _ in range(rng.randint(1, 2))]
        gamma.append(Imp(big_and(body), ats[rng.randrange(m)]))
    rng.shuffle(gamma)
    return gamma, [ats[-1]]


def instance_size(gamma, targets) -> int:
    return sum(f.size for f in gamma) + sum(t.size for t in targets)


def bench_horn(sizes: Sequence[int] = (64, 128, 256, 512, 1024, 2048, 4096), reps: int = 3, seed: int = 0,
               degree_bound: float = 3.3, kernel=None) -> BenchReport:
    """unit_propagate with proof construction on random Horn sequents."""
    rng = random.Random(seed)
    points = []
    for n in sizes:
        gamma, targets = horn_instance(rng, n)
        s = instance_size(gamma, targets)
        points.append((s, _timed(lambda: hornsolve.unit_propagate(gamma, targets, kernel=kernel), reps)))
    deg = fit_degree(points)
    return BenchReport(points, deg, deg <= degree_bound, degree_bound, "horn", {"kernel": hornsolve.KERNEL if kernel is None else "python"})


def bench_preserve(sizes: Sequence[int] = (8, 16, 32, 64, 128), degree_bound: float = 4.0) -> BenchReport:
    """Output size of preserve against input size on nested conjunction and Kdia towers."""
    g = builtin("CK")
    points = []
    times = []
    for n in sizes:
        pi = mixed_ladder(n)
        t0 = time.perf_counter()
        res = preserve(g, pi, check=False)
        times.append(time.perf_counter() - t0)
        out = len(postorder(res.translated_proof)) + len(postorder(res.discharge_proof))
        points.append((len(postorder(pi)), out))
    deg = fit_degree(points)
    tdeg = fit_degree([(x, t) for (x, _), t in zip(points, times)])
    return BenchReport(points, deg, deg <= degree_bound, degree_bound, "preserve", {"timeDegree": round(tdeg, 4)})


def mixed_ladder(n: int) -> Proof:
    """A CK proof joining a conjunction ladder and a Kdia tower of size n."""
    tower = kdia_tower(n)
    return B.rand(B.weaken_to(nested_and(n), tower.ant), tower)


def bench_kernels(sizes: Sequence[int] = (256, 1024, 4096, 16384), reps: int = 3, seed: int = 0) -> dict:
    """Propagation alone (no proof objects) in both kernels on the same inputs."""
    from ._hornpy import propagate as py_prop

    try:
        from ._horncore import propagate as cy_prop
    except ImportError:  # pragma: no cover - depends on the build
        cy_prop = None
    rng = random.Random(seed)
    rows = []
    for n in sizes:
        gamma, targets = horn_instance(rng, n)
        enc = hornsolve._encode(gamma, targets)
        names, units, bodies, heads, _, tpos = enc
        args = (len(names), units, bodies, heads, tpos)
        tp = _timed(lambda: py_prop(*args), reps)
        row = {"size": instance_size(gamma, targets), "python": tp}
        if cy_prop is not None:
            assert cy_prop(*args) == py_prop(*args)
            tc = _timed(lambda: cy_prop(*args), reps)
            row["cython"] = tc
            row["speedup"] = tp / tc if tc > 0 else math.inf
        rows.append(row)
    return {"kernel": hornsolve.KERNEL, "rows": rows}


__all__ = [
    "BenchReport",
    "fit_degree",
    "max_doubling_ratio",
    "doubling_ladder",
    "bench_extract",
    "bench_horn",
    "bench_preserve",
    "bench_kernels",
    "horn_instance",
    "instance_size",
]
