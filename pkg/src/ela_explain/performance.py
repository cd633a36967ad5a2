"""Regression targets: best reached precision of a baseline CMA-ES.

The optimiser is a plain (mu/mu_w, lambda)-CMA-ES with rank-one and rank-mu
covariance updates and cumulative step-size adaptation.  Externally produced
performance tables can be ingested instead of running it.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DataError, InvalidArgumentError
from .problems import ProblemInstance


def default_popsize(dim: int) -> int:
    return 4 + int(math.floor(3 * math.log(dim)))


def default_budget(dim: int) -> int:
    return 50 * dim * default_popsize(dim)


def run_seed(fid: int, iid: int) -> int:
    return fid * 100_000 + iid * 100


def log_transform(p):
    """``log10(1 + p)``; precisions are non-negative."""
    arr = np.asarray(p, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise InvalidArgumentError(f"precision must be >= 0, got {p!r}")
    out = np.log10(1.0 + arr)
    return float(out) if np.ndim(p) == 0 else out


@dataclass(frozen=True)
class PerformanceRecord:
    instance: ProblemInstance
    target: float
    log_target: float
    runs: int
    budget: int

    @classmethod
    def from_target(cls, instance, target, runs=1, budget=0):
        return cls(instance, float(target), log_transform(target), runs, budget)


def run_cmaes(ev, budget: int, seed: int, popsize: int | None = None, trace: list | None = None) -> float:
    """Minimise ``ev`` for ``budget`` evaluations; return the best precision seen.

    The last generation is truncated to the remaining budget and not used for
    an update.  ``trace``, if given, receives one dict per generation.
    """
    d = ev.dim
    lam = popsize or default_popsize(d)
    if budget < lam:
        raise InvalidArgumentError(f"budget {budget} is smaller than the population size {lam}")
    rng = np.random.default_rng(seed)
    lo, hi = ev.lower, ev.upper

    mu = lam // 2
    w = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    w /= w.sum()
    mueff = 1.0 / np.sum(w**2)
    cs = (mueff + 2) / (d + mueff + 5)
    ds = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (d + 1)) - 1) + cs
    cc = (4 + mueff / d) / (d + 4 + 2 * mueff / d)
    c1 = 2 / ((d + 1.3) ** 2 + mueff)
    cmu = min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((d + 2) ** 2 + mueff))
    chin = math.sqrt(d) * (1 - 1 / (4 * d) + 1 / (21 * d * d))

    mean = rng.uniform(lo, hi, d)
    sigma = 0.3 * (hi - lo)
    C = np.eye(d)
    B = np.eye(d)
    D = np.ones(d)
    ps = np.zeros(d)
    pc = np.zeros(d)

    spent = 0
    best = math.inf
    gen = 0
    while spent < budget:
        k = min(lam, budget - spent)
        Z = rng.standard_normal((lam, d))[:k]
        Y = (Z * D) @ B.T
        X = mean + sigma * Y
        f = ev.evaluate_batch(X)
        spent += k
        best = min(best, float(np.min(ev.precision(f))))
        gen += 1
        if trace is not None:
            trace.append({"generation": gen, "evals": spent, "best_precision": best, "sigma": sigma})
        if k < lam:
            break
        sel = np.argsort(f, kind="stable")[:mu]
        y_w = w @ Y[sel]
        mean = mean + sigma * y_w
        invsqrt = (B / D) @ B.T
        ps = (1 - cs) * ps + math.sqrt(cs * (2 - cs) * mueff) * (invsqrt @ y_w)
        hsig = np.linalg.norm(ps) / math.sqrt(1 - (1 - cs) ** (2 * gen)) / chin < 1.4 + 2 / (d + 1)
        pc = (1 - cc) * pc + hsig * math.sqrt(cc * (2 - cc) * mueff) * y_w
        rank_mu = (Y[sel].T * w) @ Y[sel]
        C = ((1 - c1 - cmu) * C + c1 * (np.outer(pc, pc) + (1 - hsig) * cc * (2 - cc) * C)
             + cmu * rank_mu)
        # step-size change capped at a factor e per generation
        sigma *= math.exp(min(1.0, (cs / ds) * (np.linalg.norm(ps) / chin - 1)))
        C = (C + C.T) / 2
        ok = np.all(np.isfinite(C)) and math.isfinite(sigma) and sigma > 1e-250
        if ok:
            evals, B = np.linalg.eigh(C)
            ok = evals.min() > 0 and evals.max() < 1e14 * evals.min()
        if not ok:
            # numerical breakdown: no restarts in the baseline, stop early
            if trace is not None:
                trace.append({"generation": gen, "evals": spent, "best_precision": best, "stopped": "numerics"})
            break
        D = np.sqrt(evals)
    # rounding in the transformed objective can undercut the stored optimum by ~1 ulp
    return max(best, 0.0)


def collect_performance(ev, runs: int = 10, budget: int | None = None, base_seed: int | None = None,
                        traces: list | None = None) -> PerformanceRecord:
    """Median best precision over ``runs`` seeded CMA-ES runs."""
    if runs < 1:
        raise InvalidArgumentError(f"runs must be >= 1, got {runs}")
    budget = default_budget(ev.dim) if budget is None else budget
    if base_seed is None:
        base_seed = run_seed(ev.instance.fid, ev.instance.iid) if ev.instance else 0
    results = []
    for r in range(runs):
        tr = [] if traces is not None else None
        results.append(run_cmaes(ev, budget, base_seed + r, trace=tr))
        if traces is not None:
            traces.append(tr)
    inst = ev.instance
    target = float(np.median(results))
    return PerformanceRecord(inst, target, log_transform(target), runs, budget)


# ------------------------------------------------------------------- CSV I/O

def write_performance_csv(path, records: Iterable[PerformanceRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fid", "iid", "target", "log_target"])
        for r in records:
            w.writerow([r.instance.fid, r.instance.iid, repr(r.target), repr(r.log_target)])


def ingest_performance_csv(path, dim: int = 5, tol: float = 1e-6) -> list[PerformanceRecord]:
    """Read ``fid,iid,target[,log_target]``; the log column is recomputed and cross-checked."""
    out = []
    seen: dict[tuple[int, int], int] = {}
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        if rd.fieldnames is None or not {"fid", "iid", "target"} <= set(rd.fieldnames):
            raise DataError(f"{path}: header must contain fid,iid,target")
        has_log = "log_target" in rd.fieldnames
        for lineno, row in enumerate(rd, start=2):
            try:
                fid, iid = int(row["fid"]), int(row["iid"])
                target = float(row["target"])
            except (TypeError, ValueError):
                raise DataError(f"{path}:{lineno}: malformed row {row!r}") from None
            if not target >= 0:
                raise DataError(f"{path}:{lineno}: negative or missing target {target}")
            if (fid, iid) in seen:
                raise DataError(f"{path}:{lineno}: duplicate (fid={fid}, iid={iid}), first at line {seen[(fid, iid)]}")
            seen[(fid, iid)] = lineno
            log_t = log_transform(target)
            if has_log and row["log_target"] not in (None, ""):
                try:
                    given = float(row["log_target"])
                except ValueError:
                    raise DataError(f"{path}:{lineno}: malformed log_target") from None
                if abs(given - log_t) > tol:
                    raise DataError(f"{path}:{lineno}: log_target {given} inconsistent with "
                                    f"target {target} (expected {log_t:.6g})")
            try:
                inst = ProblemInstance(fid, iid, dim)
            except InvalidArgumentError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            out.append(PerformanceRecord(inst, target, log_t, 0, 0))
    return out


def write_trace_jsonl(path, traces) -> None:
    with open(path, "w") as fh:
        for run, tr in enumerate(traces):
            for entry in tr:
                fh.write(json.dumps({"run": run, **entry}, sort_keys=True) + "\n")
