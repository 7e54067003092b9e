"""Per-iteration timing harness.

Timings are observational: the harness reruns solvers on synthetic
instances and reads the per-iteration wall times the solvers already
record, so instrumentation never changes numerical results. Scaling claims
are reported as fitted log-log exponents, never asserted.
"""

from __future__ import annotations

import argparse
import csv
from dataclasses import dataclass
from math import prod
from statistics import median

import numpy as np

from . import solvers, synth
from .errors import ParameterError
from .experiments import true_rank_profile
from .rng import derive_seed

SIZE_GUARD = 50_000_000  # entries; keeps accidental OOM-scale runs out


@dataclass(frozen=True)
class BenchRecord:
    algorithm: str
    dims: tuple[int, ...]
    ranks: tuple[int, ...] | None
    iterations: int
    seconds_per_iter: float  # median over the timed iterations

    def __post_init__(self):
        if self.iterations < 5:
            raise ParameterError("bench needs at least 5 timed iterations")
        if self.seconds_per_iter <= 0:
            raise ParameterError("timings must be positive")


def bench_iteration(
    algorithm: str,
    dims,
    rank: int,
    seed: int = 0,
    iterations: int = 8,
    mr: float = 0.5,
    f: float = 0.1,
) -> BenchRecord:
    """Median per-iteration time of one solver on one synthetic instance."""
    dims = tuple(int(d) for d in dims)
    if prod(dims) > SIZE_GUARD:
        raise ParameterError(f"instance with {prod(dims)} entries exceeds the size guard")
    if iterations < 5:
        raise ParameterError("need at least 5 iterations for a stable median")
    family = solvers.algorithm_family(algorithm)
    if family == solvers.FAMILY_TUCKER:
        gen_ranks = (rank,) * len(dims)
        truth = synth.gen_tucker_tensor(dims, gen_ranks, derive_seed(seed, 0))
        truth_kind = "tucker"
    else:
        gen_ranks = (rank,) * (len(dims) - 1)
        truth = synth.gen_tt_tensor(dims, gen_ranks, derive_seed(seed, 0))
        truth_kind = "tt"
    mask = synth.gen_mask(truth, mr, derive_seed(seed, 1))
    ranks = (
        true_rank_profile(truth_kind, gen_ranks, dims, algorithm)
        if solvers.needs_ranks(algorithm)
        else None
    )
    report = solvers.run_algorithm(
        algorithm, mask, ranks=ranks, f=f, tol=1e-300, maxiter=iterations,
        seed=derive_seed(seed, 2),
    )
    times = [rec.seconds for rec in report.history]
    return BenchRecord(
        algorithm=algorithm,
        dims=dims,
        ranks=ranks,
        iterations=len(times),
        seconds_per_iter=float(median(times)),
    )


def fit_power_law(xs, ys) -> tuple[float, float]:
    """Least-squares exponent and R^2 of y ~ c * x^p on a log-log scale."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    if lx.size < 2:
        raise ParameterError("need at least two points to fit a power law")
    coeffs, residuals, *_ = np.polyfit(lx, ly, 1, full=True)
    predicted = np.polyval(coeffs, lx)
    ss_res = float(np.sum((ly - predicted) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(coeffs[0]), r2


def write_bench_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "dims", "ranks", "iterations", "seconds_per_iter"])
        for rec in records:
            writer.writerow([
                rec.algorithm,
                "x".join(map(str, rec.dims)),
                "x".join(map(str, rec.ranks)) if rec.ranks else "",
                rec.iterations,
                f"{rec.seconds_per_iter:.6g}",
            ])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m ttcomplete.bench",
        description="Time solver iterations on synthetic instances.",
    )
    parser.add_argument("--algos", default=",".join(sorted(solvers.ALGORITHMS)))
    parser.add_argument("--dims", default="10,10,10,10",
                        help="comma-separated dims, ';' between instances")
    parser.add_argument("--rank", type=int, default=3)
    parser.add_argument("--iterations", type=int, default=8)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    records = []
    for dims_text in args.dims.split(";"):
        dims = tuple(int(d) for d in dims_text.split(","))
        for name in args.algos.split(","):
            records.append(
                bench_iteration(name.strip(), dims, args.rank,
                                seed=args.seed, iterations=args.iterations)
            )
    write_bench_csv(records, args.out)
    print(f"wrote {args.out} ({len(records)} records)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
