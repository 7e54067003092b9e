"""Recovery-quality and diagnostic measures, plus the phase-diagram sweep."""

from __future__ import annotations

import concurrent.futures
import csv
from dataclasses import dataclass
from math import prod

import numpy as np

from . import solvers, synth
from .errors import DegenerateInputError, ParameterError, ShapeError
from .linalg import numerical_rank, _as_matrix
from .rng import derive_seed
from .tensor import DenseTensor, unfold_mode_array, unfold_tt_array


def rse(x: DenseTensor, truth: DenseTensor) -> float:
    """Relative error ||x - truth||_F / ||truth||_F."""
    if x.dims != truth.dims:
        raise ShapeError(f"dims mismatch: {x.dims} vs {truth.dims}")
    denom = float(np.linalg.norm(truth.values))
    if denom == 0.0:
        raise DegenerateInputError("ground truth has zero norm")
    return float(np.linalg.norm(x.values - truth.values)) / denom


def vn_entropy(mat) -> float:
    """Base-2 entropy of the squared singular value distribution.

    Singular values are normalized so their squares sum to one; a rank-1
    matrix scores 0 and r equal singular values score log2(r).
    """
    a = _as_matrix(mat)
    s = np.linalg.svd(a, compute_uv=False)
    power = s * s
    total = power.sum()
    if total == 0.0:
        raise DegenerateInputError("entropy of a zero matrix is undefined")
    p = power / total
    p = p[p > 0.0]
    return float(-(p * np.log2(p)).sum())


def tt_rank_profile(x: DenseTensor, tol: float = 1e-9) -> tuple[int, ...]:
    """Numerical rank of every leading-split matricization."""
    arr = x.array
    return tuple(
        numerical_rank(unfold_tt_array(arr, k), tol) for k in range(1, x.order)
    )


def tucker_rank_profile(x: DenseTensor, tol: float = 1e-9) -> tuple[int, ...]:
    """Numerical rank of every single-mode matricization."""
    arr = x.array
    return tuple(numerical_rank(unfold_mode_array(arr, n), tol) for n in range(x.order))


def split_entropies(x: DenseTensor) -> tuple[float, ...]:
    """Entropy across every leading split; high values mean strong
    correlation between the two index groups."""
    arr = x.array
    return tuple(vn_entropy(unfold_tt_array(arr, k)) for k in range(1, x.order))


@dataclass(frozen=True, eq=False)
class PhaseDiagram:
    """RSE over a (rank, missing-ratio) grid with a success threshold."""

    rank_axis: tuple[int, ...]
    mr_axis: tuple[float, ...]
    grid: np.ndarray  # shape (len(rank_axis), len(mr_axis))
    eps: float

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=np.float64)
        if grid.shape != (len(self.rank_axis), len(self.mr_axis)):
            raise ShapeError(
                f"grid shape {grid.shape} does not match axes "
                f"({len(self.rank_axis)}, {len(self.mr_axis)})"
            )
        object.__setattr__(self, "grid", grid)

    def successes(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return np.nan_to_num(self.grid, nan=np.inf) <= self.eps

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rank"] + [f"{mr:g}" for mr in self.mr_axis])
            for r, row in zip(self.rank_axis, self.grid):
                writer.writerow([r] + [f"{v:.10g}" for v in row])

    def to_pgm(self, path) -> None:
        """Binary grayscale image: white for success, darker for larger
        error, black for total failure or an errored cell."""
        ok = self.successes()
        with np.errstate(invalid="ignore"):
            shade = np.round(255.0 * (1.0 - np.clip(self.grid, 0.0, 1.0)))
        shade = np.nan_to_num(shade, nan=0.0)
        pixels = np.where(ok, 255.0, np.minimum(shade, 254.0)).astype(np.uint8)
        header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii")
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(pixels.tobytes())


def _phase_cell(algorithm, dims, rank, mr, base_seed, i, j, replicates,
                truth_kind, f, tol, maxiter, init):
    errors = []
    for rep in range(replicates):
        gen_ranks = (
            (rank,) * (len(dims) - 1) if truth_kind == "tt" else (rank,) * len(dims)
        )
        if truth_kind == "tt":
            truth = synth.gen_tt_tensor(dims, gen_ranks, derive_seed(base_seed, i, j, rep, 0))
        else:
            truth = synth.gen_tucker_tensor(dims, gen_ranks, derive_seed(base_seed, i, j, rep, 0))
        mask = synth.gen_mask(truth, mr, derive_seed(base_seed, i, j, rep, 1))
        try:
            report = solvers.run_algorithm(
                algorithm,
                mask,
                ranks=solvers.capped_ranks(algorithm, dims, rank)
                if solvers.needs_ranks(algorithm)
                else None,
                f=f,
                tol=tol,
                maxiter=maxiter,
                seed=derive_seed(base_seed, i, j, rep, 2),
                init=init,
                truth=truth,
            )
            errors.append(rse(report.recovered, truth))
        except Exception:
            errors.append(float("nan"))  # keep the rest of the grid alive
    arr = np.asarray(errors)
    return float(np.nanmean(arr)) if np.isfinite(arr).any() else float("nan")


def phase_grid(
    algorithm: str,
    dims,
    rank_axis,
    mr_axis,
    *,
    truth_kind: str = "tt",
    eps: float = 1e-2,
    replicates: int = 1,
    base_seed: int = 0,
    f: float = 0.1,
    tol: float = 1e-4,
    maxiter: int = 1000,
    init: str = "zero",
    jobs: int = 1,
) -> PhaseDiagram:
    """One completion run (or replicate average) per (rank, mr) cell.

    Every cell draws its own ground truth, mask, and solver streams from
    ``base_seed``, so the grid is reproducible cell by cell regardless of
    worker count.
    """
    dims = tuple(int(d) for d in dims)
    rank_axis = tuple(int(r) for r in rank_axis)
    mr_axis = tuple(float(m) for m in mr_axis)
    if not rank_axis or not mr_axis:
        raise ParameterError("rank and mr axes must be nonempty")
    if truth_kind not in ("tt", "tucker"):
        raise ParameterError(f"truth_kind must be 'tt' or 'tucker', got {truth_kind!r}")
    if replicates < 1:
        raise ParameterError("replicates must be >= 1")
    grid = np.full((len(rank_axis), len(mr_axis)), np.nan)
    cells = [(i, j) for i in range(len(rank_axis)) for j in range(len(mr_axis))]

    def run(cell):
        i, j = cell
        return i, j, _phase_cell(
            algorithm, dims, rank_axis[i], mr_axis[j], base_seed, i, j,
            replicates, truth_kind, f, tol, maxiter, init,
        )

    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            for i, j, value in pool.map(run, cells):
                grid[i, j] = value
    else:
        for cell in cells:
            i, j, value = run(cell)
            grid[i, j] = value
    return PhaseDiagram(rank_axis=rank_axis, mr_axis=mr_axis, grid=grid, eps=eps)
