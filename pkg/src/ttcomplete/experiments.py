"""Experiment drivers shared by the CLI: parameter sweeps, synthetic
RSE-vs-missing-ratio studies, and image completion with and without the
ket augmentation.

Seed discipline: every driver derives labelled sub-seeds from one base
seed, so a single experiment cell can be reproduced in isolation (e.g. by
the ``complete`` command) given the same base seed and cell coordinates.
"""

from __future__ import annotations

import concurrent.futures
from math import prod

from . import augment, metrics, solvers, synth
from .errors import ParameterError
from .mask import ObservationMask
from .rng import derive_seed
from .solvers import F_GRID, CompletionReport, algorithm_family, needs_ranks, split_bound
from .tensor import DenseTensor

ALL_ALGORITHMS = tuple(sorted(solvers.ALGORITHMS))

# stream labels for derive_seed
_STREAM_TRUTH = 0
_STREAM_MASK = 1
_STREAM_SOLVER = 2
_STREAM_IMAGE_MASK = 3


def truth_seed(base: int) -> int:
    return derive_seed(base, _STREAM_TRUTH)


def mask_seed(base: int, mr_index: int, replicate: int) -> int:
    return derive_seed(base, _STREAM_MASK, mr_index, replicate)


def solver_seed(base: int, mr_index: int, replicate: int) -> int:
    return derive_seed(base, _STREAM_SOLVER, mr_index, replicate)


def image_mask_seed(base: int, mr_index: int) -> int:
    return derive_seed(base, _STREAM_IMAGE_MASK, mr_index)


def f_values(f_arg) -> tuple[float, ...]:
    """Parse an f argument: a number, or 'auto' for the sweep grid."""
    if isinstance(f_arg, str):
        if f_arg.lower() == "auto":
            return F_GRID
        try:
            f_arg = float(f_arg)
        except ValueError:
            raise ParameterError(f"f must be a number or 'auto', got {f_arg!r}") from None
    if f_arg <= 0:
        raise ParameterError(f"f must be positive, got {f_arg}")
    return (float(f_arg),)


def run_swept(
    algorithm: str,
    mask: ObservationMask,
    *,
    ranks=None,
    fs: tuple[float, ...] = (0.1,),
    tol: float = 1e-4,
    maxiter: int = 1000,
    seed: int = 0,
    init: str = "zero",
    truth: DenseTensor | None = None,
) -> tuple[CompletionReport, float]:
    """Run an algorithm, sweeping f for the thresholding solvers.

    The best run wins: lowest final RSE when ground truth is available,
    otherwise lowest final relative change. Factorization solvers ignore f
    and run once. Returns (report, f_used).
    """
    if not needs_ranks(algorithm):
        best = None
        for f in fs:
            report = solvers.run_algorithm(
                algorithm, mask, f=f, tol=tol, maxiter=maxiter, seed=seed,
                init=init, truth=truth,
            )
            score = report.final_rse if truth is not None else report.final_eps
            if best is None or score < best[0]:
                best = (score, report, f)
        return best[1], best[2]
    report = solvers.run_algorithm(
        algorithm, mask, ranks=ranks, tol=tol, maxiter=maxiter, seed=seed,
        init=init, truth=truth,
    )
    return report, fs[0]


def true_rank_profile(truth_kind: str, gen_ranks, dims, algorithm: str) -> tuple[int, ...]:
    """Generic rank profile of a synthetic tensor, in the matricization
    family the algorithm optimizes, clipped to the dimension bounds."""
    dims = tuple(dims)
    gen_ranks = tuple(int(r) for r in gen_ranks)
    n = len(dims)
    family = algorithm_family(algorithm)
    if family == solvers.FAMILY_TUCKER:
        if truth_kind == "tucker":
            profile = gen_ranks
        else:
            bonds = (1,) + gen_ranks + (1,)
            profile = tuple(bonds[k] * bonds[k + 1] for k in range(n))
        labels = range(n)
    else:
        if truth_kind == "tt":
            profile = gen_ranks
        else:
            profile = tuple(
                min(prod(gen_ranks[:k]), prod(gen_ranks[k:])) for k in range(1, n)
            )
        labels = range(1, n)
    return tuple(
        min(r, split_bound(family, dims, lab)) for r, lab in zip(profile, labels)
    )


def _report_row(report: CompletionReport, *, mr, algorithm, f, seed, form=None) -> dict:
    return {
        "mr": mr,
        "algorithm": algorithm,
        "form": form,
        "rse": report.final_rse,
        "iterations": report.iterations,
        "eps_final": report.final_eps,
        "converged": int(report.converged),
        "f": f,
        "seed": seed,
        "seconds": report.wall_time,
    }


def _pool_map(jobs: int, fn, items):
    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def synth_experiment(
    dims,
    gen_ranks,
    truth_kind: str,
    mrs,
    algorithms=ALL_ALGORITHMS,
    *,
    replicates: int = 1,
    base_seed: int = 0,
    f="auto",
    tol: float = 1e-4,
    maxiter: int = 1000,
    init: str = "zero",
    jobs: int = 1,
) -> list[dict]:
    """Ground truth once per replicate, one run per (algorithm, mr, replicate).

    Factorization solvers receive the generic true rank profile of the
    synthetic family, clipped to each split's bound.
    """
    dims = tuple(int(d) for d in dims)
    if truth_kind not in ("tt", "tucker"):
        raise ParameterError(f"truth kind must be 'tt' or 'tucker', got {truth_kind!r}")
    expected = len(dims) if truth_kind == "tucker" else len(dims) - 1
    gen_ranks = tuple(int(r) for r in gen_ranks)
    if len(gen_ranks) != expected:
        raise ParameterError(
            f"{truth_kind} generation needs {expected} ranks for dims {dims}"
        )
    for name in algorithms:
        algorithm_family(name)  # validate names up front
    fs = f_values(f)
    mrs = tuple(float(m) for m in mrs)

    gen = synth.gen_tt_tensor if truth_kind == "tt" else synth.gen_tucker_tensor
    truths = {
        rep: gen(dims, gen_ranks, derive_seed(truth_seed(base_seed), rep))
        for rep in range(replicates)
    }

    def run(cell):
        name, mi, rep = cell
        truth = truths[rep]
        mask = synth.gen_mask(truth, mrs[mi], mask_seed(base_seed, mi, rep))
        ranks = (
            true_rank_profile(truth_kind, gen_ranks, dims, name)
            if needs_ranks(name)
            else None
        )
        try:
            report, f_used = run_swept(
                name, mask, ranks=ranks, fs=fs, tol=tol, maxiter=maxiter,
                seed=solver_seed(base_seed, mi, rep), init=init, truth=truth,
            )
            return _report_row(
                report, mr=mrs[mi], algorithm=name, f=f_used,
                seed=solver_seed(base_seed, mi, rep),
            )
        except Exception as exc:  # failed cell becomes a failed row
            return {
                "mr": mrs[mi], "algorithm": name, "rse": None, "iterations": None,
                "eps_final": None, "converged": 0, "f": None,
                "seed": solver_seed(base_seed, mi, rep), "seconds": None,
                "error": str(exc),
            }

    cells = [
        (name, mi, rep)
        for name in algorithms
        for mi in range(len(mrs))
        for rep in range(replicates)
    ]
    return _pool_map(jobs, run, cells)


def default_image_rank(dims, form: str) -> int:
    """Target factorization rank for image completion, before clipping to
    the per-split bounds."""
    if form == "ka":
        return 16
    side = max(dims[:-1]) if len(dims) >= 2 else dims[0]
    return max(3, min(40, side // 6))


def image_experiment(
    image: DenseTensor,
    *,
    mrs=None,
    text: str | None = None,
    forms=("raw", "ka"),
    algorithms=ALL_ALGORITHMS,
    f="auto",
    tol: float = 1e-4,
    maxiter: int = 1000,
    base_seed: int = 0,
    init: str = "mean",
    jobs: int = 1,
    raw_rank: int | None = None,
    ka_rank: int | None = None,
) -> tuple[list[dict], dict]:
    """Complete an RGB image under random or text masks, on the raw
    third-order tensor and/or its augmented form.

    The same pixel-space mask is transported through the augmentation, so
    raw and augmented runs see identical observations. Returns result rows
    plus recovered image tensors keyed by (algorithm, form, mr label).
    """
    if (mrs is None) == (text is None):
        raise ParameterError("give exactly one of mrs or text")
    for form in forms:
        if form not in ("raw", "ka"):
            raise ParameterError(f"forms must be 'raw' or 'ka', got {form!r}")
    for name in algorithms:
        algorithm_family(name)
    fs = f_values(f)
    if "ka" in forms:
        augment.layout_for_image(image.dims)  # fail fast on bad shapes

    if text is not None:
        masks = [("text", synth.text_mask(image, text))]
    else:
        masks = [
            (float(m), synth.gen_mask(image, float(m), image_mask_seed(base_seed, i)))
            for i, m in enumerate(mrs)
        ]

    aug_truth = augment.ka_forward(image) if "ka" in forms else None

    form_code = {"raw": 0, "ka": 1}

    def run(cell):
        name, form, label, mask = cell
        sseed = derive_seed(base_seed, _STREAM_SOLVER, form_code[form])
        if form == "raw":
            truth, run_mask = image, mask
        else:
            truth, run_mask = aug_truth, augment.ka_mask(mask)
        if needs_ranks(name):
            target = (raw_rank if form == "raw" else ka_rank) or default_image_rank(
                truth.dims, form
            )
            ranks = solvers.capped_ranks(name, truth.dims, target)
        else:
            ranks = None
        try:
            report, f_used = run_swept(
                name, run_mask, ranks=ranks, fs=fs, tol=tol, maxiter=maxiter,
                seed=sseed, init=init, truth=truth,
            )
            recovered = report.recovered
            if form == "ka":
                recovered = augment.ka_inverse(recovered)
            row = _report_row(
                report, mr=mask.missing_ratio, algorithm=name, f=f_used,
                seed=sseed, form=form,
            )
            row["rse"] = metrics.rse(recovered, image)
            return row, (name, form, label), recovered
        except Exception as exc:
            row = {
                "mr": mask.missing_ratio, "algorithm": name, "form": form,
                "rse": None, "iterations": None, "eps_final": None,
                "converged": 0, "f": None, "seed": sseed, "seconds": None,
                "error": str(exc),
            }
            return row, (name, form, label), None

    cells = [
        (name, form, label, mask)
        for label, mask in masks
        for form in forms
        for name in algorithms
    ]
    results = _pool_map(jobs, run, cells)
    rows = [row for row, _key, _img in results]
    recovered = {key: img for _row, key, img in results if img is not None}
    return rows, recovered
