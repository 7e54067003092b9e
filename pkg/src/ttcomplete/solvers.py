"""Completion solvers.

Four algorithms behind one interface, split along two axes:

* proximal (singular value thresholding) vs. factorization (alternating
  least squares) update rules, and
* the matricization family the weights select: leading-split ("tt" and
  "square") or single-mode ("tucker").

Every solver alternates two blocks until the relative change between
successive tensors drops below ``tol``: per-split matrix updates computed
from the current tensor, then a tensor update that averages the folded
matrices on the missing entries and pins the observed entries to their
known values.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from math import prod

import numpy as np

from . import linalg
from .errors import DegenerateInputError, NumericError, ParameterError, ShapeError
from .mask import ObservationMask
from .rng import gaussian, make_rng
from .tensor import (
    DenseTensor,
    fold_mode_array,
    fold_tt_array,
    unfold_mode_array,
    unfold_tt_array,
)

FAMILY_TT = "tt"
FAMILY_TUCKER = "tucker"
FAMILY_SQUARE = "square"
FAMILIES = (FAMILY_TT, FAMILY_TUCKER, FAMILY_SQUARE)

F_GRID = (0.01, 0.05, 0.1, 0.5, 1.0)  # sweep grid for the beta multiplier


def balanced_split(order: int) -> int:
    """The split index the square weighting concentrates on: round(order/2),
    half away from zero."""
    return (order + 1) // 2


@dataclass(frozen=True)
class WeightScheme:
    """Per-split weights selecting the matricization family.

    ``alphas`` sum to one; ``betas`` (= f * alphas, defined only where
    alpha > 0) exist when ``f`` was supplied and are needed by the
    thresholding-based solvers.
    """

    family: str
    alphas: tuple[float, ...]
    betas: tuple[float, ...] | None = None
    f: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown weight family {self.family!r}")
        alphas = tuple(float(a) for a in self.alphas)
        if any(a < 0 for a in alphas):
            raise ParameterError("weights must be nonnegative")
        if abs(sum(alphas) - 1.0) > 1e-12:
            raise ParameterError(f"weights must sum to 1, got {sum(alphas)}")
        object.__setattr__(self, "alphas", alphas)
        if self.f is not None and self.f <= 0:
            raise ParameterError(f"f must be positive, got {self.f}")
        if self.betas is not None:
            betas = tuple(float(b) for b in self.betas)
            if len(betas) != len(alphas):
                raise ParameterError("betas must pair with alphas")
            if any(b < 0 for b in betas) or any(a > 0 and b <= 0 for a, b in zip(alphas, betas)):
                raise ParameterError("betas must be positive wherever alpha > 0")
            object.__setattr__(self, "betas", betas)

    @property
    def split_count(self) -> int:
        return len(self.alphas)


def make_weights(family: str, dims, f: float | None = None) -> WeightScheme:
    """Build the standard weight vector for a family over the given dims.

    tt: alpha_k proportional to min(prod(dims[:k]), prod(dims[k:])), the
    dimension bound of the k-th leading split. tucker: alpha_k proportional
    to I_k. square: all weight on the single most balanced split.
    """
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    if family == FAMILY_TT:
        if n < 2:
            raise ParameterError("tt weights need an order >= 2 tensor")
        deltas = [min(prod(dims[:k]), prod(dims[k:])) for k in range(1, n)]
        total = sum(deltas)
        alphas = tuple(d / total for d in deltas)
    elif family == FAMILY_TUCKER:
        total = sum(dims)
        alphas = tuple(d / total for d in dims)
    elif family == FAMILY_SQUARE:
        if n < 2:
            raise ParameterError("square weights need an order >= 2 tensor")
        mid = balanced_split(n)
        alphas = tuple(1.0 if k == mid else 0.0 for k in range(1, n))
    else:
        raise ParameterError(f"unknown weight family {family!r}")
    betas = None
    if f is not None:
        if f <= 0:
            raise ParameterError(f"f must be positive, got {f}")
        betas = tuple(f * a for a in alphas)
    return WeightScheme(family=family, alphas=alphas, betas=betas, f=f)


@dataclass(frozen=True)
class SolverConfig:
    weights: WeightScheme
    ranks: tuple[int, ...] | None = None
    tol: float = 1e-4
    maxiter: int = 1000
    seed: int = 0
    init: str = "zero"

    def __post_init__(self):
        if self.tol <= 0:
            raise ParameterError(f"tol must be positive, got {self.tol}")
        if self.maxiter < 1:
            raise ParameterError(f"maxiter must be >= 1, got {self.maxiter}")
        if self.init not in ("zero", "mean"):
            raise ParameterError(f"init must be 'zero' or 'mean', got {self.init!r}")
        if self.seed < 0:
            raise ParameterError("seed must be a nonnegative integer")
        if self.ranks is not None:
            ranks = tuple(int(r) for r in self.ranks)
            if any(r < 1 for r in ranks):
                raise ParameterError(f"ranks must be positive, got {ranks}")
            object.__setattr__(self, "ranks", ranks)


@dataclass(frozen=True)
class IterRecord:
    """One solver iteration: relative change, optional RSE against ground
    truth, optional model objective, and wall time."""

    eps: float
    rse: float | None
    objective: float | None
    seconds: float


@dataclass(frozen=True)
class CompletionReport:
    recovered: DenseTensor
    iterations: int
    converged: bool
    history: tuple[IterRecord, ...]
    wall_time: float

    @property
    def final_eps(self) -> float:
        return self.history[-1].eps if self.history else float("nan")

    @property
    def final_rse(self) -> float | None:
        return self.history[-1].rse if self.history else None


def init_tensor(mask: ObservationMask, init: str = "zero") -> DenseTensor:
    """Starting tensor: observed entries from the mask, missing entries
    zero ('zero') or the mean observed value ('mean')."""
    if init == "zero":
        fill = 0.0
    elif init == "mean":
        if mask.count == 0:
            raise DegenerateInputError("mean-fill needs at least one observed entry")
        fill = float(mask.values.mean())
    else:
        raise ParameterError(f"unknown init {init!r}")
    flat = np.full(mask.total, fill)
    flat[mask.offsets] = mask.values
    return DenseTensor(mask.dims, flat)


def _split_ops(family: str, dims: tuple[int, ...]):
    """Split labels plus unfold/fold callables for a matricization family.

    Labels are split points 1..N-1 for the leading-split family and
    0-based mode axes 0..N-1 for the single-mode family.
    """
    if family == FAMILY_TUCKER:
        labels = list(range(len(dims)))
        unfold = unfold_mode_array
        fold_ = lambda mat, axis: fold_mode_array(mat, dims, axis)
    else:
        labels = list(range(1, len(dims)))
        unfold = unfold_tt_array
        fold_ = lambda mat, _split: fold_tt_array(mat, dims)
    return labels, unfold, fold_


def split_bound(family: str, dims, label: int) -> int:
    """Largest possible rank of the matricization at ``label``."""
    dims = tuple(dims)
    if family == FAMILY_TUCKER:
        return dims[label]
    return min(prod(dims[:label]), prod(dims[label:]))


def _prepare(mask: ObservationMask, config: SolverConfig, truth, allowed_families):
    w = config.weights
    if w.family not in allowed_families:
        raise ParameterError(
            f"solver requires weight family in {allowed_families}, got {w.family!r}"
        )
    dims = mask.dims
    expected = len(dims) if w.family == FAMILY_TUCKER else len(dims) - 1
    if w.split_count != expected:
        raise ParameterError(
            f"{w.family} weights need {expected} entries for dims {dims}, got {w.split_count}"
        )
    if mask.count == 0:
        raise DegenerateInputError("cannot complete a tensor with no observed entries")
    if not np.isfinite(mask.values).all():
        raise NumericError("observed values contain non-finite entries")
    truth_flat = None
    if truth is not None:
        if truth.dims != dims:
            raise ShapeError(f"ground truth dims {truth.dims} do not match mask dims {dims}")
        truth_flat = truth.values
        denom = float(np.linalg.norm(truth_flat))
    else:
        denom = float(np.linalg.norm(mask.values))
    if denom == 0.0:
        raise DegenerateInputError("reference norm is zero; relative change is undefined")
    x0 = init_tensor(mask, config.init)
    # F-ordered working copy so leading-split unfolds are zero-copy views
    x = np.asfortranarray(x0.array)
    return x, truth_flat, denom


def _finish(x, history, converged, started) -> CompletionReport:
    return CompletionReport(
        recovered=DenseTensor.from_array(x),
        iterations=len(history),
        converged=converged,
        history=tuple(history),
        wall_time=time.perf_counter() - started,
    )


def _silrtc_generic(mask, config, truth, allowed_families) -> CompletionReport:
    started = time.perf_counter()
    w = config.weights
    if w.betas is None:
        raise ParameterError("thresholding solvers need betas; build weights with f set")
    x, truth_flat, denom = _prepare(mask, config, truth, allowed_families)
    dims = mask.dims
    labels, unfold, fold_ = _split_ops(w.family, dims)
    active = [
        (lab, a, b)
        for lab, a, b in zip(labels, w.alphas, w.betas)
        if a > 0.0
    ]
    beta_sum = sum(b for _, _, b in active)
    history = []
    converged = False
    for _ in range(config.maxiter):
        tic = time.perf_counter()
        acc = np.zeros(dims, order="F")
        shrunk = []
        for lab, a, b in active:
            m, nuc = linalg.svt_with_nuclear_norm(unfold(x, lab), a / b)
            shrunk.append((lab, a, b, m, nuc))
            acc += b * fold_(m, lab)
        x_new = acc
        x_new /= beta_sum
        flat = x_new.ravel(order="K")  # F-contiguous: ravel is a view
        flat[mask.offsets] = mask.values
        eps = float(np.linalg.norm((x_new - x).ravel())) / denom
        objective = sum(
            a * nuc + 0.5 * b * float(np.linalg.norm(unfold(x_new, lab) - m) ** 2)
            for lab, a, b, m, nuc in shrunk
        )
        rse = None
        if truth_flat is not None:
            rse = float(np.linalg.norm(flat - truth_flat)) / denom
        history.append(IterRecord(eps, rse, objective, time.perf_counter() - tic))
        x = x_new
        if eps <= config.tol:
            converged = True
            break
    return _finish(x, history, converged, started)


def _check_ranks(config, family, dims, labels):
    if config.ranks is None:
        raise ParameterError("factorization solvers need ranks")
    if len(config.ranks) != len(labels):
        raise ParameterError(
            f"need {len(labels)} ranks for dims {dims} with {family} weights, "
            f"got {len(config.ranks)}"
        )
    for lab, r in zip(labels, config.ranks):
        bound = split_bound(family, dims, lab)
        if r > bound:
            raise ParameterError(
                f"rank {r} exceeds the dimension bound {bound} at split {lab}"
            )


def factor_block_update(xk: np.ndarray, v: np.ndarray):
    """One alternating update of a factorization X_k ~ U V for fixed X_k.

    U is taken as X_k V^T directly; the pseudoinverse of (V V^T) is skipped
    because only the product U V is ever used, and with full-row-rank V the
    product is unchanged. Returns (u, v_new, product).
    """
    u = xk @ v.T
    v_new = linalg.pinv(u.T @ u) @ (u.T @ xk)
    return u, v_new, u @ v_new


def factor_block_update_pinv(xk: np.ndarray, v: np.ndarray):
    """Reference three-step update that keeps the pseudoinverse in the U
    step. Used to validate the shortcut; not on the solver path."""
    u = xk @ v.T @ linalg.pinv(v @ v.T)
    v_new = linalg.pinv(u.T @ u) @ (u.T @ xk)
    return u, v_new, u @ v_new


def _tmac_generic(mask, config, truth, allowed_families) -> CompletionReport:
    started = time.perf_counter()
    w = config.weights
    x, truth_flat, denom = _prepare(mask, config, truth, allowed_families)
    dims = mask.dims
    labels, unfold, fold_ = _split_ops(w.family, dims)
    _check_ranks(config, w.family, dims, labels)
    active = [
        (lab, a, r)
        for lab, a, r in zip(labels, w.alphas, config.ranks)
        if a > 0.0
    ]
    rng = make_rng(config.seed)
    factors_v = {}
    for lab, _a, r in active:
        cols = prod(dims) // (prod(dims[:lab]) if w.family != FAMILY_TUCKER else dims[lab])
        v = gaussian(rng, (r, cols))
        while not np.any(v):  # degenerate draw: restart the stream
            v = gaussian(rng, (r, cols))
        factors_v[lab] = v
    history = []
    converged = False
    for _ in range(config.maxiter):
        tic = time.perf_counter()
        acc = np.zeros(dims, order="F")
        products = []
        for lab, a, _r in active:
            xk = unfold(x, lab)
            _u, v_new, product = factor_block_update(xk, factors_v[lab])
            factors_v[lab] = v_new
            products.append((lab, a, product))
            acc += a * fold_(product, lab)
        x_new = acc
        flat = x_new.ravel(order="K")
        flat[mask.offsets] = mask.values
        eps = float(np.linalg.norm((x_new - x).ravel())) / denom
        objective = sum(
            0.5 * a * float(np.linalg.norm(unfold(x_new, lab) - product) ** 2)
            for lab, a, product in products
        )
        rse = None
        if truth_flat is not None:
            rse = float(np.linalg.norm(flat - truth_flat)) / denom
        history.append(IterRecord(eps, rse, objective, time.perf_counter() - tic))
        x = x_new
        if eps <= config.tol:
            converged = True
            break
    return _finish(x, history, converged, started)


def silrtc_tt(mask, config, truth=None) -> CompletionReport:
    """Thresholding solver over the leading-split matricizations."""
    return _silrtc_generic(mask, config, truth, (FAMILY_TT, FAMILY_SQUARE))


def silrtc(mask, config, truth=None) -> CompletionReport:
    """Thresholding solver over the single-mode matricizations."""
    return _silrtc_generic(mask, config, truth, (FAMILY_TUCKER,))


def tmac_tt(mask, config, truth=None) -> CompletionReport:
    """Factorization solver over the leading-split matricizations."""
    return _tmac_generic(mask, config, truth, (FAMILY_TT, FAMILY_SQUARE))


def tmac(mask, config, truth=None) -> CompletionReport:
    """Factorization solver over the single-mode matricizations."""
    return _tmac_generic(mask, config, truth, (FAMILY_TUCKER,))


# name -> (solver, weight family, needs_ranks)
ALGORITHMS = {
    "silrtc": (silrtc, FAMILY_TUCKER, False),
    "silrtc-square": (silrtc_tt, FAMILY_SQUARE, False),
    "silrtc-tt": (silrtc_tt, FAMILY_TT, False),
    "tmac": (tmac, FAMILY_TUCKER, True),
    "tmac-square": (tmac_tt, FAMILY_SQUARE, True),
    "tmac-tt": (tmac_tt, FAMILY_TT, True),
}


def algorithm_family(name: str) -> str:
    if name not in ALGORITHMS:
        raise ParameterError(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}")
    return ALGORITHMS[name][1]


def needs_ranks(name: str) -> bool:
    if name not in ALGORITHMS:
        raise ParameterError(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}")
    return ALGORITHMS[name][2]


def capped_ranks(name: str, dims, rank) -> tuple[int, ...]:
    """Uniform target rank clipped to each split's dimension bound."""
    family = algorithm_family(name)
    labels = (
        list(range(len(dims))) if family == FAMILY_TUCKER else list(range(1, len(dims)))
    )
    return tuple(min(int(rank), split_bound(family, dims, lab)) for lab in labels)


def run_algorithm(
    name: str,
    mask: ObservationMask,
    *,
    ranks=None,
    f: float | None = None,
    tol: float = 1e-4,
    maxiter: int = 1000,
    seed: int = 0,
    init: str = "zero",
    truth: DenseTensor | None = None,
) -> CompletionReport:
    """Dispatch a completion run by algorithm name.

    The name fixes both the solver and its weight family; ``f`` feeds the
    thresholding solvers, ``ranks`` the factorization ones.
    """
    if name not in ALGORITHMS:
        raise ParameterError(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}")
    solver, family, wants_ranks = ALGORITHMS[name]
    if wants_ranks and ranks is None:
        raise ParameterError(f"{name} needs ranks")
    if not wants_ranks and f is None:
        f = 0.1
    weights = make_weights(family, mask.dims, f=f)
    config = SolverConfig(
        weights=weights,
        ranks=tuple(ranks) if ranks is not None else None,
        tol=tol,
        maxiter=maxiter,
        seed=seed,
        init=init,
    )
    return solver(mask, config, truth)
