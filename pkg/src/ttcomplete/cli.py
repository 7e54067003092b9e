"""Command line interface.

Subcommands: complete, synth-experiment, image-experiment, phase-diagram,
ka, info. Experiment commands write a CSV table plus a rendered figure;
recovered tensors and images land next to them. All commands are
deterministic under a fixed --seed; wall-clock timings are only written
into CSVs when --timings wall is given, so default outputs are
byte-reproducible.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import augment, experiments, io_formats, metrics, plots, solvers, synth
from .errors import TtcError, ParameterError
from .mask import ObservationMask
from .rng import derive_seed
from .tensor import DenseTensor

COMPLETE_COLUMNS = (
    "mr", "algorithm", "rse", "iterations", "seconds", "eps_final", "converged", "f", "seed",
)
EXPERIMENT_COLUMNS = COMPLETE_COLUMNS + ("form", "error")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(tok.strip() for tok in text.split(",") if tok.strip())


def _default_jobs() -> int:
    env = os.environ.get("TTC_JOBS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _add_solver_flags(sub, *, with_ranks=True):
    sub.add_argument("--f", default="0.1",
                     help="beta multiplier for the thresholding solvers, or 'auto' to sweep %s"
                     % (solvers.F_GRID,))
    sub.add_argument("--tol", type=float, default=1e-4, help="relative-change stop threshold")
    sub.add_argument("--maxiter", type=int, default=1000, help="iteration cap")
    sub.add_argument("--seed", type=int, default=0, help="base seed for all random streams")
    sub.add_argument("--init", choices=("zero", "mean"), default="zero",
                     help="fill for missing entries in the starting tensor")
    if with_ranks:
        sub.add_argument("--ranks", type=_int_list, default=None,
                         help="comma-separated factorization ranks (tmac family)")


def _add_output_flags(sub):
    sub.add_argument("--out", required=True, help="output path prefix")
    sub.add_argument("--timings", choices=("none", "wall"), default="none",
                     help="write wall-clock seconds into the CSV (breaks byte-reproducibility)")
    sub.add_argument("--jobs", type=int, default=_default_jobs(),
                     help="worker pool size for sweeps (default: TTC_JOBS or 1)")


def _scrub_rows(rows, timings: str):
    if timings == "wall":
        return rows
    out = []
    for row in rows:
        row = dict(row)
        row["seconds"] = None
        out.append(row)
    return out


def _check_algorithms(names) -> None:
    for name in names:
        if name not in solvers.ALGORITHMS:
            raise ParameterError(
                f"unknown algorithm {name!r}; choose from {', '.join(sorted(solvers.ALGORITHMS))}"
            )


def _load_image_tensor(spec: str) -> DenseTensor:
    """An --image argument: a PPM path, 'sample', or 'sample:<side>'."""
    if spec == "sample" or spec.startswith("sample:"):
        side = 256
        if ":" in spec:
            side = int(spec.split(":", 1)[1])
        return synth.sample_image(side)
    return io_formats.read_ppm(spec).to_tensor()


def cmd_complete(args) -> int:
    _check_algorithms([args.algo])
    truth = None
    wrote_image = False
    if args.tensor:
        if not args.mask:
            raise ParameterError("--tensor input needs --mask")
        mask = io_formats.read_mask(args.mask)
        if args.truth:
            truth = io_formats.read_tensor(args.truth)
    elif args.image:
        truth = _load_image_tensor(args.image)
        if args.text is not None:
            mask = synth.text_mask(truth, args.text)
        elif args.mr is not None:
            mask = synth.gen_mask(truth, args.mr, derive_seed(args.seed, 100))
        else:
            raise ParameterError("--image input needs --mr or --text")
        wrote_image = True
    else:
        raise ParameterError("give either --tensor/--mask or --image")

    run_mask, run_truth = mask, truth
    if args.ka:
        if not wrote_image:
            raise ParameterError("--ka applies to image inputs")
        run_truth = augment.ka_forward(truth)
        run_mask = augment.ka_mask(mask)

    ranks = args.ranks
    if solvers.needs_ranks(args.algo) and ranks is None:
        if not wrote_image:
            raise ParameterError(f"{args.algo} needs --ranks")
        target = experiments.default_image_rank(run_mask.dims, "ka" if args.ka else "raw")
        ranks = solvers.capped_ranks(args.algo, run_mask.dims, target)

    report, f_used = experiments.run_swept(
        args.algo, run_mask, ranks=ranks, fs=experiments.f_values(args.f),
        tol=args.tol, maxiter=args.maxiter, seed=args.seed, init=args.init,
        truth=run_truth,
    )

    recovered = report.recovered
    if args.ka:
        recovered = augment.ka_inverse(recovered)
    if wrote_image:
        out_data = args.out + ".ppm"
        io_formats.write_ppm(io_formats.ImageBuffer.from_tensor(recovered), out_data)
    else:
        out_data = args.out + ".dtns"
        io_formats.write_tensor(recovered, out_data)

    rse_val = report.final_rse
    if wrote_image and truth is not None:
        rse_val = metrics.rse(recovered, truth)
    row = {
        "mr": mask.missing_ratio,
        "algorithm": args.algo,
        "rse": rse_val,
        "iterations": report.iterations,
        "seconds": report.wall_time,
        "eps_final": report.final_eps,
        "converged": int(report.converged),
        "f": f_used,
        "seed": args.seed,
    }
    io_formats.write_result_csv(
        args.out + ".csv", _scrub_rows([row], args.timings), COMPLETE_COLUMNS
    )
    print(f"wrote {out_data} and {args.out}.csv "
          f"(iterations={report.iterations}, converged={report.converged})")
    return 0 if report.converged else 2


def cmd_synth_experiment(args) -> int:
    _check_algorithms(args.algos)
    rows = experiments.synth_experiment(
        args.dims, args.ranks, args.family, args.mr, args.algos,
        replicates=args.replicates, base_seed=args.seed, f=args.f,
        tol=args.tol, maxiter=args.maxiter, init=args.init, jobs=args.jobs,
    )
    rows.sort(key=lambda r: (r["algorithm"], r["mr"], r["seed"]))
    io_formats.write_result_csv(
        args.out + ".csv", _scrub_rows(rows, args.timings), EXPERIMENT_COLUMNS
    )
    plots.plot_rse_curves(
        rows, args.out + ".png",
        title=f"{args.family} truth {'x'.join(map(str, args.dims))}, ranks {args.ranks}",
    )
    print(f"wrote {args.out}.csv and {args.out}.png ({len(rows)} runs)")
    return 0


def cmd_image_experiment(args) -> int:
    _check_algorithms(args.algos)
    image = _load_image_tensor(args.image)
    forms = ("raw", "ka") if args.ka == "both" else (
        ("ka",) if args.ka == "with" else ("raw",)
    )
    rows, recovered = experiments.image_experiment(
        image,
        mrs=args.mr if args.text is None else None,
        text=args.text,
        forms=forms,
        algorithms=args.algos,
        f=args.f, tol=args.tol, maxiter=args.maxiter, base_seed=args.seed,
        init=args.init, jobs=args.jobs,
        raw_rank=args.raw_rank, ka_rank=args.ka_rank,
    )
    rows.sort(key=lambda r: (str(r["mr"]), r["algorithm"], r["form"]))
    io_formats.write_result_csv(
        args.out + ".csv", _scrub_rows(rows, args.timings), EXPERIMENT_COLUMNS
    )
    plots.plot_image_report(rows, args.out + ".png", title="image completion")
    for (name, form, label), tensor in sorted(recovered.items(), key=str):
        tag = label if isinstance(label, str) else f"mr{label:g}"
        path = f"{args.out}_{name}_{form}_{tag}.ppm"
        io_formats.write_ppm(io_formats.ImageBuffer.from_tensor(tensor), path)
    print(f"wrote {args.out}.csv, {args.out}.png, and {len(recovered)} recovered images")
    return 0


def cmd_phase_diagram(args) -> int:
    _check_algorithms([args.algo])
    diagram = metrics.phase_grid(
        args.algo, args.dims, args.rank_axis, args.mr_axis,
        truth_kind=args.family, eps=args.epsilon, replicates=args.replicates,
        base_seed=args.seed, f=float(args.f) if args.f != "auto" else 0.1,
        tol=args.tol, maxiter=args.maxiter, init=args.init, jobs=args.jobs,
    )
    diagram.to_csv(args.out + ".csv")
    diagram.to_pgm(args.out + ".pgm")
    plots.plot_phase_diagram(
        diagram, args.out + ".png",
        title=f"{args.algo} on {args.family} truth {'x'.join(map(str, args.dims))}",
    )
    print(f"wrote {args.out}.csv, {args.out}.pgm, {args.out}.png")
    return 0


def cmd_ka(args) -> int:
    if args.direction == "forward":
        image = _load_image_tensor(args.image)
        out = args.out + ".dtns"
        io_formats.write_tensor(augment.ka_forward(image), out)
    else:
        tensor = io_formats.read_tensor(args.tensor)
        out = args.out + ".ppm"
        io_formats.write_ppm(
            io_formats.ImageBuffer.from_tensor(augment.ka_inverse(tensor)), out
        )
    print(f"wrote {out}")
    return 0


def cmd_info(args) -> int:
    if args.tensor:
        x = io_formats.read_tensor(args.tensor)
        source = args.tensor
    elif args.image:
        x = _load_image_tensor(args.image)
        source = args.image
    else:
        raise ParameterError("give --tensor or --image")
    print(f"source: {source}")
    print(f"dims: {'x'.join(map(str, x.dims))} ({x.size} entries)")
    print(f"frobenius norm: {float(np.linalg.norm(x.values)):.10g}")
    print(f"tucker rank profile (tol {args.tol:g}): {metrics.tucker_rank_profile(x, args.tol)}")
    if x.order >= 2:
        print(f"tt rank profile (tol {args.tol:g}): {metrics.tt_rank_profile(x, args.tol)}")
        entropies = metrics.split_entropies(x)
        pretty = ", ".join(f"{s:.6g}" for s in entropies)
        print(f"split entropies (bits): {pretty}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ttc",
        description="Low-rank tensor completion via tensor-train matricizations.",
    )
    subs = parser.add_subparsers(dest="command")

    p = subs.add_parser("complete", help="complete one tensor or image")
    p.add_argument("--algo", required=True,
                   help="one of: " + ", ".join(sorted(solvers.ALGORITHMS)))
    p.add_argument("--tensor", help="DTNS tensor file with observed entries")
    p.add_argument("--mask", help="DMSK observation mask file")
    p.add_argument("--truth", help="optional ground-truth DTNS file for RSE reporting")
    p.add_argument("--image", help="PPM image path, 'sample', or 'sample:<side>'")
    p.add_argument("--mr", type=float, help="random missing ratio for image input")
    p.add_argument("--text", help="text overlay mask for image input")
    p.add_argument("--ka", action="store_true",
                   help="complete the augmented form of an image input")
    _add_solver_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_complete)

    p = subs.add_parser("synth-experiment", help="RSE vs missing ratio on synthetic tensors")
    p.add_argument("--dims", type=_int_list, required=True)
    p.add_argument("--ranks", type=_int_list, required=True,
                   help="generation ranks of the synthetic truth")
    p.add_argument("--family", choices=("tt", "tucker"), default="tt",
                   help="synthetic ground-truth family")
    p.add_argument("--mr", type=_float_list, required=True, help="missing ratios")
    p.add_argument("--algos", type=_str_list, default=experiments.ALL_ALGORITHMS)
    p.add_argument("--replicates", type=int, default=1, help="instances per cell")
    _add_solver_flags(p, with_ranks=False)
    _add_output_flags(p)
    p.set_defaults(func=cmd_synth_experiment)

    p = subs.add_parser("image-experiment", help="image completion with and without augmentation")
    p.add_argument("--image", required=True, help="PPM path, 'sample', or 'sample:<side>'")
    p.add_argument("--mr", type=_float_list, help="random missing ratios")
    p.add_argument("--text", help="text overlay mask instead of random missing entries")
    p.add_argument("--ka", choices=("with", "without", "both"), default="both")
    p.add_argument("--algos", type=_str_list, default=experiments.ALL_ALGORITHMS)
    p.add_argument("--raw-rank", type=int, default=None,
                   help="target factorization rank on the raw tensor")
    p.add_argument("--ka-rank", type=int, default=None,
                   help="target factorization rank on the augmented tensor")
    _add_solver_flags(p, with_ranks=False)
    p.set_defaults(init="mean")
    _add_output_flags(p)
    p.set_defaults(func=cmd_image_experiment)

    p = subs.add_parser("phase-diagram", help="success grid over rank and missing ratio")
    p.add_argument("--algo", required=True)
    p.add_argument("--dims", type=_int_list, required=True)
    p.add_argument("--rank-axis", type=_int_list, required=True)
    p.add_argument("--mr-axis", type=_float_list, required=True)
    p.add_argument("--family", choices=("tt", "tucker"), default="tt")
    p.add_argument("--epsilon", type=float, default=1e-2, help="success threshold on RSE")
    p.add_argument("--replicates", type=int, default=1)
    _add_solver_flags(p, with_ranks=False)
    _add_output_flags(p)
    p.set_defaults(func=cmd_phase_diagram)

    p = subs.add_parser("ka", help="ket augmentation utility")
    p.add_argument("direction", choices=("forward", "inverse"))
    p.add_argument("--image", help="input for forward")
    p.add_argument("--tensor", help="input for inverse")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ka)

    p = subs.add_parser("info", help="tensor, rank, and entropy report")
    p.add_argument("--tensor")
    p.add_argument("--image")
    p.add_argument("--tol", type=float, default=1e-9, help="rank tolerance")
    p.set_defaults(func=cmd_info)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) is None:
        parser.print_help()
        return 1
    try:
        return args.func(args)
    except TtcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, ParameterError) and "unknown algorithm" in str(exc):
            print(parser.format_usage(), file=sys.stderr, end="")
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
