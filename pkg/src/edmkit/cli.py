"""Command-line surface: completion, embedding, scoring and benchmarks.

Exit codes: 0 success, 2 bad configuration or invalid input values,
3 unreadable or malformed files, 4 disconnected initializer graph,
5 solver non-convergence.
"""

import argparse
import os
import sys
import time

import numpy as np

from . import bench, fileio, graphinit, model, sampling
from .graphinit import GraphDisconnectedError
from .linalg import cmds_embed, edm_score, numerical_rank, spectrum_of, double_center
from .nearest_edm import ProjectionError

EXIT_OK = 0
EXIT_BAD_CONFIG = 2
EXIT_IO = 3
EXIT_DISCONNECTED = 4
EXIT_SOLVER = 5


class InputFormatError(ValueError):
    pass


def _build_parser():
    p = argparse.ArgumentParser(
        prog="edmkit",
        description="Distance-matrix completion and low-dimensional embedding "
        "from partial, noisy pairwise distances.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add_model_flags(sp):
        sp.add_argument("--rho1", type=float, default=None, help="spectral penalty size")
        sp.add_argument("--rho2", type=float, default=1.0, help="subspace weight (0, 1 or 2)")
        sp.add_argument("--c-rho", type=float, default=1.0, dest="c_rho")
        sp.add_argument("--kappa", type=float, default=2.0)
        sp.add_argument("--rank", type=int, default=2, help="target embedding rank")
        sp.add_argument("--tol", type=float, default=1e-3)
        sp.add_argument("--max-iter", type=int, default=2000, dest="max_iter")

    def add_sampling_flags(sp):
        sp.add_argument("--rule", choices=("uniform", "knn", "ball"), default="uniform")
        sp.add_argument("--m", type=str, default=None, help="sample count (or fraction < 1)")
        sp.add_argument("--k", type=int, default=None, help="neighbor count for --rule knn")
        sp.add_argument("--eps", type=float, default=None, help="radius for --rule ball")
        sp.add_argument("--noise", choices=sampling.NOISE_KINDS, default="gaussian")

    c = sub.add_parser("complete", help="solve the estimator end to end")
    c.add_argument("--input", required=True)
    c.add_argument("--output", required=True, help="output directory")
    c.add_argument(
        "--format",
        choices=("auto", "obs", "counts", "graph", "matrix"),
        default="auto",
        help="input kind; 'matrix' samples observations from a ground-truth matrix",
    )
    c.add_argument("--eta", type=float, default=None, help="noise scale (estimated if absent)")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--verbose", action="store_true")
    add_model_flags(c)
    add_sampling_flags(c)

    e = sub.add_parser("embed", help="classical-scaling embedding of a matrix file")
    e.add_argument("--input", required=True)
    e.add_argument("--output", required=True, help="output directory")
    e.add_argument("--dim", type=int, default=2, help="embedding dimension")
    e.add_argument("--verbose", action="store_true")

    s = sub.add_parser("score", help="variance scores and numerical rank of a matrix file")
    s.add_argument("--input", required=True)

    bb = sub.add_parser("bench-bound", help="recovery error vs sample size")
    bb.add_argument("--n", type=int, default=80)
    bb.add_argument("--rank", type=int, default=2)
    bb.add_argument("--eta", type=float, default=0.05)
    bb.add_argument("--m", type=str, default="0.1,0.2,0.4", help="comma list, fractions or counts")
    bb.add_argument("--trials", type=int, default=20)
    bb.add_argument("--seed", type=int, default=0)
    bb.add_argument(
        "--initializer",
        default="0.3",
        help="'pipeline', 'oracle', or a perturbation fraction (fixed-quality default)",
    )
    bb.add_argument("--output", required=True, help="CSV table path")

    ba = sub.add_parser("bench-alpha", help="subspace-weight ordering and comparison")
    ba.add_argument("--n", type=int, default=30)
    ba.add_argument("--rank", type=int, default=2)
    ba.add_argument("--delta", type=str, default="0.1,0.3,0.6", help="perturbation fractions")
    ba.add_argument("--trials", type=int, default=100)
    ba.add_argument("--eta", type=float, default=0.1)
    ba.add_argument("--seed", type=int, default=0)
    ba.add_argument("--output", required=True, help="CSV table path")
    return p


def _sniff_format(path):
    """Observation files have a 'n m eta' header whose m matches the row count."""
    with open(path) as fh:
        first = fh.readline().split()
        rest = sum(1 for ln in fh if ln.strip())
    if len(first) == 1 and first[0].startswith("n="):
        return "matrix"
    if len(first) == 3:
        try:
            n, m = int(first[0]), int(first[1])
            float(first[2])
        except ValueError:
            raise InputFormatError(f"{path}: cannot determine input format")
        if m == rest and n >= 2:
            return "obs"
        return "counts"
    raise InputFormatError(f"{path}: cannot determine input format")


def _read(reader, path):
    """Run a file reader, mapping malformed-content errors to I/O failures."""
    try:
        return reader(path)
    except ValueError as exc:
        raise InputFormatError(str(exc)) from exc


def _load_complete_input(args):
    """Return (obs, kept_indices or None) for the complete command."""
    fmt = args.format
    if fmt == "auto":
        fmt = _sniff_format(args.input)
    if fmt == "obs":
        return _read(sampling.read_observations, args.input), None
    if fmt in ("counts", "graph"):
        if fmt == "counts":
            counts = _read(graphinit.read_counts, args.input)
            raw = graphinit.jaccard_dissimilarity(counts)
        else:
            raw = _read(graphinit.read_distance_graph, args.input)
        graph, kept = graphinit.strip_isolated(raw)
        eta = args.eta if args.eta is not None else 0.0
        obs = sampling.ObservationSet(
            n=graph.n, pairs=graph.edges, y=graph.weights, eta=eta
        )
        return obs, (kept if kept.shape[0] != raw.n else None)
    # matrix: sample observations from a ground-truth squared-distance matrix
    d_true = _read(fileio.read_matrix, args.input)
    n = d_true.shape[0]
    dist = np.sqrt(np.maximum(d_true, 0.0))
    if args.rule == "uniform":
        if args.m is None:
            raise InputFormatError("--rule uniform needs --m")
        m = bench.resolve_sample_sizes(n, [float(args.m)])[0]
        pairs = sampling.sample_uniform(n, m, args.seed)
    elif args.rule == "knn":
        if args.k is None:
            raise InputFormatError("--rule knn needs --k")
        pairs = sampling.sample_knn(dist, args.k)
    else:
        if args.eps is None:
            raise InputFormatError("--rule ball needs --eps")
        pairs = sampling.sample_unit_ball(dist, args.eps)
    eta = args.eta if args.eta is not None else 0.0
    noise = sampling.NoiseSpec(kind=args.noise, seed=args.seed)
    return sampling.observe(pairs, d_true, eta, noise), None


def _score_list(spectrum, n):
    return [edm_score(spectrum, k) for k in range(1, min(10, n) + 1)]


def _cmd_complete(args):
    obs, kept = _load_complete_input(args)
    params = model.ModelParams(
        rank=args.rank,
        rho1=args.rho1,
        rho2=args.rho2,
        kappa=args.kappa,
        c_rho=args.c_rho,
        eta=args.eta,
        tol=args.tol,
        max_iter=args.max_iter,
    )
    log = sys.stderr if args.verbose else None
    report, d_init, params = bench.solve_observations(obs, params, log=log)

    os.makedirs(args.output, exist_ok=True)
    fileio.write_matrix(os.path.join(args.output, "dstar.csv"), report.d_star)
    spec = spectrum_of(-0.5 * double_center(report.d_star))
    fileio.write_spectrum(os.path.join(args.output, "spectrum.csv"), spec.eigenvalues)
    if kept is not None:
        with open(os.path.join(args.output, "kept_indices.txt"), "w") as fh:
            fh.write("\n".join(str(int(i)) for i in kept) + "\n")
        print(f"stripped isolated vertices; kept {kept.shape[0]} of the original actors")
    fileio.write_report(
        os.path.join(args.output, "report.json"),
        {
            "n": obs.n,
            "m": obs.m,
            "rank": params.rank,
            "rho1": params.rho1,
            "rho2": params.rho2,
            "iterations": report.iterations,
            "R_p": report.r_p,
            "R_d": report.r_d,
            "edm_scores": _score_list(spec, obs.n),
            "wall_seconds": report.wall_seconds,
        },
    )
    print(
        f"solved n={obs.n} m={obs.m}: iterations={report.iterations} "
        f"R_p={report.r_p:.3e} R_d={report.r_d:.3e} converged={report.converged}"
    )
    return EXIT_OK if report.converged else EXIT_SOLVER


def _cmd_embed(args):
    d = _read(fileio.read_matrix, args.input)
    t0 = time.perf_counter()
    emb = cmds_embed(d, args.dim)
    os.makedirs(args.output, exist_ok=True)
    fileio.write_coords(os.path.join(args.output, "coords.csv"), emb.points)
    fileio.write_spectrum(
        os.path.join(args.output, "spectrum.csv"), emb.spectrum.eigenvalues
    )
    n = d.shape[0]
    fileio.write_report(
        os.path.join(args.output, "report.json"),
        {
            "n": n,
            "m": 0,
            "rank": numerical_rank(emb.spectrum),
            "rho1": None,
            "rho2": None,
            "iterations": 0,
            "R_p": None,
            "R_d": None,
            "edm_scores": _score_list(emb.spectrum, n),
            "wall_seconds": time.perf_counter() - t0,
        },
    )
    print(f"embedded {n} points into {args.dim} dimensions")
    return EXIT_OK


def _cmd_score(args):
    d = _read(fileio.read_matrix, args.input)
    spec = spectrum_of(-0.5 * double_center(d))
    n = d.shape[0]
    for k in range(1, min(10, n) + 1):
        print(f"EDMscore({k}) = {edm_score(spec, k):.6f}")
    print(f"numerical rank = {numerical_rank(spec)}")
    return EXIT_OK


def _cmd_bench_bound(args):
    m_values = [float(v) for v in args.m.split(",") if v]
    init = args.initializer
    if init not in ("pipeline", "oracle"):
        init = float(init)
    result = bench.run_bound_bench(
        args.n, args.rank, m_values, args.eta, args.trials, base_seed=args.seed,
        initializer=init,
    )
    with open(args.output, "w") as fh:
        fh.write("n,r,m,eta,seed,per_entry_error,edm_score_r,iterations,wall_seconds,converged\n")
        for rec in result.records:
            fh.write(
                f"{rec.n},{rec.r},{rec.m},{rec.eta:.17g},{rec.seed},"
                f"{rec.per_entry_error:.17g},{rec.edm_score_r:.17g},"
                f"{rec.iterations},{rec.wall_seconds:.17g},{int(rec.converged)}\n"
            )
    for m, med in zip(result.m_values, result.median_errors):
        print(f"m={m}: median per-entry error = {med:.6e}")
    print(f"log-log slope of error vs m: {result.slope:.3f}")
    return EXIT_OK


def _cmd_bench_alpha(args):
    fracs = [float(v) for v in args.delta.split(",") if v]
    result = bench.run_alpha_bench(
        args.n, args.rank, fracs, args.trials, base_seed=args.seed, eta=args.eta
    )
    with open(args.output, "w") as fh:
        fh.write("delta_frac,trial,precondition_met,mismatch0,mismatch1,mismatch2,holds\n")
        for frac, t, res in result.ordering_rows:
            verdict = "" if res.holds is None else int(res.holds)
            fh.write(
                f"{frac:.17g},{t},{int(res.precondition_met)},"
                f"{res.mismatch0:.17g},{res.mismatch1:.17g},{res.mismatch2:.17g},{verdict}\n"
            )
    print(
        f"weight-1 strictly best on {result.holds_count}/{result.checked_count} "
        f"instances inside the guarantee region"
    )
    for rho2, err in sorted(result.recovery_errors.items()):
        print(f"rho2={rho2:g}: per-entry recovery error = {err:.6e}")
    return EXIT_OK


_COMMANDS = {
    "complete": _cmd_complete,
    "embed": _cmd_embed,
    "score": _cmd_score,
    "bench-bound": _cmd_bench_bound,
    "bench-alpha": _cmd_bench_alpha,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except GraphDisconnectedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DISCONNECTED
    except (ProjectionError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InputFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    sys.exit(main())
