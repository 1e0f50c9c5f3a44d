"""Command-line interface: ``hodgewalk <subcommand> --complex FILE ...``."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import algebra, io, walks
from .montecarlo import SimulationConfig, agreement_fraction, exact_marginals, simulate
from .propagation import LabelProblem, flow_field, propagate
from .render import render_svg


def _load_complex(path):
    with open(path, encoding="utf-8") as fh:
        return io.parse_complex(fh.read())


def _start(text, k):
    if text is None:
        raise ValueError("--start is required, e.g. --start \"0 1\"")
    try:
        verts = [int(t) for t in text.split()]
    except ValueError:
        raise ValueError(f"--start must list vertex ids, got {text!r}") from None
    if len(verts) != k + 1:
        raise ValueError(f"--start must name a {k}-simplex ({k + 1} vertices), got {len(verts)}")
    return verts


def _info(c, args):
    out = {
        "dimension": c.dimension,
        "counts": list(c.shape),
        "vertices": c.vertices,
        "max_face_degree": {str(k): c.max_face_degree(k) for k in range(1, c.dimension + 1)},
        "components": {str(k): len(c.k_connected_components(k)) for k in range(1, c.dimension + 1)},
        "disorientable": {str(k): all(c.disorientation(comp) is not None for comp in c.k_connected_components(k))
                          for k in range(1, c.dimension + 1)},
    }
    if args.format == "csv":
        rows = [(k, c.n_simplices(k), out["max_face_degree"].get(str(k), ""),
                 out["components"].get(str(k), ""), out["disorientable"].get(str(k), ""))
                for k in range(c.dimension + 1)]
        return io.table_csv(["k", "simplices", "M", "components", "disorientable"], rows)
    return io.dumps_json(out)


def _laplacian(c, args):
    L = algebra.laplacian(c, args.k, args.part)
    names = io.basis_names(c, args.k)
    if args.format == "csv":
        return io.matrix_csv(L, names)
    return io.dumps_json({"k": args.k, "part": args.part, "basis": names, "matrix": L.toarray()})


def _spectrum(c, args):
    s = algebra.spectral_summary(algebra.laplacian(c, args.k, "full"), c, args.k)
    down = algebra.spectral_summary(algebra.laplacian(c, args.k, "down")) if args.k >= 1 else None
    lam = algebra.smallest_nontrivial_eigenvalue(c, args.k) if args.k >= 1 else None
    out = {"k": args.k, "eigenvalues": s.eigenvalues, "betti": s.kernel_dim, "lambda_k": lam}
    if down is not None:
        out["down_eigenvalues"] = down.eigenvalues
    if args.format == "csv":
        return io.table_csv(["index", "eigenvalue"], list(enumerate(s.eigenvalues)))
    return io.dumps_json(out)


def _walk(c, args):
    ev = walks.dirichlet_evolution(c, args.k, args.p, _start(args.start, args.k), args.steps, mode=args.mode)
    names = io.basis_names(c, args.k)
    if args.format == "csv":
        return io.table_csv(["step"] + names, [[t] + list(row) for t, row in enumerate(ev.trace)])
    out = {"k": args.k, "p": args.p, "mode": args.mode, "basis": names, "trace": ev.trace}
    if ev.limit is not None:
        out["limit"] = ev.limit
    return io.dumps_json(out)


def _limit(c, args):
    walks.check_dirichlet_convergence(c, args.k, args.p)
    out = {"k": args.k, "p": args.p, "basis": io.basis_names(c, args.k)}
    if args.start is not None:
        out["start"] = _start(args.start, args.k)
        out["limit"] = walks.marginal_difference_limit(c, args.k, out["start"], args.p)
    out["homology_rank"] = walks.homology_rank_from_walks(c, args.k, args.p)
    out["betti"] = algebra.betti(c, args.k)
    if args.format == "csv":
        if "limit" not in out:
            raise ValueError("csv output of limit needs --start")
        return io.table_csv(["basis", "limit"], list(zip(out["basis"], out["limit"])))
    return io.dumps_json(out)


def _simulate(c, args):
    start = _start(args.start, args.k)
    if args.mode == "dirichlet":
        P = walks.dirichlet_transition_matrix(c, args.k, args.p)
    else:
        P = walks.neumann_transition_matrix(c, args.k, args.p)
    s0 = walks.state_index(c, args.k, start)
    cfg = SimulationConfig(n_steps=args.steps, n_trajectories=args.trajectories, master_seed=args.seed, initial=s0)
    emp = simulate(P, cfg)
    exact = exact_marginals(P, s0, args.steps)
    names = walks.state_labels(c, args.k)
    if args.format == "csv":
        rows = zip(names, emp.frequencies(), exact[-1], emp.standard_errors())
        return io.table_csv(["state", "empirical", "exact", "standard_error"], rows)
    return io.dumps_json({
        "k": args.k, "p": args.p, "mode": args.mode, "seed": args.seed, "steps": args.steps,
        "states": names, "empirical": emp.to_dict(), "exact": exact[-1],
        "agreement_3se": agreement_fraction(emp, exact, range(args.steps + 1)),
    })


def _label_problem(c, args):
    if args.labels is None:
        raise ValueError("--labels is required")
    with open(args.labels, encoding="utf-8") as fh:
        edges, classes = io.parse_labels(fh.read(), c)
    return LabelProblem.from_oriented(c, edges, classes, operator=args.operator, p=args.p, n_iter=args.iters)


def _propagate(c, args):
    res = propagate(_label_problem(c, args))
    if args.format == "csv":
        header = ["basis"] + [f"class{i + 1}" for i in range(res.confidences.shape[0])] + ["assignment"]
        rows = [[name, *res.confidences[:, i], int(res.assignment[i])]
                for i, name in enumerate(io.basis_names(c, 1))]
        return io.table_csv(header, rows)
    return io.dumps_json(res.to_dict())


def _render(c, args):
    if args.labels is not None:
        return render_svg(c, flow_field(propagate(_label_problem(c, args))))
    if args.cochain is not None:
        try:
            f = [float(t) for t in args.cochain.split()]
        except ValueError:
            raise ValueError(f"--cochain must list numbers, got {args.cochain!r}") from None
        return render_svg(c, np.array(f))
    raise ValueError("render needs --labels FILE or --cochain \"v1 v2 ...\"")


COMMANDS = {
    "info": _info, "laplacian": _laplacian, "spectrum": _spectrum, "walk": _walk, "limit": _limit,
    "simulate": _simulate, "propagate": _propagate, "render": _render,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--complex", required=True, metavar="FILE", help=".scx complex file")
    common.add_argument("--k", type=int, default=1)
    common.add_argument("--p", type=float, default=0.5, help="lazy probability")
    common.add_argument("--out", metavar="FILE", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="hodgewalk", description="Random walks and Laplacians on simplicial complexes.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("info", parents=[common], help="simplex counts, degrees, components")
    lap = sub.add_parser("laplacian", parents=[common], help="k-Laplacian matrix")
    lap.add_argument("--part", choices=("up", "down", "full"), default="full")
    sub.add_parser("spectrum", parents=[common], help="eigenvalues, lambda_k and betti number")
    for name in ("walk", "simulate"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--mode", choices=("dirichlet", "neumann"), default="dirichlet")
        p.add_argument("--start", help='starting oriented simplex, e.g. "0 1"')
        p.add_argument("--steps", type=int, default=20)
        if name == "simulate":
            p.add_argument("--trajectories", type=int, default=100_000)
    lim = sub.add_parser("limit", parents=[common], help="walk limit and homology rank")
    lim.add_argument("--start", help='starting oriented simplex, e.g. "0 1"')
    sub.add_parser("homology", parents=[common], help="betti number and walk-based homology rank")
    for name in ("propagate", "render"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--labels", metavar="FILE", help=".lbl label file")
        p.add_argument("--operator", choices=("up", "down", "full"), default="full")
        p.add_argument("--iters", type=int, default=1000)
        if name == "render":
            p.add_argument("--cochain", help="edge cochain values in basis order")
    return parser


def _homology(c, args):
    out = {"k": args.k, "betti": algebra.betti(c, args.k),
           "homology_rank": walks.homology_rank_from_walks(c, args.k, args.p)}
    if args.format == "csv":
        return io.table_csv(["k", "betti", "homology_rank"], [(args.k, out["betti"], out["homology_rank"])])
    return io.dumps_json(out)


COMMANDS["homology"] = _homology


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        c = _load_complex(args.complex)
        text = COMMANDS[args.command](c, args)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"hodgewalk: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"hodgewalk: error: {str(exc).splitlines()[0] if str(exc) else type(exc).__name__}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
