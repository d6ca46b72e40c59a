"""Command-line front end.

Subcommands: effective | sample | export-ctg | export-gamma | verify |
cheeger | perturb | gi-reduce.  All randomness flows through one Philox
counter-based generator keyed by --seed, so identical invocations produce
identical bytes.  Exit codes: 0 success, 1 parse/validation failure,
2 non-convergence, 3 internal inconsistency, 4 cap exceeded,
64 usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import jsonio
from .canon import kernel_backend
from .effective import (
    Pipeline,
    class_distribution,
    ground_state,
    effective_hamiltonian,
    sample as run_sample,
)
from .errors import (
    CapExceededError,
    ConvergenceError,
    HamiltonianSyntaxError,
    InternalInconsistencyError,
    StoqsymError,
)
from .model import (
    Hamiltonian,
    parse_hamiltonian,
    parse_support,
    render_support,
    validate_stoquastic,
)
from .oracle import (
    cheeger_ratio,
    dense_hamiltonian,
    exact_ground,
    gi_reduction,
    naive_isomorphic,
    perturbation_bound,
    simple_graph,
    verify_effective,
)
from .termgraph import attach_assignment, build_shared

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NONCONVERGENCE = 2
EXIT_INCONSISTENT = 3
EXIT_CAP = 4
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    input_path: Optional[str]
    seed: int
    shots: int
    tol: float
    max_iter: int
    dense_cap: int
    orbit_cap: int
    threads: int
    fmt: Optional[str]


def _build_parser() -> _Parser:
    parser = _Parser(prog="stoqsym", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("input", help="Hamiltonian text file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--shots", type=int, default=0)
        p.add_argument("--tol", type=float, default=1e-12)
        p.add_argument("--max-iter", type=int, default=10**6)
        p.add_argument("--dense-cap", type=int, default=12)
        p.add_argument("--orbit-cap", type=int, default=1 << 20)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--format", dest="fmt", choices=["json", "dot", "text"])

    common(sub.add_parser("effective", help="representatives, reduced operator, ground state"))
    common(sub.add_parser("sample", help="seeded measurement samples"))
    p = sub.add_parser("export-ctg", help="gadget graph as DOT or JSON")
    common(p)
    p.add_argument("--assignment", help="mark one basis state (bitstring)")
    common(sub.add_parser("export-gamma", help="explicit hypercube as DOT (n <= 5)"))
    common(sub.add_parser("verify", help="dense-oracle diagnostics for the pipeline"))
    p = sub.add_parser("cheeger", help="weighted edge-expansion ratio of a subset")
    common(p)
    p.add_argument("--set", dest="subset", required=True, help="comma-separated bitstrings")
    p = sub.add_parser("perturb", help="perturbation fidelity bound check")
    common(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--term", help="perturb only this term, e.g. Z:100")
    p = sub.add_parser("gi-reduce", help="graph-pair equivalence reduction")
    common(p, needs_input=False)
    p.add_argument("--s1", help="graph as nv:a-b,c-d")
    p.add_argument("--s2", help="graph as nv:a-b,c-d")
    p.add_argument("--vertices", type=int, help="random mode: vertex count (<= 7)")
    return parser


def _config(args) -> RunConfig:
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("STOQSYM_THREADS", "1"))
    return RunConfig(
        command=args.command,
        input_path=getattr(args, "input", None),
        seed=args.seed,
        shots=args.shots,
        tol=args.tol,
        max_iter=args.max_iter,
        dense_cap=args.dense_cap,
        orbit_cap=args.orbit_cap,
        threads=max(1, threads),
        fmt=args.fmt,
    )


def _rng(cfg: RunConfig) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(cfg.seed))


def _load(cfg: RunConfig, allow_empty: bool = False) -> Hamiltonian:
    try:
        with open(cfg.input_path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise HamiltonianSyntaxError(0, f"cannot read {cfg.input_path}: {exc}")
    ham = parse_hamiltonian(text)
    report = validate_stoquastic(ham)
    if not report.ok:
        lines = "; ".join(f"{rule} at {sup}: {msg}" for rule, sup, msg in report.violations)
        raise HamiltonianSyntaxError(0, f"not a valid stoquastic operator: {lines}")
    if not allow_empty and not any(v != 0 for v in (*ham.alpha.values(), *ham.beta.values(), *ham.kappa.values())):
        raise HamiltonianSyntaxError(0, "no terms: nothing to analyze")
    return ham


def _emit(text: str, out):
    out.write(text)
    out.flush()


def cmd_effective(cfg: RunConfig, out) -> int:
    ham = _load(cfg)
    rng = _rng(cfg)
    with Pipeline(ham, threads=cfg.threads) as pipe:
        seed_vertex = int(rng.integers(0, 1 << ham.n))
        eg = pipe.effective_graph(seed_vertex)
    gs = ground_state(effective_hamiltonian(eg), eg.class_sizes, cfg.tol, cfg.max_iter)
    probs = class_distribution(gs, eg.class_sizes)
    doc = jsonio.effective_doc(eg, gs, probs, kernel_backend())
    doc["input"] = os.path.basename(cfg.input_path)
    doc["seed"] = cfg.seed
    _emit(jsonio.dumps(doc), out)
    return EXIT_OK


def cmd_sample(cfg: RunConfig, out) -> int:
    ham = _load(cfg)
    rng = _rng(cfg)
    report = run_sample(
        ham,
        cfg.shots,
        rng,
        seed_value=cfg.seed,
        tol=cfg.tol,
        max_iter=cfg.max_iter,
        orbit_cap=cfg.orbit_cap,
        threads=cfg.threads,
    )
    if cfg.fmt == "json":
        doc = jsonio.sample_doc(report, include_shots=True)
        doc["input"] = os.path.basename(cfg.input_path)
        _emit(jsonio.dumps(doc), out)
        return EXIT_OK
    lines = []
    for _, member in report.shot_pairs():
        lines.append(render_support(member, ham.n))
    lines.append("# class probabilities (conditional on discovered components)")
    for rep, p in sorted(report.probabilities.items()):
        lines.append(f"# {rep} {p!r}")
    lines.append(f"# member_uniformity {report.member_uniformity}")
    _emit("\n".join(lines) + "\n", out)
    return EXIT_OK


def cmd_export_ctg(cfg: RunConfig, out, assignment: Optional[str]) -> int:
    ham = _load(cfg, allow_empty=True)
    graph = build_shared(ham)
    if assignment is not None:
        graph = attach_assignment(graph, parse_support(assignment, ham.n), ham.n)
    if cfg.fmt == "json":
        doc = jsonio.termgraph_doc(graph, ham.n)
        doc["input"] = os.path.basename(cfg.input_path)
        _emit(jsonio.dumps(doc), out)
    else:
        _emit(jsonio.termgraph_dot(graph, ham.n), out)
    return EXIT_OK


def cmd_export_gamma(cfg: RunConfig, out) -> int:
    ham = _load(cfg, allow_empty=True)
    if ham.n > 5:
        raise CapExceededError("explicit hypercube export is capped at n=5")
    _emit(jsonio.gamma_dot(ham), out)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out) -> int:
    ham = _load(cfg)
    rng = _rng(cfg)
    with Pipeline(ham, threads=cfg.threads) as pipe:
        seed_vertex = int(rng.integers(0, 1 << ham.n))
        eg = pipe.effective_graph(seed_vertex)
    gs = ground_state(effective_hamiltonian(eg), eg.class_sizes, cfg.tol, cfg.max_iter)
    probs = class_distribution(gs, eg.class_sizes)
    diag = verify_effective(ham, eg, gs.energy, probs, dense_cap=min(cfg.dense_cap, 10))
    tolerances = {"energy": 1e-9, "total_variation": 1e-8, "amplitude_spread": 1e-9}
    doc = {
        "command": "verify",
        "input": os.path.basename(cfg.input_path),
        "seed": cfg.seed,
        "diagnostics": {
            "energy_error": diag.energy_error,
            "total_variation": diag.total_variation,
            "amplitude_spread": diag.amplitude_spread,
            "component_size": diag.component_size,
        },
        "tolerances": tolerances,
        "pass": diag.passes(),
    }
    _emit(jsonio.dumps(doc), out)
    return EXIT_OK


def cmd_cheeger(cfg: RunConfig, out, subset_text: str) -> int:
    ham = _load(cfg)
    if ham.n > min(cfg.dense_cap, 12):
        raise CapExceededError(f"n={ham.n} exceeds dense cap")
    subset = [parse_support(tok, ham.n) for tok in subset_text.split(",") if tok]
    op = dense_hamiltonian(ham, cap=cfg.dense_cap)
    lam0, phi, lam1 = exact_ground(op)
    h_s = cheeger_ratio(op, phi, subset)
    gap = lam1 - lam0
    doc = {
        "command": "cheeger",
        "input": os.path.basename(cfg.input_path),
        "subset": sorted(render_support(x, ham.n) for x in set(subset)),
        "h_s": h_s,
        "gap": gap,
        "bound_ok": bool(gap <= 2 * h_s + 1e-9),
    }
    _emit(jsonio.dumps(doc), out)
    return EXIT_OK


def cmd_perturb(cfg: RunConfig, out, delta: float, term: Optional[str]) -> int:
    ham = _load(cfg)
    if ham.n > min(cfg.dense_cap, 10):
        raise CapExceededError(f"n={ham.n} exceeds dense cap")
    shift = Fraction(delta).limit_denominator(10**12)
    d = Hamiltonian(n=ham.n)
    if term is not None:
        kind, _, support = term.partition(":")
        mask = parse_support(support, ham.n)
        table = {"X": d.alpha, "Y": d.beta, "Z": d.kappa}.get(kind)
        if table is None:
            raise HamiltonianSyntaxError(0, f"bad --term {term!r}")
        table[mask] = shift
    else:
        for name in ("alpha", "beta", "kappa"):
            for b in getattr(ham, name):
                getattr(d, name)[b] = shift
    rep = perturbation_bound(ham, d, dense_cap=min(cfg.dense_cap, 10))
    doc = {
        "command": "perturb",
        "input": os.path.basename(cfg.input_path),
        "delta": delta,
        "term": term,
        "tan2": rep.tan2,
        "fidelity_lower_bound": rep.fidelity_lower_bound,
        "exact_fidelity": rep.exact_fidelity,
        "gap": rep.gap,
        "expectation": rep.expectation,
        "applicable": rep.applicable,
        "bound_ok": bool(
            rep.applicable and rep.exact_fidelity >= rep.fidelity_lower_bound - 1e-12
        ),
    }
    _emit(jsonio.dumps(doc), out)
    return EXIT_OK


def _parse_graph_spec(text: str):
    head, _, tail = text.partition(":")
    nv = int(head)
    edges = []
    if tail:
        for token in tail.split(","):
            a, _, b = token.partition("-")
            edges.append((int(a), int(b)))
    return simple_graph(nv, edges)


def cmd_gi_reduce(cfg: RunConfig, out, s1: Optional[str], s2: Optional[str], nv: Optional[int]) -> int:
    rng = _rng(cfg)
    if s1 and s2:
        g1 = _parse_graph_spec(s1)
        g2 = _parse_graph_spec(s2)
    elif nv:
        if nv > 7:
            raise CapExceededError("random gi-reduce graphs are capped at 7 vertices")
        from .instances import permuted_copy, random_graph

        g1 = random_graph(rng, nv, 0.5)
        g2 = permuted_copy(rng, g1) if rng.random() < 0.5 else random_graph(rng, nv, 0.5)
    else:
        raise HamiltonianSyntaxError(0, "gi-reduce needs --s1/--s2 or --vertices")
    ham, u1, u2 = gi_reduction(g1, g2)
    shared = build_shared(ham)
    from .effective import find_representative

    equivalent = find_representative(u1, [u2], shared) is not None
    ground_truth = naive_isomorphic(g1, g2)
    doc = {
        "command": "gi-reduce",
        "seed": cfg.seed,
        "n": ham.n,
        "graph1": {"vertices": g1[0], "edges": sorted(list(e) for e in g1[1])},
        "graph2": {"vertices": g2[0], "edges": sorted(list(e) for e in g2[1])},
        "states_equivalent": bool(equivalent),
        "graphs_isomorphic": bool(ground_truth),
        "agree": bool(equivalent == ground_truth),
    }
    _emit(jsonio.dumps(doc), out)
    return EXIT_OK


def main(argv=None, out=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    cfg = _config(args)
    out = out or sys.stdout
    try:
        if cfg.command == "effective":
            return cmd_effective(cfg, out)
        if cfg.command == "sample":
            return cmd_sample(cfg, out)
        if cfg.command == "export-ctg":
            return cmd_export_ctg(cfg, out, args.assignment)
        if cfg.command == "export-gamma":
            return cmd_export_gamma(cfg, out)
        if cfg.command == "verify":
            return cmd_verify(cfg, out)
        if cfg.command == "cheeger":
            return cmd_cheeger(cfg, out, args.subset)
        if cfg.command == "perturb":
            return cmd_perturb(cfg, out, args.delta, args.term)
        if cfg.command == "gi-reduce":
            return cmd_gi_reduce(cfg, out, args.s1, args.s2, args.vertices)
        parser.error(f"unknown command {cfg.command}")
    except HamiltonianSyntaxError as exc:
        print(f"stoqsym: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"stoqsym: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"stoqsym: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except InternalInconsistencyError as exc:
        print(f"stoqsym: internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except CapExceededError as exc:
        print(f"stoqsym: cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    return EXIT_OK


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
