from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

from dotenv import load_dotenv

from .config import (
    DEFAULT_SUITE_COUNT,
    RunConfig,
    apply_env_overrides,
    load_profile,
    load_seed,
    with_overrides,
)
from .dot_export import nodal_dot, partition_dot
from .formats import (
    ParseError,
    bound_to_dict,
    certificate_to_dict,
    critical_to_dict,
    dumps,
    eigen_str,
    load_json,
    nodal_to_dict,
    param_point_to_dict,
    parse_alpha,
    parse_graph,
    parse_partition,
    parse_signature,
    parse_vector,
    signed_equipartition_to_dict,
    spectrum_to_dict,
)
from .ghost import build_ghost, pullback_spectrum, verify_discretization
from .graph_core import CapExceeded, SpectralPartitionError, WeightedGraph
from .instances import SplitMix64
from .param_partition import energy, is_equipartition, phi
from .pipeline import analyze_critical, analyze_lower_bound, enumerate_minimal_partition
from .signed import Signature, all_positive, boundary_signature, signed_laplacian
from .spectral import eigendecompose, jitter_weights, nodal_report
from .suites import SUITES, SuiteFailed, run_suite


logger = logging.getLogger(__name__)


EXIT_ERROR = 1
EXIT_PARSE = 2
EXIT_CAP = 3
DEFAULT_JITTER = 1e-6


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-eq", type=float, dest="tol_eq")
    common.add_argument("--tol-zero", type=float, dest="tol_zero")
    common.add_argument("--tol-gap", type=float, dest="tol_gap")
    common.add_argument("--tol-hess", type=float, dest="tol_hess")
    common.add_argument("--cap-vertices", type=int, dest="cap_vertices")
    common.add_argument("--cap-subset", type=int, dest="cap_subset")
    common.add_argument("--seed", type=lambda s: int(s, 0))
    common.add_argument("--count", type=int)
    common.add_argument("--jitter", type=float, nargs="?", const=DEFAULT_JITTER, default=None)
    common.add_argument("--profile", default="default", help="profile name inside the YAML profile file")
    common.add_argument("--out", type=Path)
    common.add_argument("--dot", type=Path)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="spl", description="Spectral minimal partitions of weighted graphs")
    commands = parser.add_subparsers(dest="command", required=True)

    spectrum = commands.add_parser("spectrum", parents=[common], help="eigenpairs of a signed Laplacian")
    spectrum.add_argument("graph", type=Path)
    spectrum.add_argument("--signature", type=Path)

    nodal = commands.add_parser("nodal", parents=[common], help="strong nodal domains of an eigenvector")
    nodal.add_argument("graph", type=Path)
    nodal.add_argument("--signature", type=Path)
    nodal.add_argument("--index", type=int, required=True)
    nodal.add_argument("--vector", type=Path)

    critical = commands.add_parser("critical", parents=[common], help="critical equipartitions of a partition")
    critical.add_argument("graph", type=Path)
    critical.add_argument("partition", type=Path)
    critical.add_argument("--alpha", type=Path, help="also evaluate Φ and Λ at this parameter point")

    verify = commands.add_parser("verify", parents=[common], help="run a seeded verification suite")
    verify.add_argument("suite", choices=sorted(SUITES))

    minimal = commands.add_parser("enumerate-min", parents=[common], help="exhaustive minimal ν-partition search")
    minimal.add_argument("graph", type=Path)
    minimal.add_argument("--nu", type=int, required=True)

    bound = commands.add_parser("lower-bound", parents=[common], help="switching-class lower bound on the energy")
    bound.add_argument("graph", type=Path)
    bound.add_argument("partition", type=Path)
    bound.add_argument("--signature", type=Path)

    ghost = commands.add_parser("ghost-check", parents=[common], help="ghost-point discretization identity")
    ghost.add_argument("graph", type=Path)
    ghost.add_argument("partition", type=Path)
    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    profile = apply_env_overrides(load_profile(name=args.profile))
    profile = with_overrides(
        profile,
        eq_tol=args.tol_eq,
        zero_tol=args.tol_zero,
        gap_tol=args.tol_gap,
        hess_tol=args.tol_hess,
        vertex_cap=args.cap_vertices,
        subset_cap=args.cap_subset,
    )
    seed = args.seed if args.seed is not None else load_seed()
    if not 0 <= seed < 1 << 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    count = args.count if args.count is not None else DEFAULT_SUITE_COUNT
    if count <= 0:
        raise ValueError("count must be > 0")
    if args.jitter is not None and not args.jitter > 0:
        raise ValueError("jitter must be > 0")
    return RunConfig(
        command=args.command,
        seed=seed,
        count=count,
        profile=profile,
        jitter=args.jitter,
        out=args.out,
        dot=args.dot,
    )


def _load_graph(path: Path, config: RunConfig) -> WeightedGraph:
    graph = parse_graph(load_json(path), str(path))
    if config.jitter is not None:
        graph = jitter_weights(graph, SplitMix64(config.seed), config.jitter)
        logger.info("weights jittered relative=%.3e seed=%s", config.jitter, config.seed)
    return graph


def _load_signature(path: Path | None, graph: WeightedGraph, default: Signature) -> Signature:
    if path is None:
        return default
    return parse_signature(load_json(path), graph, str(path))


def cmd_spectrum(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    graph = _load_graph(args.graph, config)
    signature = _load_signature(args.signature, graph, all_positive(graph))
    report = eigendecompose(signed_laplacian(graph, signature), gap_rel=config.profile.tolerances.gap_tol)
    return {"negative_edges": [list(e) for e in signature.sorted_edges()], **spectrum_to_dict(report)}


def cmd_nodal(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    graph = _load_graph(args.graph, config)
    signature = _load_signature(args.signature, graph, all_positive(graph))
    if not 1 <= args.index <= graph.vertex_count:
        raise ValueError(f"index must lie in 1..{graph.vertex_count}")
    tol = config.profile.tolerances
    if args.vector is not None:
        u = parse_vector(load_json(args.vector), graph.vertex_count, str(args.vector))
    else:
        u = eigendecompose(signed_laplacian(graph, signature), gap_rel=tol.gap_tol).vector(args.index)
    report = nodal_report(signature, u, args.index, zero_tol=tol.zero_tol)
    if config.dot is not None:
        nodal_dot(signature, report, u, path=config.dot)
    return nodal_to_dict(report)


def cmd_critical(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    graph = _load_graph(args.graph, config)
    partition = parse_partition(load_json(args.partition), graph, str(args.partition))
    analysis = analyze_critical(partition, config.profile)
    if config.dot is not None:
        partition_dot(partition, path=config.dot)
    at_alpha = None
    if args.alpha is not None:
        point = parse_alpha(load_json(args.alpha), partition, str(args.alpha))
        at_alpha = {
            **param_point_to_dict(point),
            "phi": [eigen_str(v) for v in phi(point)],
            "energy": eigen_str(energy(point)),
            "equipartition": is_equipartition(point, config.profile.tolerances.eq_tol),
        }
    return {
        "labels": list(partition.labels),
        "nu": partition.nu,
        "betti": analysis.betti,
        "tree": analysis.tree,
        "critical_points": [
            {
                **critical_to_dict(entry.critical, entry.certificate, entry.restoration),
                "courant_sharp": entry.critical.deficiency == 0,
                "note": entry.note,
            }
            for entry in analysis.critical_points
        ],
        "at_alpha": at_alpha,
    }


def cmd_verify(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    result = run_suite(args.suite, config.seed, config.count, config.profile)
    payload = result.to_dict()
    if not result.passed:
        _emit(payload, config.out)
        raise SuiteFailed(suite=result.suite, failures=result.failures, count=result.count)
    return payload


def cmd_enumerate_min(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    graph = _load_graph(args.graph, config)
    if not 1 <= args.nu <= graph.vertex_count:
        raise ValueError(f"nu must lie in 1..{graph.vertex_count}")
    found = enumerate_minimal_partition(graph, args.nu, config.profile, SplitMix64(config.seed))
    if config.dot is not None:
        partition_dot(found.best, path=config.dot)
    return {
        "nu": found.nu,
        "partitions_checked": found.partitions_checked,
        "labels": list(found.best.labels),
        "energy": eigen_str(found.best_energy),
        "lambda_nu": eigen_str(found.lambda_nu),
        "courant_sharp": found.courant_sharp,
        "nodal_labels": None if found.nodal_labels is None else list(found.nodal_labels),
        "nodal_attains_minimum": found.nodal_attains_minimum,
    }


def cmd_lower_bound(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    graph = _load_graph(args.graph, config)
    partition = parse_partition(load_json(args.partition), graph, str(args.partition))
    gamma = _load_signature(args.signature, graph, boundary_signature(partition))
    analysis = analyze_lower_bound(gamma, partition, config.profile, SplitMix64(config.seed))
    return {
        **bound_to_dict(analysis.bound),
        "maximizer": [list(e) for e in analysis.maximizer],
        "maximized_lambda_nu": eigen_str(analysis.maximized_value),
        "certificate": None if analysis.certificate is None else certificate_to_dict(analysis.certificate),
        "nodal_equipartition": (
            None
            if analysis.nodal_equipartition is None
            else signed_equipartition_to_dict(analysis.nodal_equipartition)
        ),
    }


def cmd_ghost_check(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    graph = _load_graph(args.graph, config)
    partition = parse_partition(load_json(args.partition), graph, str(args.partition))
    verify_discretization(partition)
    ghost = build_ghost(partition)
    return {
        "labels": list(partition.labels),
        "verified": True,
        "vertices": ghost.base_count,
        "ghost_vertices": ghost.vertex_count - ghost.base_count,
        "pullback_spectrum": [eigen_str(v) for v in pullback_spectrum(partition)],
    }


COMMANDS: dict[str, Callable[[argparse.Namespace, RunConfig], dict[str, Any]]] = {
    "spectrum": cmd_spectrum,
    "nodal": cmd_nodal,
    "critical": cmd_critical,
    "verify": cmd_verify,
    "enumerate-min": cmd_enumerate_min,
    "lower-bound": cmd_lower_bound,
    "ghost-check": cmd_ghost_check,
}


def _emit(payload: dict[str, Any], out: Path | None) -> None:
    text = dumps(payload)
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _fail(exc: BaseException, code: int) -> int:
    sys.stderr.write(dumps({"error": type(exc).__name__, "message": str(exc)}))
    return code


def _configure_logging() -> None:
    log_level = os.getenv("LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, log_level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def run(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        config = load_run_config(args)
        payload = COMMANDS[args.command](args, config)
    except ParseError as exc:
        return _fail(exc, EXIT_PARSE)
    except CapExceeded as exc:
        return _fail(exc, EXIT_CAP)
    except SpectralPartitionError as exc:
        return _fail(exc, EXIT_ERROR)
    except ValueError as exc:
        return _fail(exc, EXIT_PARSE)
    _emit(payload, config.out)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
