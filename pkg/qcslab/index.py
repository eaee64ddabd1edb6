"""
Command-line entry point for qcslab.

Sub-commands:
    experiment  - run a sweep from a JSON config and write its CSV/JSON outputs
    gen-matrix  - generate a measurement matrix container
    quantize    - measure a random sparse signal and Σ∆-quantize it
    recover     - solve the one-stage program for saved measurements
    encode      - Bernoulli-encode saved Σ∆ output into a bit-packed payload

Environment Variables:
    QCSLAB_LOG_LEVEL: Logging level (INFO)
    QCSLAB_WORKERS: Worker processes for experiment trials (1)
    QCSLAB_SOLVER_*: Solver defaults, see qcslab.config
"""

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

from qcslab import __version__, config
from qcslab.handlers.experiment_handler import handle_experiment
from qcslab.handlers.tool_handler import (
    MATRIX_KINDS,
    handle_encode,
    handle_gen_matrix,
    handle_quantize,
    handle_recover,
)

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcslab", description="Σ∆-quantized compressed sensing toolkit")
    parser.add_argument("--version", action="version", version=f"qcslab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    experiment = sub.add_parser("experiment", help="run a sweep from a JSON config")
    experiment.add_argument("--config", required=True, help="experiment config (JSON)")
    experiment.add_argument("--out", required=True, help="output directory")
    experiment.add_argument("--paper-scale", action="store_true", help="use the full-size sweep profile")
    experiment.add_argument("--force", action="store_true", help="run sparsities outside the guaranteed range")

    gen = sub.add_parser("gen-matrix", help="generate a measurement matrix")
    gen.add_argument("--kind", required=True, choices=MATRIX_KINDS)
    gen.add_argument("--out", required=True)
    gen.add_argument("--m", type=int)
    gen.add_argument("--n", type=int)
    gen.add_argument("--p", type=int, help="prime, for chirp kinds")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--modify-r", type=int, help="premultiply by U of order r")
    gen.add_argument("--delta", type=float, default=0.1)
    gen.add_argument("--eps", type=float, default=0.0)

    quantize = sub.add_parser("quantize", help="measure a random sparse signal and quantize it")
    quantize.add_argument("--matrix", required=True)
    quantize.add_argument("--out", required=True)
    quantize.add_argument("--signal-out", required=True)
    quantize.add_argument("--k", type=int, required=True)
    quantize.add_argument("--r", type=int, required=True)
    quantize.add_argument("--delta", type=float, default=0.1)
    quantize.add_argument("--seed", type=int, default=0)
    quantize.add_argument("--eps", type=float, default=0.0)
    quantize.add_argument("--m-max", type=int, help="use the digital-buffer pipeline with this m_max")

    rec = sub.add_parser("recover", help="solve the one-stage program")
    rec.add_argument("--matrix", required=True)
    rec.add_argument("--quantized", required=True)
    rec.add_argument("--out", required=True)
    rec.add_argument("--variant", choices=("standard", "buffer"), default="standard")
    rec.add_argument("--eps", type=float, default=0.0)
    rec.add_argument("--m-max", type=int)
    rec.add_argument("--signal", help="signal container, to report the reconstruction error")

    enc = sub.add_parser("encode", help="Bernoulli-encode Σ∆ output")
    enc.add_argument("--quantized", required=True)
    enc.add_argument("--out", required=True)
    enc.add_argument("--L", type=int, required=True)
    enc.add_argument("--seed", type=int, default=0)
    return parser


def dispatch(args: argparse.Namespace) -> Dict[str, Any]:
    """Route parsed arguments to their handler."""
    if args.command == "experiment":
        return handle_experiment(args.config, args.out, args.paper_scale, args.force)
    if args.command == "gen-matrix":
        return handle_gen_matrix(args.kind, args.out, args.m, args.n, args.p, args.seed,
                                 args.modify_r, args.delta, args.eps)
    if args.command == "quantize":
        return handle_quantize(args.matrix, args.out, args.signal_out, args.k, args.r, args.delta,
                               args.seed, args.eps, args.m_max)
    if args.command == "recover":
        return handle_recover(args.matrix, args.quantized, args.out, args.variant, args.eps,
                              args.m_max, args.signal)
    return handle_encode(args.quantized, args.out, args.L, args.seed)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run the sub-command and print its JSON body.

    Returns:
        Exit status: 0 on success, 1 on a failed computation, 2 on invalid input
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=config.LOG_LEVEL, format=config.LOG_FORMAT, stream=sys.stderr)
    logger.debug(f"[CLI] {vars(args)}")
    response = dispatch(args)
    print(json.dumps(response['body'], indent=2, sort_keys=True))
    return response['status']


if __name__ == "__main__":
    sys.exit(main())
