import os
import sys
import argparse
import multiprocessing

BASE_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
if BASE_DIR not in sys.path:
    sys.path.append(BASE_DIR)

from src.PerceptronLab import __version__
from src.PerceptronLab.utils import logger
from src.PerceptronLab.utils.config import load_config, section
from src.PerceptronLab.utils.errors import EXIT_IO
from src.PerceptronLab.utils.tool_handler import ToolHandler


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _range3(text):
    """start:step:stop, as in .001:.001:.999."""
    parts = [float(v) for v in text.split(":")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:step:stop, got {text!r}")
    start, step, stop = parts
    return start, stop, step


def _add_common(parser):
    parser.add_argument("--config", default=None, help="YAML config file (default: packaged config.yaml or $PERCEPTRON_LAB_CONFIG)")
    parser.add_argument("--quiet", action="store_true", help="suppress INFO lines on stderr")


def _add_quadrature(parser):
    parser.add_argument("--rule", default=None, choices=["gauss_hermite", "adaptive_interval"])
    parser.add_argument("--nodes", dest="node_count", type=int, default=None, help="starting Gauss-Hermite nodes")
    parser.add_argument("--abs-tol", dest="abs_tol", type=float, default=None)
    parser.add_argument("--bits", action="store_true", help="also show values in bits (display only)")


def _add_simulation(parser):
    parser.add_argument("--n-dim", dest="n_dim", type=int, required=True, help="N")
    parser.add_argument("--trials", type=int, default=1)
    parser.add_argument("--seed", dest="master_seed", type=int, default=0, help="master seed")
    parser.add_argument("--workers", type=int, default=None, help="process count (capped by PERCEPTRON_LAB_THREADS)")
    parser.add_argument("--out", default=None, help="primary CSV output path")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="perceptron-lab",
        description="Gardner-Derrida free energy, first moment capacity bounds and desk-scale perceptron experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gd-eval", help="GD(alpha, q) at one point")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    _add_quadrature(p)
    _add_common(p)

    p = sub.add_parser("gd-min", help="minimise GD(alpha, q) over q")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--opt-tol", dest="opt_tol", type=float, default=None)
    _add_quadrature(p)
    _add_common(p)

    p = sub.add_parser("sweep", help="GD on an (alpha, q) grid, CSV output")
    p.add_argument("--q-range", dest="q_range", type=_range3, default=None, help="start:step:stop (default .001:.001:.999)")
    p.add_argument("--alpha-range", dest="alpha_range", type=_range3, default=None, help="start:step:stop (default .846:.00005:.847)")
    p.add_argument("--q-values", dest="q_values", type=_float_list, default=None, help="explicit comma-separated q grid")
    p.add_argument("--alpha-values", dest="alpha_values", type=_float_list, default=None, help="explicit comma-separated alpha grid")
    p.add_argument("--out", default=None)
    _add_quadrature(p)
    _add_common(p)

    p = sub.add_parser("capacity-bound", help="smallest alpha with a negative conditional first moment rate")
    p.add_argument("--slack", type=float, default=None, help="concentration slack epsilon (default 1e-4)")
    p.add_argument("--root-tol", dest="root_tol", type=float, default=None)
    p.add_argument("--out", default=None, help="certificate JSON path")
    _add_quadrature(p)
    _add_common(p)

    p = sub.add_parser("proposition", help="margin report at alpha = .847")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--stated-margin", dest="stated_margin", type=float, default=None)
    _add_quadrature(p)
    _add_common(p)

    p = sub.add_parser("simulate-binary", help="exact |Z_t| counts on random instances")
    p.add_argument("--alpha", type=float, required=True)
    _add_simulation(p)
    _add_common(p)

    p = sub.add_parser("simulate-sphere", help="Monte Carlo spherical free energy")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--method", default="direct", help="direct or sequential")
    p.add_argument("--samples", type=int, default=None, help="directions per instance (direct) or per constraint (sequential)")
    _add_simulation(p)
    _add_common(p)

    p = sub.add_parser("feasibility", help="perceptron witness rate per alpha")
    p.add_argument("--alpha-values", dest="alpha_values", type=_float_list, required=True)
    p.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    _add_simulation(p)
    _add_common(p)
    return parser


# argparse fields that are not tool parameters
_CLI_ONLY = {"command", "config", "quiet"}
# the sweep CSV always carries both units
_NO_BITS = {"sweep"}


def tool_params(args):
    params = {k: v for k, v in vars(args).items() if k not in _CLI_ONLY}
    if args.command in _NO_BITS:
        params.pop("bits", None)
    return {k: v for k, v in params.items() if v is not None}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except OSError as e:
        print(f"[ERROR] cannot read config: {e}", file=sys.stderr)
        return EXIT_IO

    out = section(config, "output")
    history = out.get("history_file")
    logger.configure(
        history_file=os.path.join(out.get("out_dir", "runs"), history) if history else None,
        quiet=args.quiet,
    )
    log = logger.get_logger("PerceptronLab")
    log.system(f"perceptron-lab {__version__}: {args.command}")

    handler = ToolHandler(config)
    result = handler.handle_call(args.command, tool_params(args))
    if result["success"]:
        print(result["message"])
    else:
        print(result["message"], file=sys.stderr)
    return result["exit_code"]


if __name__ == "__main__":
    multiprocessing.freeze_support()
    sys.exit(main())
