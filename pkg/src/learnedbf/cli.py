"""Command-line entry points: gen-h, train, eval, estimate-profile.

Every option can also come from a YAML file given with ``--config``; keys are
the long option names (dashes or underscores) and explicit flags win. Each
run writes its artifacts plus ``manifest.json`` (resolved config, seed and
content hashes of inputs and outputs) under ``--out``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .autoperm import (
    SortDiscardDecoder,
    SortDiscardErrors,
    b_set,
    estimate_crossovers,
    log2_length,
    read_profile_csv,
    write_profile_csv,
)
from .channel import ChannelSpec, make_rng, snr_to_params
from .codes import LinearCode, overcomplete_pc, parse_code_spec, rm_overcomplete_pc, save_pc
from .codes import load_pc
from .decoders import (
    DEFAULT_MAX_ITERS,
    MAX_BRUTE_K,
    MAX_TABLE_ROWS,
    BitFlipDecoder,
    BruteForceMlDecoder,
    OsdDecoder,
    SyndromeMlDecoder,
    WbfDecoder,
    build_syndrome_table,
)
from .evaluation import ResultRow, run_monte_carlo, write_learning_curve_csv, write_results_csv
from .gf2 import BitMatrix, rref
from .mdp import MdpConfig
from .rl.explore import EPS_GOAL, EPS_GREEDY, ExploreSpec, Schedule
from .rl.fitted import default_hidden, train_fitted
from .rl.network import QNetwork
from .rl.policy import LbfDecoder
from .rl.tabular import QTable, train_tabular

log = logging.getLogger("learnedbf")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2
DECODERS = ("bf", "wbf", "lbf", "lbf-nn", "hdml", "osd3", "brute")
CHANNELS = ("bsc", "awgn", "awgn-sd")
TRAIN_STREAM = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def git_blob_hash(path) -> str:
    """Content hash computed the way git hashes a blob."""
    data = Path(path).read_bytes()
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def write_manifest(path, args, inputs, outputs) -> None:
    config = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    manifest = {
        "command": args.command,
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "config": config,
        "config_file": args.config,
        "inputs": {str(p): git_blob_hash(p) for p in inputs},
        "outputs": {Path(p).name: git_blob_hash(p) for p in outputs},
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")


def parse_float_list(text: str) -> list[float]:
    """``3,4,5`` or ``start:stop:step`` (stop included)."""
    text = str(text)
    if ":" in text:
        try:
            start, stop, step = (float(x) for x in text.split(":"))
        except ValueError:
            raise UsageError(f"bad range {text!r}, expected start:stop:step") from None
        if step <= 0:
            raise UsageError("range step must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(count)]
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad number list {text!r}") from None


def parse_decoders(text: str) -> list[str]:
    names = [d.strip() for d in str(text).split(",") if d.strip()]
    bad = [d for d in names if d not in DECODERS]
    if bad or not names:
        raise UsageError(f"unknown decoder(s) {bad or text!r}; choose from {','.join(DECODERS)}")
    return names


def resolve_code(args) -> tuple[LinearCode, list[Path]]:
    if args.code.startswith("file:"):
        return parse_code_spec(args.code), [Path(args.code[5:])]
    try:
        return parse_code_spec(args.code), []
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def resolve_pc(code: LinearCode, choice: str) -> tuple[BitMatrix, str, list[Path]]:
    """Parity-check matrix for ``std``, ``oc`` or ``file:<path>``."""
    if choice == "std":
        return code.pc_matrix, "std", []
    if choice == "oc":
        if code.rm is not None and code.N - code.K > 24:
            return rm_overcomplete_pc(code.rm), "oc", []
        return overcomplete_pc(code), "oc", []
    if choice.startswith("file:"):
        path = Path(choice[5:])
        H = load_pc(path)
        if H.cols != code.N:
            raise ValueError(f"{path}: {H.cols} columns, code has N={code.N}")
        return H, path.stem, [path]
    raise UsageError(f"bad --pc {choice!r}; use std, oc or file:<path>")


def full_rank_pc(code: LinearCode) -> BitMatrix:
    R, k, _ = rref(code.pc_matrix)
    return BitMatrix.from_array(R.dense[:k])


def channel_spec(kind: str, ebn0_db: float, rate: float) -> ChannelSpec:
    return ChannelSpec("bsc" if kind == "bsc" else "awgn", snr_to_params(ebn0_db, rate))


# ---- gen-h -----------------------------------------------------------------

def cmd_gen_h(args) -> int:
    code, inputs = resolve_code(args)
    H, _, more = resolve_pc(code, "oc" if args.overcomplete else "std")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_pc(H, out)
    write_manifest(out.with_name(out.name + ".manifest.json"), args, inputs + more, [out])
    log.info("wrote %d x %d parity-check matrix to %s", H.rows, H.cols, out)
    return EXIT_OK


# ---- train -----------------------------------------------------------------

def cmd_train(args) -> int:
    if args.channel == "awgn-sd" and not args.profile:
        raise UsageError("--channel awgn-sd needs --profile (run estimate-profile first)")
    if args.explore not in ("goal", "greedy"):
        raise UsageError("--explore must be goal or greedy")
    code, inputs = resolve_code(args)
    H, pc_label, more = resolve_pc(code, args.pc)
    inputs += more
    rng = make_rng(args.seed, TRAIN_STREAM)
    snr = snr_to_params(args.snr, code.rate)
    if args.channel == "awgn-sd":
        log2_length(code.N)
        profile = read_profile_csv(args.profile)
        inputs.append(Path(args.profile))
        if profile.N != code.N:
            raise ValueError(f"profile has {profile.N} positions, code has N={code.N}")
        source = SortDiscardErrors(code.N, snr)
        mdp_cfg = MdpConfig.for_llr(H, profile.llr_mag, args.T, args.gamma)
    else:
        source = channel_spec(args.channel, args.snr, code.rate)
        mdp_cfg = MdpConfig.bsc(H, args.T, args.gamma, snr.bsc_p)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.eps_schedule:
        schedule = Schedule.parse(args.eps_schedule, args.episodes)
    else:
        schedule = Schedule("constant", args.eps, args.eps)
    eps_g = args.eps_g if args.explore == "goal" else 0.0

    if args.method == "tabular":
        kind = EPS_GOAL if args.explore == "goal" else EPS_GREEDY
        spec = ExploreSpec(kind, schedule.start, eps_g, schedule)
        q, curve = train_tabular(code, H, source, mdp_cfg, spec, args.alpha, args.episodes, rng)
        model = out / "qtable.bin"
        q.save(model)
    else:
        if eps_g and schedule.start + eps_g >= 1:
            raise UsageError("goal exploration needs eps + eps-g < 1")
        net, curve = train_fitted(code, H, source, mdp_cfg, schedule, args.batch, args.alpha,
                                  args.episodes, rng, hidden=args.hidden or default_hidden(code.N),
                                  eps_g=eps_g, record_curve=args.curve)
        model = out / "qnet.bin"
        net.save(model)
    outputs = [model]
    if len(curve.failures):
        curve_path = out / "learning_curve.csv"
        write_learning_curve_csv(curve, curve_path, args.curve_every)
        outputs.append(curve_path)
    pc_path = out / f"pc_{pc_label}.txt"
    save_pc(H, pc_path)
    outputs.append(pc_path)
    write_manifest(out / "manifest.json", args, inputs, outputs)
    log.info("trained %s model on %s (%s), wrote %s", args.method, code.label, pc_label, model)
    return EXIT_OK


# ---- eval ------------------------------------------------------------------

def load_model(path):
    head = Path(path).read_bytes()[:4]
    if head == b"QTBL":
        return QTable.load(path)
    if head == b"QNET":
        return QNetwork.load(path)
    raise ValueError(f"{path}: neither a Q-table nor a Q-network file")


def build_decoder(name: str, args, code: LinearCode, H: BitMatrix, pc_label: str):
    """Return (decoder, pc label for the CSV, input files read)."""
    sd = args.channel == "awgn-sd"
    if name in ("lbf", "lbf-nn"):
        path = args.model if name == "lbf" else args.model_nn
        if not path:
            flag = "--model" if name == "lbf" else "--model-nn"
            raise UsageError(f"decoder {name} needs {flag}")
        q = load_model(path)
        if (q.M, q.N) != H.shape:
            raise ValueError(f"{path}: model is for a {q.M}x{q.N} matrix, --pc gives {H.rows}x{H.cols}")
        dec = SortDiscardDecoder(q, H, args.T, name) if sd else LbfDecoder(q, H, args.T, name)
        return dec, pc_label, [Path(path)]
    if name == "bf":
        return BitFlipDecoder(H, args.T), pc_label, []
    if name == "wbf":
        return WbfDecoder(H, args.T), pc_label, []
    if name == "hdml":
        Hf = full_rank_pc(code)
        if Hf.rows > MAX_TABLE_ROWS:
            raise ValueError(f"hdml needs N-K <= {MAX_TABLE_ROWS}, code has {Hf.rows}")
        return SyndromeMlDecoder(build_syndrome_table(Hf)), "std", []
    if name == "osd3":
        return OsdDecoder(code, 3), "-", []
    if code.K > MAX_BRUTE_K:
        raise ValueError(f"brute needs K <= {MAX_BRUTE_K}, code has K={code.K}")
    return BruteForceMlDecoder(code, "soft"), "-", []


def snr_stream(ebn0_db: float) -> int:
    """Simulation stream per SNR point, shared by all decoders for paired comparisons."""
    return 1000 + int(round((ebn0_db + 100.0) * 1000))


def cmd_eval(args) -> int:
    names = parse_decoders(args.decoders)
    snrs = parse_float_list(args.snr)
    if not snrs:
        raise UsageError("--snr must list at least one value")
    code, inputs = resolve_code(args)
    H, pc_label, more = resolve_pc(code, args.pc)
    inputs += more
    decoders = []
    for name in names:
        dec, label, files = build_decoder(name, args, code, H, pc_label)
        decoders.append((dec, label))
        inputs += files
    rows = []
    for db in snrs:
        ch = channel_spec(args.channel, db, code.rate)
        for dec, label in decoders:
            stats = run_monte_carlo(dec, code, ch, args.min_errors, args.max_words, args.seed,
                                    snr_stream(db), args.block_size, args.workers, args.info_bits)
            log.info("%s %.2f dB: CER %.4g (%d words)", dec.name, db, stats.cer, stats.codewords)
            rows.append(ResultRow(db, dec.name, label, stats))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "results.csv"
    write_results_csv(rows, csv_path)
    write_manifest(out / "manifest.json", args, inputs, [csv_path])
    return EXIT_OK


# ---- estimate-profile ------------------------------------------------------

def cmd_estimate_profile(args) -> int:
    code, inputs = resolve_code(args)
    log2_length(code.N)
    if args.samples < 100_000:
        raise UsageError("--samples must be at least 100000")
    snr = snr_to_params(args.snr, code.rate)
    profile = estimate_crossovers(code, snr, args.samples, seed=args.seed, workers=args.workers)
    if profile.clamped.any():
        log.warning("clamped %d crossover estimate(s) to [1e-6, 0.5-1e-6] at positions %s",
                    int(profile.clamped.sum()), np.flatnonzero(profile.clamped).tolist())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "profile.csv"
    write_profile_csv(profile, path)
    write_manifest(out / "manifest.json", args, inputs, [path])
    idx = b_set(log2_length(code.N))
    log.info("p over B-set %s: %s", idx, np.round(profile.p[idx], 5).tolist())
    return EXIT_OK


# ---- parser ----------------------------------------------------------------

def _common(p: argparse.ArgumentParser, out_help: str) -> None:
    p.add_argument("--config", help="YAML file with option values (flags win)")
    p.add_argument("--code", default="rm:2,5", help="rm:r,m or file:<pc-matrix path>")
    p.add_argument("--out", required=False, help=out_help)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1, help="simulation processes")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="learnedbf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("gen-h", help="write a standard or overcomplete parity-check matrix")
    _common(p, "output matrix file")
    p.add_argument("--overcomplete", action="store_true")
    p.set_defaults(func=cmd_gen_h)

    p = sub.add_parser("train", help="learn a bit-flipping policy")
    _common(p, "output directory")
    p.add_argument("--pc", default="std", help="std, oc or file:<path>")
    p.add_argument("--channel", choices=CHANNELS, default="bsc")
    p.add_argument("--snr", type=float, default=4.0, help="training Eb/N0 in dB")
    p.add_argument("--profile", help="crossover profile CSV (awgn-sd only)")
    p.add_argument("--method", choices=("tabular", "fitted"), default="tabular")
    p.add_argument("--explore", default="goal", help="goal or greedy")
    p.add_argument("--eps", type=float, default=0.6)
    p.add_argument("--eps-g", type=float, default=0.3)
    p.add_argument("--eps-schedule", help="constant:<e> or linear:<start>:<end>:<n|xK>")
    p.add_argument("--alpha", type=float, default=None, help="learning rate")
    p.add_argument("--gamma", type=float, default=0.99)
    p.add_argument("-T", "--T", dest="T", type=int, default=DEFAULT_MAX_ITERS)
    p.add_argument("--batch", type=int, default=100)
    p.add_argument("--hidden", type=int, default=None)
    p.add_argument("--episodes", type=int, default=1_000_000)
    p.add_argument("--curve", action="store_true", help="record a learning curve (fitted)")
    p.add_argument("--curve-every", type=int, default=100)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="Monte Carlo CER/BER sweep")
    _common(p, "output directory")
    p.add_argument("--pc", default="std", help="std, oc or file:<path>")
    p.add_argument("--channel", choices=CHANNELS, default="awgn")
    p.add_argument("--snr", default="3,4,5", help="Eb/N0 list a,b,c or start:stop:step")
    p.add_argument("--decoders", default="bf,hdml")
    p.add_argument("--model", help="Q-table or Q-network for lbf")
    p.add_argument("--model-nn", help="Q-network for lbf-nn")
    p.add_argument("-T", "--T", dest="T", type=int, default=DEFAULT_MAX_ITERS)
    p.add_argument("--min-errors", type=int, default=100)
    p.add_argument("--max-words", type=int, default=1_000_000)
    p.add_argument("--block-size", type=int, default=1000)
    p.add_argument("--info-bits", action="store_true", help="BER over information bits")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("estimate-profile", help="crossover profile of the sorted channel")
    _common(p, "output directory")
    p.add_argument("--snr", type=float, default=4.0)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.set_defaults(func=cmd_estimate_profile)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("missing command; choose gen-h, train, eval or estimate-profile")
    if args.config:
        try:
            data = yaml.safe_load(Path(args.config).read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError(f"{args.config}: expected a mapping of option names")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        values = {str(k).replace("-", "_"): v for k, v in data.items()}
        unknown = sorted(set(values) - known - {"command"})
        if unknown:
            raise UsageError(f"{args.config}: unknown option(s) {', '.join(unknown)}")
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
    if not args.out:
        raise UsageError("--out is required")
    if getattr(args, "alpha", 0) is None:
        args.alpha = 0.1 if args.method == "tabular" else 3e-5
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    return args


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except UsageError as exc:
        print(f"learnedbf: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"learnedbf: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, MemoryError) as exc:
        print(f"learnedbf: error: {exc}".splitlines()[0], file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
