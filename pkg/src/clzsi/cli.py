"""Command-line interface: compress, decompress, and simulate.

Exit codes are stable: 0 success, 2 bad input or usage, 3 side-information
checksum mismatch, 4 corrupt or truncated container.  Errors go to stderr
as a single machine-parsable key=value line.

Side information always travels out of band as its own file; both ends
are assumed to hold identical copies, and the container checksum merely
turns a mismatch into a loud failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .analysis import (
    flag_advantage,
    kac_bound_check,
    run_rate_experiment,
    write_advantage_csv,
    write_match_bound_csv,
    write_rate_csv,
)
from .container import compress_to_container, decompress_container
from .errors import ChecksumMismatchError, ClzsiError, ContainerFormatError
from .fixed_lz import FixedParseConfig, encode_fixed
from .matching import SymbolSequence
from .sources import correlated_binary_model, generate

EXIT_INPUT = 2
EXIT_CHECKSUM = 3
EXIT_CORRUPT = 4


class _InputError(Exception):
    """Operator-level input problem with a machine-parsable description."""

    def __init__(self, key: str, **fields):
        super().__init__(key)
        self.key = key
        self.fields = fields


def _fail(code: int, error: str, **fields) -> int:
    parts = [f"error={error}"] + [f"{k}={v}" for k, v in fields.items()]
    print(" ".join(parts), file=sys.stderr)
    return code


def _read_symbols(path: str, alphabet: int, unpack_bits: bool) -> SymbolSequence:
    with open(path, "rb") as handle:
        raw = np.frombuffer(handle.read(), dtype=np.uint8)
    if unpack_bits:
        return SymbolSequence(2, np.unpackbits(raw))
    if raw.size and int(raw.max()) >= alphabet:
        raise _InputError(
            "alphabet_violation", path=path, max_symbol=int(raw.max()), alphabet=alphabet
        )
    return SymbolSequence(alphabet, raw)


def _write_symbols(path: str, seq: SymbolSequence, pack_bits: bool) -> None:
    if pack_bits:
        if len(seq) % 8:
            raise _InputError("bit_count_not_byte_aligned", length=len(seq))
        data = np.packbits(seq.symbols.astype(np.uint8)).tobytes()
    else:
        data = seq.symbols.astype(np.uint8).tobytes()
    with open(path, "wb") as handle:
        handle.write(data)


def _cmd_compress(args) -> int:
    x = _read_symbols(args.input, args.alphabet, args.bits)
    y = _read_symbols(args.side, args.side_alphabet, args.bits)
    if len(x) != len(y):
        raise _InputError("length_mismatch", input=len(x), side=len(y))
    data = compress_to_container(
        x,
        y,
        args.algorithm,
        block_len=args.L,
        x_offset_bits=args.m,
        window=args.nw,
    )
    with open(args.output, "wb") as handle:
        handle.write(data)
    print(f"symbols={len(x)} container_bytes={len(data)} "
          f"bits_per_symbol={8 * len(data) / len(x):.6f}")
    return 0


def _cmd_decompress(args) -> int:
    with open(args.container, "rb") as handle:
        data = handle.read()
    y = _read_symbols(args.side, args.side_alphabet, args.bits)
    x = decompress_container(data, y)
    _write_symbols(args.output, x, args.bits)
    print(f"symbols={len(x)} output={args.output}")
    return 0


def _checkpoints(n: int, points: int = 12) -> list[int]:
    if n <= 2:
        return [n]
    grid = np.unique(np.geomspace(2, n, points).round().astype(int))
    return [int(v) for v in grid]


def _open_out(path: str):
    if path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


_DEFAULT_L = {"fig1": [5, 10, 15], "fig2": [15], "fig3": [5, 10, 15],
              "lemma1": [3], "advantage": [15]}


def _cmd_simulate(args) -> int:
    model = correlated_binary_model(args.q)
    if args.L is None:
        args.L = _DEFAULT_L.get(args.experiment, [15])
    out, own = _open_out(args.out)
    try:
        if args.experiment == "fig1":
            grid = [(L, n) for L in args.L for n in _checkpoints(args.N)]
            rows = run_rate_experiment(
                1, model, grid, trials=args.trials, seed=args.seed, q=args.q
            )
            write_rate_csv(rows, out)
        elif args.experiment == "fig2":
            rows = []
            for algorithm in (1, 2, 3):
                grid = [(args.L[0], n) for n in _checkpoints(args.N)]
                rows.extend(
                    run_rate_experiment(
                        algorithm,
                        model,
                        grid,
                        trials=args.trials,
                        seed=args.seed,
                        q=args.q,
                        x_offset_bits=args.m if algorithm == 2 else None,
                    )
                )
            write_rate_csv(rows, out)
        elif args.experiment == "fig3":
            rows = []
            for algorithm in (1, 3):
                grid = [(L, n) for L in args.L for n in _checkpoints(args.N)]
                rows.extend(
                    run_rate_experiment(
                        algorithm, model, grid, trials=args.trials, seed=args.seed, q=args.q
                    )
                )
            write_rate_csv(rows, out)
        elif args.experiment == "lemma1":
            rows = kac_bound_check(
                model, args.L[0], total_symbols=args.symbols, seed=args.seed
            )
            write_match_bound_csv(rows, out)
        elif args.experiment == "window":
            grid = [(nw, args.K if args.K else args.k_factor * nw) for nw in args.nw]
            rows = run_rate_experiment(
                4, model, grid, trials=args.trials, seed=args.seed, q=args.q
            )
            write_rate_csv(rows, out)
        elif args.experiment == "advantage":
            x, y = generate(model, args.L[0] * args.N, args.seed)
            plain_cfg = FixedParseConfig(args.L[0], args.N, 1)
            flag_cfg = FixedParseConfig(args.L[0], args.N, 2, x_offset_bits=args.m)
            _, plain = encode_fixed(x, y, plain_cfg)
            _, flagged = encode_fixed(x, y, flag_cfg)
            rows = flag_advantage(
                plain, flagged, plain_cfg.raw_block_bits, args.m,
                checkpoints=_checkpoints(args.N),
            )
            write_advantage_csv(rows, out)
        else:  # pragma: no cover - argparse restricts choices
            raise ValueError(f"unknown_experiment name={args.experiment}")
    finally:
        if own:
            out.close()
    return 0


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clzsi",
        description="Lossless compression against shared side information.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    comp = sub.add_parser("compress", help="compress a file against a side file")
    comp.add_argument("input")
    comp.add_argument("side")
    comp.add_argument("-o", "--output", required=True)
    comp.add_argument("--algorithm", type=int, choices=(1, 2, 3, 4), required=True)
    comp.add_argument("--L", type=int, help="block length (algorithms 1-3)")
    comp.add_argument("--m", type=int, help="fallback offset code bits (algorithm 2)")
    comp.add_argument("--nw", type=int, help="window size (algorithm 4)")
    comp.add_argument("--alphabet", type=int, default=2)
    comp.add_argument("--side-alphabet", type=int, default=2)
    comp.add_argument("--bits", action="store_true",
                      help="treat each input byte as eight binary symbols")
    comp.set_defaults(func=_cmd_compress)

    dec = sub.add_parser("decompress", help="restore a container against a side file")
    dec.add_argument("container")
    dec.add_argument("side")
    dec.add_argument("-o", "--output", required=True)
    dec.add_argument("--side-alphabet", type=int, default=2)
    dec.add_argument("--bits", action="store_true",
                     help="pack decoded binary symbols back into bytes")
    dec.set_defaults(func=_cmd_decompress)

    sim = sub.add_parser("simulate", help="run a simulation experiment, emit CSV")
    sim.add_argument(
        "experiment",
        choices=("fig1", "fig2", "fig3", "lemma1", "window", "advantage"),
    )
    sim.add_argument("--q", type=float, default=0.9)
    sim.add_argument("--L", type=_int_list, default=None,
                     help="comma-separated block lengths (default per experiment)")
    sim.add_argument("--N", type=int, default=2000, help="number of blocks")
    sim.add_argument("--m", type=int, default=3)
    sim.add_argument("--nw", type=_int_list, default=[256, 4096, 65536],
                     help="comma-separated window sizes")
    sim.add_argument("--K", type=int, default=0,
                     help="total symbols for the window experiment (default k-factor * nw)")
    sim.add_argument("--k-factor", type=int, default=10)
    sim.add_argument("--symbols", type=int, default=1_000_000,
                     help="simulated symbols for lemma1")
    sim.add_argument("--trials", type=int, default=30)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", default="-")
    sim.set_defaults(func=_cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _InputError as exc:
        return _fail(EXIT_INPUT, exc.key, **exc.fields)
    except ChecksumMismatchError as exc:
        return _fail(EXIT_CHECKSUM, "checksum_mismatch", detail=repr(str(exc)))
    except (ContainerFormatError, ClzsiError) as exc:
        return _fail(EXIT_CORRUPT, "corrupt_container", detail=repr(str(exc)))
    except (ValueError, OSError) as exc:
        return _fail(EXIT_INPUT, "invalid_input", detail=repr(str(exc)))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
