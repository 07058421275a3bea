"""``beer`` command-line entry point.

Exit status: 0 on success, 1 on a domain failure (infeasible profile,
invalid code, codes not equivalent), 2 on usage or file-format errors.
Every output file is written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import tempfile
from pathlib import Path
from typing import Any, Sequence

from .beep import BeepChip, run_beep
from .code import (
    CODE_FORMAT,
    FormatError,
    InvalidCodeError,
    code_from_dict,
    codes_equivalent,
    sample_random_code,
)
from .experiments import (
    BeepCase,
    SweepConfig,
    fig1_result,
    run_beep_sweep,
    run_fig1_distribution,
    run_noise_study,
    run_uniqueness_sweep,
)
from .profile import (
    DEFAULT_THRESHOLD,
    OBSERVED_FORMAT,
    PROFILE_FORMAT,
    MiscorrectionProfile,
    ObservedProfile,
    ProfileError,
    enumerate_test_patterns,
    exhaustive_profile,
    monte_carlo_profile,
    read_dump,
    threshold_filter,
)
from .retention import CellPolarity, RetentionErrorModel, TransientNoiseModel
from .solver import solve


class UsageError(Exception):
    pass


# -- file helpers ------------------------------------------------------------

def atomic_write(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


_FLAT_LIST = re.compile(r"\[\s+([^\[\]{}\"]*?)\s+\]")


def dump_json(obj: Any) -> str:
    """Indented JSON with lists of numbers kept on one line."""
    text = json.dumps(obj, indent=2)
    text = _FLAT_LIST.sub(lambda m: "[" + ", ".join(x.strip() for x in m.group(1).split(",")) + "]", text)
    return text + "\n"


def emit(args, obj: Any) -> None:
    text = dump_json(obj)
    if getattr(args, "output", None):
        atomic_write(args.output, text)
    else:
        sys.stdout.write(text)


def read_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path} is not valid JSON: {exc}") from exc


def load_code(path: str):
    return code_from_dict(read_json(path))


def int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def probability(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError("must lie in [0, 1]")
    return v


def polarity_for(args, n: int) -> CellPolarity | None:
    cells = getattr(args, "anti_cells", None)
    if not cells:
        return None
    if any(not 0 <= i < n for i in cells):
        raise UsageError(f"anti-cell positions must lie in [0, {n})")
    return CellPolarity.from_flags([i in set(cells) for i in range(n)])


# -- subcommands -------------------------------------------------------------

def cmd_gen_code(args) -> int:
    code = sample_random_code(args.k, args.seed)
    emit(args, code.to_dict())
    return 0


def cmd_profile(args) -> int:
    code = load_code(args.code)
    pol = polarity_for(args, code.n)
    patterns = enumerate_test_patterns(code.k, args.weights)
    if args.mode == "exhaustive":
        prof = exhaustive_profile(code, patterns, pol)
    else:
        if args.seed is None:
            raise UsageError("--mode mc needs --seed")
        model = RetentionErrorModel(args.probability, seed=args.seed)
        obs = monte_carlo_profile(
            code, patterns, pol, model, args.words, TransientNoiseModel(args.noise), jobs=args.jobs
        )
        if args.observed_out:
            atomic_write(args.observed_out, dump_json(obs.to_dict()))
        prof = threshold_filter(obs, args.threshold)
    body = prof.to_dict()
    if pol is not None:
        body["anti_cells"] = [i for i in range(code.n) if pol.is_anti(i)]
        body["n"] = code.n
    emit(args, body)
    return 0


def _load_profile_for_solve(args) -> tuple[MiscorrectionProfile, CellPolarity | None]:
    obj = read_json(args.profile)
    fmt = obj.get("format") if isinstance(obj, dict) else None
    if fmt == PROFILE_FORMAT:
        prof = MiscorrectionProfile.from_dict(obj)
    elif fmt == OBSERVED_FORMAT:
        prof = threshold_filter(ObservedProfile.from_dict(obj), args.threshold)
    else:
        raise FormatError(f"expected {PROFILE_FORMAT!r} or {OBSERVED_FORMAT!r}, got {fmt!r}")
    pol = None
    if obj.get("anti_cells"):
        n = int(obj["n"])
        pol = CellPolarity.from_flags([i in set(obj["anti_cells"]) for i in range(n)])
    return prof, pol


def cmd_solve(args) -> int:
    prof, pol = _load_profile_for_solve(args)
    if args.all and args.limit is not None:
        raise UsageError("--all and --limit are mutually exclusive")
    limit = None if args.all or args.limit is None else args.limit
    out = solve(prof, prof.k, limit, pol=pol, jobs=args.jobs)
    emit(args, out.to_dict(prof.k, timings=args.timings))
    if not out.solutions:
        print("no code satisfies profile", file=sys.stderr)
        return 1
    return 0


def cmd_check_equiv(args) -> int:
    a, b = load_code(args.code_a), load_code(args.code_b)
    same = codes_equivalent(a, b)
    print("equivalent" if same else "not equivalent")
    return 0 if same else 1


def cmd_beep(args) -> int:
    code = load_code(args.code)
    if any(not 0 <= i < code.n for i in args.mask):
        raise UsageError(f"mask positions must lie in [0, {code.n})")
    pol = polarity_for(args, code.n)
    chip = BeepChip(frozenset(args.mask), args.probability, seed=args.seed, pol=pol)
    report = run_beep(code, chip, args.passes, args.words_per_pattern, max_subset=args.max_subset)
    emit(args, report.to_dict())
    return 0


def cmd_sweep(args) -> int:
    if args.experiment == "uniqueness":
        cfg = SweepConfig(tuple(args.k), args.codes_per_k, tuple(args.weights), seed=args.seed)
        result = run_uniqueness_sweep(cfg, max_solutions=args.max_solutions, jobs=args.jobs)
    elif args.experiment == "fig1":
        if len(set(args.k)) != 1:
            raise UsageError("fig1 compares codes of one size; pass a single --k")
        codes = [sample_random_code(args.k[0], s) for s in args.code_seeds]
        counts = run_fig1_distribution(
            codes, args.rber, args.words, args.data_pattern, seed=args.seed, jobs=args.jobs
        )
        result = fig1_result(codes, counts, args.rber, args.words, args.data_pattern, args.seed)
    elif args.experiment == "beep":
        cases = [
            BeepCase(k, e, p, passes)
            for k in args.k
            for e in args.errors
            for p in (args.probabilities or [1.0])
            for passes in args.passes
        ]
        result = run_beep_sweep(cases, args.trials, seed=args.seed, jobs=args.jobs)
    else:
        cfg = SweepConfig(tuple(args.k), args.codes_per_k, tuple(args.weights), seed=args.seed)
        result = run_noise_study(
            cfg, probability=(args.probabilities or [0.5])[0], words=args.words,
            noise_levels=args.noise_levels, threshold=args.threshold, jobs=args.jobs,
        )
    if args.format == "csv":
        text = result.to_csv()
        if args.output:
            atomic_write(args.output, text)
        else:
            sys.stdout.write(text)
    else:
        emit(args, result.to_dict())
    return 0


def cmd_ingest(args) -> int:
    try:
        binary = Path(args.dump).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {args.dump}: {exc.strerror}") from exc
    obs = read_dump(binary, read_json(args.sidecar))
    emit(args, obs.to_dict())
    if args.profile_out:
        atomic_write(args.profile_out, dump_json(threshold_filter(obs, args.threshold).to_dict()))
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beer",
        description="Recover on-die ECC functions from miscorrection profiles and "
        "profile pre-correction errors.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, help_text: str, fn) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=fn)
        return p

    def out(p):
        p.add_argument("-o", "--output", help="output file (default: standard output)")

    def jobs(p):
        p.add_argument("--jobs", type=positive_int, default=1,
                       help="worker processes; results do not depend on this (default 1)")

    p = add("gen-code", "Sample a random standard-form SEC Hamming code.", cmd_gen_code)
    p.add_argument("--k", type=positive_int, required=True, help="data bits")
    p.add_argument("--seed", type=int, required=True, help="random seed")
    out(p)

    p = add("profile", "Build a miscorrection profile for a code.", cmd_profile)
    p.add_argument("--code", required=True, help=f"{CODE_FORMAT} file")
    p.add_argument("--mode", choices=("exhaustive", "mc"), default="exhaustive",
                   help="exact oracle or Monte-Carlo estimate plus threshold filter")
    p.add_argument("--weights", type=int_list, default=[1, 2],
                   help="CHARGED-cell counts of the test patterns, e.g. 1,2 (default 1,2)")
    p.add_argument("--probability", type=probability, default=0.5,
                   help="per-cell failure probability in mc mode (default 0.5)")
    p.add_argument("--words", type=positive_int, default=100_000,
                   help="simulated words per pattern in mc mode (default 100000)")
    p.add_argument("--noise", type=probability, default=0.0,
                   help="transient flip probability per read bit in mc mode (default 0)")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                   help="relative threshold of the filter in mc mode (default 0.01)")
    p.add_argument("--seed", type=int, help="random seed (required in mc mode)")
    p.add_argument("--anti-cells", type=int_list, default=None,
                   help="codeword positions that are anti-cells, e.g. 0,3")
    p.add_argument("--observed-out", help="also write the raw counts (mc mode)")
    out(p)
    jobs(p)

    p = add("solve", "Find every code consistent with a profile.", cmd_solve)
    p.add_argument("--profile", required=True,
                   help=f"{PROFILE_FORMAT} file, or {OBSERVED_FORMAT} counts to threshold")
    p.add_argument("--all", action="store_true", help="enumerate every solution (the default)")
    p.add_argument("--limit", type=positive_int, help="stop after this many solutions")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                   help="relative threshold applied to observed counts (default 0.01)")
    p.add_argument("--timings", action="store_true",
                   help="include wall time in the output (makes it run-dependent)")
    out(p)
    jobs(p)

    p = add("check-equiv", "Test whether two codes are equivalent; exit 1 if not.", cmd_check_equiv)
    p.add_argument("code_a", help=f"{CODE_FORMAT} file")
    p.add_argument("code_b", help=f"{CODE_FORMAT} file")

    p = add("beep", "Locate pre-correction errors in a simulated word with a known code.", cmd_beep)
    p.add_argument("--code", required=True, help=f"{CODE_FORMAT} file")
    p.add_argument("--mask", type=int_list, required=True,
                   help="hidden error-prone codeword positions, e.g. 5,6")
    p.add_argument("--probability", type=probability, default=1.0,
                   help="failure probability of each hidden cell (default 1)")
    p.add_argument("--passes", type=positive_int, default=1, help="passes over the codeword")
    p.add_argument("--words-per-pattern", type=positive_int, default=None,
                   help="words tested per crafted pattern (default 1 if deterministic, else 64)")
    p.add_argument("--max-subset", type=positive_int, default=3,
                   help="largest set of known errors combined with the target (default 3)")
    p.add_argument("--anti-cells", type=int_list, default=None,
                   help="codeword positions that are anti-cells")
    p.add_argument("--seed", type=int, required=True, help="random seed")
    out(p)

    p = add("sweep", "Run a simulation study.", cmd_sweep)
    p.add_argument("--experiment", choices=("uniqueness", "fig1", "beep", "noise"), required=True)
    p.add_argument("--seed", type=int, required=True, help="random seed")
    p.add_argument("--k", type=int_list, default=[4, 8, 11, 16], help="data-bit counts")
    p.add_argument("--codes-per-k", type=positive_int, default=50,
                   help="codes sampled per k (uniqueness, noise)")
    p.add_argument("--weights", type=int_list, default=[1, 2], help="pattern weights")
    p.add_argument("--max-solutions", type=positive_int, default=1000,
                   help="cap on solutions counted per code (uniqueness)")
    p.add_argument("--code-seeds", type=int_list, default=[1, 2, 3],
                   help="seeds of the codes compared (fig1)")
    p.add_argument("--rber", type=probability, default=1e-4, help="raw bit error rate (fig1)")
    p.add_argument("--words", type=positive_int, default=1_000_000,
                   help="words per code (fig1) or per pattern (noise)")
    p.add_argument("--data-pattern", type=lambda s: int(s, 0), default=0xFF,
                   help="byte written to every data byte (fig1, default 0xFF)")
    p.add_argument("--errors", type=int_list, default=[2, 3, 4, 5],
                   help="hidden errors per word (beep)")
    p.add_argument("--probabilities", type=float_list, default=None,
                   help="per-cell failure probabilities (beep, default 1.0; noise uses the "
                   "first value, default 0.5)")
    p.add_argument("--passes", type=int_list, default=[1], help="pass counts (beep)")
    p.add_argument("--trials", type=positive_int, default=100, help="trials per case (beep)")
    p.add_argument("--noise-levels", type=float_list, default=[0.0, 1e-4],
                   help="transient flip probabilities (noise)")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                   help="relative threshold (noise)")
    p.add_argument("--format", choices=("json", "csv"), default="json", help="output format")
    out(p)
    jobs(p)

    p = add("ingest", "Turn a raw (written, read) dump into observed counts.", cmd_ingest)
    p.add_argument("--dump", required=True, help="binary dump of (written, read) records")
    p.add_argument("--sidecar", required=True, help="JSON description of the dump")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                   help="relative threshold for --profile-out (default 0.01)")
    p.add_argument("--profile-out", help="also write the thresholded profile")
    out(p)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, FormatError) as exc:
        print(f"beer: error: {exc}", file=sys.stderr)
        return 2
    except (InvalidCodeError, ProfileError) as exc:
        print(f"beer: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"beer: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
