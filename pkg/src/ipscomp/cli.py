"""Command-line entry point: ``ipscomp <command> <file> [flags]``.

Exit codes: 0 accepted / zero, 1 rejected / nonzero, 2 usage or I/O error.
Every command prints one machine-parsable record line on stdout.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

from .circuit import DEGREE_CAP, TERM_CAP, parse_netlist
from .errors import IpsError, Malformed, ParseError, SourceNotZero, VerificationFailed
from .field import select_field
from .gateenc import encode, refute_variety
from .ips import cert_to_text, verify
from .pipeline import certify, choose_field, compile_cnf, parse_bundle, verify_bundle
from .pit import pit

SEED_ENV = "IPSCOMP_SEED"
EXIT_OK, EXIT_REJECT, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class CliConfig:
    seed: int
    error_bound: Fraction
    degree_cap: int
    term_cap: int
    out: str | None
    mode: str
    exact: bool
    verbose: bool

    def __post_init__(self):
        if not 0 < self.error_bound < 1:
            raise UsageError("--error-bound must lie strictly between 0 and 1")
        if self.degree_cap <= 0 or self.term_cap <= 0:
            raise UsageError("caps must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise UsageError("--seed must be a 64-bit unsigned integer")

    @property
    def backend(self) -> str:
        return "exact" if self.exact else "auto"


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} is not an integer: {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ipscomp", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"RNG seed (default ${SEED_ENV} or 0)")
    common.add_argument("--error-bound", type=_fraction, default=Fraction(1, 2 ** 30),
                        help="randomized PIT error bound as num/den (default 1/2^30)")
    common.add_argument("--exact", action="store_true", help="insist on exact PIT")
    common.add_argument("--degree-cap", type=int, default=DEGREE_CAP)
    common.add_argument("--term-cap", type=int, default=TERM_CAP)
    common.add_argument("--out", "-o", default=None, help="output file (default stdout for text artifacts)")
    common.add_argument("--mode", choices=("cnf", "variety"), default="cnf")
    common.add_argument("--verbose", "-v", action="store_true", help="print the full transcript")
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "pit": "identity test a circuit",
        "select-field": "report the field K used by the compiler",
        "encode": "write the gate equation system",
        "refute-variety": "refute the equation system of a zero circuit",
        "compile": "write the CNF of a circuit (DIMACS)",
        "certify": "compile, refute and verify; writes a bundle",
        "verify": "check a bundle",
    }
    for name, h in helps.items():
        p = sub.add_parser(name, parents=[common], help=h)
        p.add_argument("file", help="bundle" if name == "verify" else "circuit netlist")
    return ap


def _config(ns) -> CliConfig:
    seed = ns.seed if ns.seed is not None else _default_seed()
    return CliConfig(seed, ns.error_bound, ns.degree_cap, ns.term_cap, ns.out, ns.mode, ns.exact, ns.verbose)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _emit(cfg: CliConfig, text: str, out) -> None:
    if cfg.out is None:
        out.write(text)
        return
    try:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {cfg.out}: {exc.strerror}") from None


def _circuit(path: str):
    return parse_netlist(_read(path))


def cmd_pit(cfg, ns, out) -> int:
    C = _circuit(ns.file)
    v = pit(C, exact=True if cfg.exact else None, error_bound=cfg.error_bound, seed=cfg.seed,
            degree_cap=cfg.degree_cap, term_cap=cfg.term_cap)
    print(v.record(), file=out)
    return EXIT_OK if v.is_zero else EXIT_REJECT


def cmd_select_field(cfg, ns, out) -> int:
    C = _circuit(ns.file)
    sel = choose_field(C, cfg.seed) if cfg.mode == "cnf" else select_field(C, cfg.seed)
    why = " ".join(str(x) for x in sel.rationale)
    print(f"source=[{sel.source.to_text()}] target=[{sel.target.to_text()}] rationale=[{why}]", file=out)
    return EXIT_OK


def cmd_encode(cfg, ns, out) -> int:
    E = encode(_circuit(ns.file))
    _emit(cfg, E.to_text(), out)
    if cfg.out is not None:
        print(f"equations={len(E.equations)} variables={len(E.var_names)} out={cfg.out}", file=out)
    return EXIT_OK


def cmd_refute_variety(cfg, ns, out) -> int:
    C = _circuit(ns.file)
    v = pit(C, exact=True if cfg.exact else None, error_bound=cfg.error_bound, seed=cfg.seed)
    if not v.is_zero:
        print(v.record(), file=out)
        return EXIT_REJECT
    R = refute_variety(C)
    rep = verify(R, backend=cfg.backend, error_bound=cfg.error_bound, seed=cfg.seed,
                 degree_cap=cfg.degree_cap, term_cap=cfg.term_cap)
    if cfg.out is not None:
        _emit(cfg, cert_to_text(R), out)
    if cfg.verbose:
        print("\n".join(rep.lines()), file=out)
    print(rep.record(), file=out)
    return EXIT_OK if rep.accepted else EXIT_REJECT


def cmd_compile(cfg, ns, out) -> int:
    comp = compile_cnf(_circuit(ns.file), cfg.seed)
    text = comp.cnf.to_dimacs()
    if cfg.out is None:
        out.write(text)
    else:
        _emit(cfg, text, out)
    print(f"cnf vars={comp.cnf.num_vars} clauses={len(comp.cnf.clauses)} field=[{comp.K.to_text()}]",
          file=out if cfg.out is not None else sys.stderr)
    return EXIT_OK


def cmd_certify(cfg, ns, out) -> int:
    C = _circuit(ns.file)
    backend = cfg.backend
    try:
        bundle = certify(C, mode=cfg.mode, seed=cfg.seed, backend=backend, error_bound=cfg.error_bound)
    except SourceNotZero:
        v = pit(C, error_bound=cfg.error_bound, seed=cfg.seed)
        print(v.record(), file=out)
        return EXIT_REJECT
    text = bundle.to_text()
    if cfg.out is None:
        out.write(text)
    else:
        _emit(cfg, text, out)
        if cfg.verbose:
            print(bundle.sections["transcript"], file=out)
        print(bundle.report.record(), file=out)
    return EXIT_OK


def cmd_verify(cfg, ns, out) -> int:
    text = _read(ns.file)
    try:
        bundle = parse_bundle(text)
        rep = verify_bundle(bundle, backend=cfg.backend, error_bound=cfg.error_bound,
                            seed=cfg.seed if ns.seed is not None or SEED_ENV in os.environ else None)
    except (VerificationFailed, Malformed) as exc:
        stage = exc.stage if isinstance(exc, VerificationFailed) else "parse"
        print(f"verification=FAILED stage={stage}", file=out)
        if cfg.verbose:
            print(str(exc), file=out)
        return EXIT_REJECT
    if cfg.verbose:
        print("\n".join(rep.lines()), file=out)
    print(rep.record(), file=out)
    return EXIT_OK


COMMANDS = {
    "pit": cmd_pit,
    "select-field": cmd_select_field,
    "encode": cmd_encode,
    "refute-variety": cmd_refute_variety,
    "compile": cmd_compile,
    "certify": cmd_certify,
    "verify": cmd_verify,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = _config(ns)
        return COMMANDS[ns.command](cfg, ns, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"error: {ns.file}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IpsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
