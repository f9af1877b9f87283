"""Command-line entry point: ``solve``, ``verify``, ``generate`` and ``bench``.

Exit status is 0 on success, 1 when a verification fails (the witness is
printed) and 2 for usage, input or unsupported-pairing errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import bench as benchmod
from .additive import partition_instance
from .approx import DEFAULT_XI, SUBMODULAR_BETA, ScalingParams, scale_set
from .contract import Contract, Instance, SolveReport, is_equilibrium
from .instances import (
    RANDOM_KINDS,
    InstanceFormatError,
    gen_random,
    gen_subadditive_lb,
    gen_xos_lb,
    load,
    serialize,
)
from .setfn import CorruptRepresentation, UnsupportedQuery, value
from .verify import (
    CLASSES,
    brute_force_opt,
    check_class,
    check_lemma_decomposition,
    check_lemma_half_value,
    check_lemma_marginals,
    check_lemma_sqrt_costs,
    check_sandwich,
    check_scaling_output,
    check_xos_lb_clauses,
    lb_family_report,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CHECKS = ("class", "lemma21", "lemma31", "lemma32", "lemma33", "scaling", "lb-family")
GEN_FAMILIES = ("subadditive-lb", "xos-lb", "partition") + tuple(f"random-{k}" for k in RANDOM_KINDS)


class UsageError(Exception):
    pass


def _parse_number(text: str):
    """Exact for ``p/q`` and integer literals, float otherwise."""
    try:
        if "/" in text or text.lstrip("-").isdigit():
            return Fraction(text)
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _seed_list(text: str) -> list[int]:
    # "a:b" is the half-open range, otherwise a comma list
    if ":" in text:
        lo, hi = text.split(":", 1)
        try:
            return list(range(int(lo), int(hi)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad seed range {text!r}") from None
    return _int_list(text)


def _str_list(text: str) -> list[str]:
    return [x for x in text.replace(",", " ").split() if x]


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _fmt_set(S) -> str:
    return "{" + ",".join(str(i) for i in sorted(S)) + "}"


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if args.format == "structured":
        sys.stdout.write(json.dumps(benchmod._encode_tree(payload), indent=1, sort_keys=True) + "\n")
    else:
        sys.stdout.write("\n".join(text_lines) + "\n")


def _load(path: str) -> Instance:
    try:
        return load(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    except InstanceFormatError as exc:
        raise UsageError(f"malformed instance {path}: {exc}") from None


# --------------------------------------------------------------------------
# solve


def _recompute_g(inst: Instance, report: SolveReport):
    """``g`` from the contract itself: principal keeps ``1 - sum(alpha)`` of ``f(S)``."""
    if not report.S:
        return value(inst.f, report.S) * 0
    return (1 - sum(report.alpha[i] for i in sorted(report.S))) * value(inst.f, report.S)


def cmd_solve(args) -> int:
    inst = _load(args.inp)
    try:
        report = benchmod.solve(inst, args.alg, args.epsilon, args.xi, args.beta)
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    except UnsupportedQuery as exc:
        raise UsageError(f"{args.alg} unsupported for {inst.f.kind}: {exc}") from None
    g_check = _recompute_g(inst, report)
    if report.g != g_check and not math.isclose(report.g, g_check, rel_tol=1e-9, abs_tol=1e-12):
        print(f"error: reported g={report.g} disagrees with contract g={g_check}", file=sys.stderr)
        return EXIT_FAIL
    if not is_equilibrium(inst, Contract(report.alpha, report.S)):
        print(f"error: contract for S={_fmt_set(report.S)} is not an equilibrium", file=sys.stderr)
        return EXIT_FAIL
    if args.with_opt and report.g_star is None:
        try:
            report.attach_optimum(brute_force_opt(inst).g_star)
        except UnsupportedQuery as exc:
            raise UsageError(str(exc)) from None

    payload = {
        "algorithm": report.algorithm, "S": sorted(report.S),
        "alpha": [report.alpha[i] for i in range(inst.n)], "g": report.g,
        "queries": report.queries.as_dict(), "candidates": report.candidates,
    }
    label = "S*" if args.alg == "brute" else "S"
    glabel = "g*" if args.alg == "brute" else "g"
    lines = [f"algorithm: {report.algorithm}", f"{label}={_fmt_set(report.S)}",
             f"{glabel}={_fmt(report.g)}",
             "alpha: " + " ".join(_fmt(report.alpha[i]) for i in sorted(report.S)),
             "queries: " + " ".join(f"{k}={v}" for k, v in report.queries.as_dict().items())]
    if report.g_star is not None:
        payload["g_star"] = report.g_star
        payload["ratio"] = report.ratio
        if args.alg != "brute":
            lines.append(f"g*={_fmt(report.g_star)} ratio={report.ratio}")
    if args.timing:
        payload["wall_time"] = report.wall_time
        lines.append(f"wall_time: {report.wall_time:.6f}s")
    _emit(args, payload, lines)
    return EXIT_OK


# --------------------------------------------------------------------------
# verify


def _verdict(name: str, passed: bool, witness, lines: list[str]) -> None:
    lines.append(f"{name}: {'PASS' if passed else 'FAIL'}")
    if not passed and witness is not None:
        shown = ", ".join(_fmt_set(w) if isinstance(w, frozenset) else _fmt(w) for w in witness)
        lines.append(f"  witness: {shown}")


def cmd_verify(args) -> int:
    inst = _load(args.inp)
    lines: list[str] = []
    payload: dict = {"check": args.check}
    ok = True
    try:
        if args.check == "class":
            classes = [args.cls] if args.cls else list(CLASSES)
            payload["classes"] = {}
            for cls in classes:
                try:
                    rep = check_class(inst.f, cls)
                except (CorruptRepresentation, UnsupportedQuery) as exc:
                    if args.cls:
                        raise UsageError(str(exc)) from None
                    lines.append(f"{cls}: skipped ({exc})")
                    continue
                payload["classes"][cls] = {"passed": rep.passed, "witness": _witness(rep.witness)}
                _verdict(cls, rep.passed, rep.witness, lines)
            # class verdicts are reported, not asserted
        elif args.check == "scaling":
            if args.set is None or args.psi is None:
                raise UsageError("scaling needs --set and --psi")
            params = ScalingParams(args.psi, args.delta)
            U = scale_set(inst.f, args.set, params)
            rep = check_scaling_output(inst.f, args.set, params, U)
            ok = rep.passed
            payload.update(U=sorted(U), passed=rep.passed, failed=list(rep.witness or ()))
            lines.append(f"U={_fmt_set(U)} f(U)={_fmt(value(inst.f, U))}")
            _verdict("scaling", rep.passed, rep.witness, lines)
        elif args.check == "lb-family":
            ok = _verify_family(inst, payload, lines)
        else:
            rep = {
                "lemma21": lambda: check_lemma_marginals(inst, args.trials, args.seed),
                "lemma31": lambda: check_lemma_decomposition(inst),
                "lemma32": lambda: check_lemma_sqrt_costs(inst),
                "lemma33": lambda: check_lemma_half_value(inst),
            }[args.check]()
            ok = rep.passed
            payload.update(passed=rep.passed, checked=rep.checked, witness=_witness(rep.witness),
                           details=_witness_tree(rep.details))
            _verdict(args.check, rep.passed, rep.witness, lines)
            lines.append(f"  checked: {rep.checked}")
            for k, v in rep.details.items():
                lines.append(f"  {k}: {_fmt_set(v) if isinstance(v, frozenset) else _fmt(v)}")
    except (UnsupportedQuery, CorruptRepresentation) as exc:
        raise UsageError(f"{args.check} unsupported for {inst.f.kind} at n={inst.n}: {exc}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(args, payload, lines)
    return EXIT_OK if ok else EXIT_FAIL


def _witness(w):
    if w is None:
        return None
    return [sorted(x) if isinstance(x, frozenset) else x for x in w]


def _witness_tree(d: dict) -> dict:
    return {k: sorted(v) if isinstance(v, frozenset) else v for k, v in d.items()}


def _verify_family(inst: Instance, payload: dict, lines: list[str]) -> bool:
    rep = lb_family_report(inst)
    d = rep.details
    lines.append(f"family: {d['family']} n={d['n']}")
    lines.append(f"g_T(T)={_fmt(d['g_T'])}")
    lines.append(f"max-other={_fmt(d['max_other'])} at {_fmt_set(d['max_other_set'])}")
    lines.append(f"unique optimum: {d['unique_optimum']}")
    lines.append("per-cardinality max over S != T:")
    for k, g in d["per_cardinality"].items():
        lines.append(f"  |S|={k}: {_fmt(g)}")
    _verdict("bounds", rep.passed, rep.witness, lines)
    ok = rep.passed
    extra = {}
    if d["family"] == "subadditive-lb":
        sand = check_sandwich(inst)
        _verdict(f"sandwich (factor {sand.details.get('factor', '-')})", sand.passed, sand.witness, lines)
        extra["sandwich"] = sand.passed
        ok = ok and sand.passed
    else:
        clauses = check_xos_lb_clauses(inst.n, inst.f.bump_set)
        _verdict("clause support", clauses.passed, clauses.witness, lines)
        extra["clause_support"] = clauses.passed
        ok = ok and clauses.passed
    payload.update(_witness_tree({k: v for k, v in d.items()}), passed=ok,
                   per_cardinality={str(k): v for k, v in d["per_cardinality"].items()}, **extra)
    return ok


# --------------------------------------------------------------------------
# generate / bench


def cmd_generate(args) -> int:
    fam = args.family
    if fam == "partition":
        if not args.weights:
            raise UsageError("partition needs --weights")
        try:
            inst = partition_instance(args.weights)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        if args.n is None:
            raise UsageError(f"{fam} needs --n")
        try:
            if fam == "subadditive-lb":
                inst = gen_subadditive_lb(args.n, args.T, args.seed)
            elif fam == "xos-lb":
                inst = gen_xos_lb(args.n, args.T, args.seed)
            else:
                inst = gen_random(fam[len("random-"):], args.n, args.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    text = serialize(inst)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc.strerror or exc}") from None
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        config = benchmod.BenchConfig(
            families=tuple(args.family), sizes=tuple(args.n), seeds=tuple(args.seeds),
            algorithms=tuple(args.alg), epsilon=args.epsilon, xi=args.xi, beta=args.beta,
            timing=args.timing)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        result = benchmod.run_bench(config)
    except benchmod.BenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = benchmod.to_structured(result) if args.format == "structured" else benchmod.to_text(result)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="multicontract", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, inp=True):
        if inp:
            sp.add_argument("--in", dest="inp", required=True, help="instance file")
        sp.add_argument("--format", choices=("text", "structured"), default="text")

    s = sub.add_parser("solve", help="compute a contract")
    common(s)
    s.add_argument("--alg", choices=benchmod.ALGORITHMS, required=True)
    s.add_argument("--epsilon", type=float, default=0.1)
    s.add_argument("--xi", type=float, default=DEFAULT_XI)
    s.add_argument("--beta", type=float, default=SUBMODULAR_BETA, help="approximate-demand factor for submod")
    s.add_argument("--with-opt", action="store_true", help="also brute-force g* and report the ratio")
    s.add_argument("--timing", action="store_true")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check class membership or a structural property")
    common(v)
    v.add_argument("--check", choices=CHECKS, required=True)
    v.add_argument("--class", dest="cls", choices=CLASSES)
    v.add_argument("--trials", type=int, default=2000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--set", type=_int_list, help="scaling: the set T")
    v.add_argument("--psi", type=_parse_number)
    v.add_argument("--delta", type=_parse_number, default=Fraction(1, 2))
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("generate", help="write an instance file")
    g.add_argument("--family", choices=GEN_FAMILIES, required=True)
    g.add_argument("--n", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--T", type=_int_list, help="explicit bump set for the lower-bound families")
    g.add_argument("--weights", type=_int_list)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    b = sub.add_parser("bench", help="approximation ratios against brute force")
    b.add_argument("--family", type=_str_list, required=True)
    b.add_argument("--n", type=_int_list, required=True)
    b.add_argument("--seeds", type=_seed_list, default=[0])
    b.add_argument("--alg", type=_str_list, required=True)
    b.add_argument("--epsilon", type=float, default=0.1)
    b.add_argument("--xi", type=float, default=DEFAULT_XI)
    b.add_argument("--beta", type=float, default=SUBMODULAR_BETA)
    b.add_argument("--timing", action="store_true", help="record wall time (breaks byte-identity)")
    b.add_argument("--format", choices=("text", "structured"), default="text")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
