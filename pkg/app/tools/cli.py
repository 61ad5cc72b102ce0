"""
Command-line front end.

Exit codes: 0 decided/verified, 1 negative decision, 2 budget exhausted, 3 input error.
"""
from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path
from typing import Optional, Sequence

from app.config import settings
from app.models.results import SearchBudget
from app.services.explorer import certificate_schema, find_witness
from app.services.extensions import (
    build_catalog,
    dump_catalog,
    load_catalog,
    verify_decomposition,
    verify_prop_twisted,
)
from app.services.nilpotent import ClassLimitError, central_split, crt_order_witness, order_witness
from app.services.seifert import (
    FiniteFiberError,
    SeifertPresentation,
    are_conjugate,
    collect,
    equal,
    format_element,
    lambda_invariants,
)
from app.services.surface import ClosureLimitError
from app.services.words import Alphabet
from app.utils.parsing import load_presentation, parse_word

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_BUDGET = 2
EXIT_INPUT = 3


class InputError(ValueError):
    """Raised for unusable command-line input."""


def _emit(args: argparse.Namespace, payload: dict, text: str) -> None:
    print(json.dumps(payload, sort_keys=True) if args.json else text)


def _presentation(args: argparse.Namespace) -> SeifertPresentation:
    if not args.group:
        raise InputError("--group is required for this command")
    return load_presentation(Path(args.group))


def _elements(p: SeifertPresentation, words: Sequence[str]):
    return [collect(p, parse_word(text, p.alphabet)) for text in words]


def cmd_normalize(args: argparse.Namespace) -> int:
    p = _presentation(args)
    (g,) = _elements(p, [args.word])
    text = format_element(p, g)
    _emit(args, {"normal_form": text, "fiber_exponent": g.fiber_exponent}, text)
    return EXIT_OK


def cmd_equal(args: argparse.Namespace) -> int:
    p = _presentation(args)
    g1, g2 = _elements(p, args.words)
    result = equal(p, g1, g2)
    _emit(args, {"equal": result}, "equal" if result else "not equal")
    return EXIT_OK if result else EXIT_NEGATIVE


def cmd_conj(args: argparse.Namespace) -> int:
    p = _presentation(args)
    g1, g2 = _elements(p, args.words)
    result = are_conjugate(p, g1, g2)
    witness = format_element(p, result.witness) if result.witness else None
    payload = {
        "conjugate": result.conjugate,
        "witness": witness,
        "fiber_offset": result.fiber_offset,
        "stage": result.stage,
    }
    if result.conjugate:
        text = f"conjugate, witness: {witness}"
    elif result.stage == "base":
        text = "not conjugate (images in the base group differ)"
    else:
        text = f"not conjugate (fiber offset {result.fiber_offset} outside {result.lambda_pair.describe()})"
    _emit(args, payload, text)
    return EXIT_OK if result.conjugate else EXIT_NEGATIVE


def cmd_lambda(args: argparse.Namespace) -> int:
    p = _presentation(args)
    (g,) = _elements(p, [args.word])
    try:
        pair = lambda_invariants(p, g)
    except FiniteFiberError as exc:
        raise InputError(str(exc)) from exc
    _emit(args, pair.model_dump(by_alias=True), pair.describe())
    return EXIT_OK


def cmd_order_witness(args: argparse.Namespace) -> int:
    alphabet = Alphabet.free(args.rank)
    word = parse_word(args.word, alphabet, allow_fiber=False)
    try:
        if args.n is not None:
            crt = crt_order_witness(word, args.n, args.rank)
            payload = {"order": crt.order, "components": [c.to_payload(alphabet).model_dump() for c in crt.components]}
            _emit(args, payload, f"central image of order {crt.order} across {len(crt.components)} prime(s)")
            return EXIT_OK
        witness = order_witness(word, args.prime, args.k, args.rank)
    except ClassLimitError as exc:
        raise InputError(str(exc)) from exc
    payload = witness.to_payload(alphabet)
    text = (
        f"class {payload.degree_class}, modulus {payload.prime}^{payload.exponent}, "
        f"verified order {payload.verified_order}, central: {payload.centrality_checked}"
    )
    _emit(args, payload.model_dump(), text)
    return EXIT_OK


def cmd_split(args: argparse.Namespace) -> int:
    p = _presentation(args)
    certificate = central_split(p)
    violations = certificate.validate(args.samples, random.Random(args.seed))
    payload = {
        "relator_order": certificate.relator_order,
        "kernel_samples": certificate.samples_checked,
        "violations": violations,
    }
    text = (
        f"relator order {certificate.relator_order}; "
        f"{certificate.samples_checked} kernel samples, {violations} violations"
    )
    _emit(args, payload, text)
    return EXIT_OK if violations == 0 else EXIT_NEGATIVE


def cmd_verify_finite(args: argparse.Namespace) -> int:
    catalog = load_catalog(Path(args.catalog)) if args.catalog else build_catalog()
    rows = []
    for entry in catalog:
        twisted = verify_prop_twisted(entry.group, entry.subgroup, entry.t)
        decomposition = verify_decomposition(entry.group, entry.subgroup)
        rows.append({
            "name": entry.name,
            "order": entry.group.order,
            "twisted": twisted.passed,
            "decomposition": decomposition.passed,
        })
    if args.dump:
        dump_catalog(catalog, Path(args.dump))
    passed = all(row["twisted"] and row["decomposition"] for row in rows)
    lines = [f"{row['name']:<14} order {row['order']:>3}  twisted={row['twisted']}  decomposition={row['decomposition']}" for row in rows]
    _emit(args, {"passed": passed, "catalog": rows}, "\n".join(lines))
    return EXIT_OK if passed else EXIT_NEGATIVE


def cmd_witness(args: argparse.Namespace) -> int:
    if args.schema:
        print(json.dumps(certificate_schema(), indent=2, sort_keys=True))
        return EXIT_OK
    if not args.words or len(args.words) != 2:
        raise InputError("witness needs two words")
    p = _presentation(args)
    g1, g2 = _elements(p, args.words)
    defaults = SearchBudget.from_settings()
    budget = SearchBudget(
        max_target_order=args.max_order or defaults.max_target_order,
        max_candidates=args.max_candidates or defaults.max_candidates,
        time_limit_seconds=args.time_limit or defaults.time_limit_seconds,
        seed=defaults.seed if args.seed is None else args.seed,
    )
    outcome = find_witness(p, g1, g2, budget)
    if outcome.status == "conjugate":
        text = f"conjugate, witness: {outcome.conjugator}"
        code = EXIT_NEGATIVE
    elif outcome.status == "certificate":
        cert = outcome.certificate
        text = (
            f"separated in {cert.target.name} (order {len(cert.target.labels)}) "
            f"after stage-1 modulus {cert.stage1_modulus}: images {cert.image_g1} and {cert.image_g2}"
        )
        code = EXIT_OK
    else:
        text = f"budget exhausted: {outcome.detail}"
        code = EXIT_BUDGET
    _emit(args, outcome.model_dump(), text)
    return code


def _common_options(nested: bool) -> argparse.ArgumentParser:
    # nested copies must not overwrite values given before the subcommand
    default = argparse.SUPPRESS if nested else None
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", default=default, help="presentation descriptor JSON file")
    common.add_argument("--json", action="store_true", default=default or False, help="emit JSON")
    common.add_argument("--verbose", action="store_true", default=default or False, help="debug logging on stderr")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seifert", description=settings.app_name, parents=[_common_options(False)])
    nested = [_common_options(True)]
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", parents=nested, help="collect h to the right and reduce")
    p.add_argument("word")
    p.set_defaults(handler=cmd_normalize)

    p = sub.add_parser("equal", parents=nested, help="decide equality of two words")
    p.add_argument("words", nargs=2)
    p.set_defaults(handler=cmd_equal)

    p = sub.add_parser("conj", parents=nested, help="decide conjugacy, printing a witness")
    p.add_argument("words", nargs=2)
    p.set_defaults(handler=cmd_conj)

    p = sub.add_parser("lambda", parents=nested, help="fiber offsets preserving the conjugacy class")
    p.add_argument("word")
    p.set_defaults(handler=cmd_lambda)

    p = sub.add_parser("order-witness", parents=nested, help="central image of prescribed order in a p-group quotient")
    p.add_argument("word")
    p.add_argument("--prime", type=int, default=2)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--n", type=int, help="arbitrary order, split over its prime powers")
    p.add_argument("--rank", type=int, default=2)
    p.set_defaults(handler=cmd_order_witness)

    p = sub.add_parser("split", parents=nested, help="central split certificate with sampling validation")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_split)

    p = sub.add_parser("verify-finite", parents=nested, help="exhaustive checks over the finite extension catalog")
    p.add_argument("--catalog", help="read extensions from a catalog JSON file instead of the built-in catalog")
    p.add_argument("--dump", help="write the catalog (tables, subgroups, t and automorphisms) as JSON")
    p.set_defaults(handler=cmd_verify_finite)

    p = sub.add_parser("witness", parents=nested, help="finite quotient separating two conjugacy classes")
    p.add_argument("words", nargs="*")
    p.add_argument("--schema", action="store_true", help="print the certificate JSON schema")
    p.add_argument("--max-order", type=int)
    p.add_argument("--max-candidates", type=int)
    p.add_argument("--time-limit", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=cmd_witness)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    level = logging.DEBUG if args.verbose else settings.log_level.upper()
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s %(message)s", stream=sys.stderr)
    try:
        return args.handler(args)
    except ClosureLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
