"""Command-line surface: validate, analyze, scaffold, whatif, serve.

Reports go to stdout; diagnostics go to stderr, so the output is safe to
pipe. Exit codes are stable:

    0  compliant
    1  internal or I/O error (unreadable file, bad flags)
    2  validation failure (malformed or invariant-breaking cards)
    3  non-compliant or prohibited
    4  indeterminate
    5  out of scope

Environment variables CC_REGISTRY and CC_RULES supply default paths for
``--registry`` and ``--rules``.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from . import __version__
from .card_io import (
    IssueCode,
    Severity,
    ValidationIssue,
    load_card,
    load_card_set,
    scaffold_card,
    serialize_card,
    validate_card,
)
from .engine import (
    ConfigurationError,
    Mutation,
    MutationError,
    ReplaceCard,
    SetValue,
    Verdict,
    analyze,
    what_if,
)
from .model import (
    UNANSWERED,
    AttributeRegistry,
    CardKind,
    ChoiceDomain,
    Choice,
    Flag,
    FlagDomain,
    Level,
    LevelDomain,
    TagSet,
)
from .registry import RegistryFileError, baseline_registry, load_registry
from .report import render_report, whatif_to_dict
from .rules import bundled_rule_table, load_rule_table

EXIT_COMPLIANT = 0
EXIT_INTERNAL = 1
EXIT_VALIDATION = 2
EXIT_NON_COMPLIANT = 3
EXIT_INDETERMINATE = 4
EXIT_OUT_OF_SCOPE = 5

_VERDICT_EXIT = {
    Verdict.COMPLIANT: EXIT_COMPLIANT,
    Verdict.NON_COMPLIANT: EXIT_NON_COMPLIANT,
    Verdict.PROHIBITED: EXIT_NON_COMPLIANT,
    Verdict.INDETERMINATE: EXIT_INDETERMINATE,
    Verdict.OUT_OF_SCOPE: EXIT_OUT_OF_SCOPE,
}

_EXIT_CODE_HELP = (
    "exit codes: 0 compliant, 1 internal/IO error, 2 validation failure, "
    "3 non-compliant or prohibited, 4 indeterminate, 5 out of scope"
)


def _err(message: str) -> None:
    print(message, file=sys.stderr)


def _print_issues(issues: Sequence[ValidationIssue], prefix: str = "") -> None:
    for issue in issues:
        _err(f"{prefix}{issue.path}:{issue.code.value} {issue.message}")


def _issues_exit(issues: Sequence[ValidationIssue]) -> int:
    if any(i.code is IssueCode.IO_ERROR for i in issues):
        return EXIT_INTERNAL
    return EXIT_VALIDATION


def _load_registry_arg(path: str | None) -> AttributeRegistry:
    path = path or os.environ.get("CC_REGISTRY")
    if not path:
        return baseline_registry()
    return load_registry(path)


def _load_rules_arg(path: str | None, registry: AttributeRegistry):
    path = path or os.environ.get("CC_RULES")
    if not path:
        table = bundled_rule_table()
        # A custom registry must still resolve the bundled table.
        from .engine import validate_rule_table

        validate_rule_table(table, registry)
        return table
    return load_rule_table(path, registry)


def _flatten(groups: list[list[str]] | None) -> list[str]:
    return [p for group in groups or [] for p in group]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    registry = _load_registry_arg(args.registry)
    expected = CardKind(args.kind) if args.kind else None
    worst = EXIT_COMPLIANT
    for path in args.paths:
        card, issues = load_card(path, registry)
        if card is not None:
            issues = issues + [
                i for i in validate_card(card, registry) if i not in issues
            ]
            if expected is not None and card.kind is not expected:
                issues.append(
                    ValidationIssue(
                        Severity.ERROR,
                        "kind",
                        f"expected a {expected.value} card, got {card.kind.value}",
                        IssueCode.WRONG_KIND,
                    )
                )
        _print_issues(issues, prefix=f"{path}:")
        if any(i.severity is Severity.ERROR for i in issues):
            worst = max(worst, _issues_exit(issues))
    return worst


def _assemble_from_args(args: argparse.Namespace, registry: AttributeRegistry):
    return load_card_set(
        args.project, _flatten(args.data), _flatten(args.model), registry
    )


def cmd_analyze(args: argparse.Namespace) -> int:
    registry = _load_registry_arg(args.registry)
    table = _load_rules_arg(args.rules, registry)
    card_set, issues = _assemble_from_args(args, registry)
    _print_issues(issues)
    if card_set is None:
        return _issues_exit(issues)
    report = analyze(card_set, table, registry, strict=args.strict)
    sys.stdout.write(render_report(report, args.format))
    return _VERDICT_EXIT[report.verdict]


def cmd_scaffold(args: argparse.Namespace) -> int:
    registry = _load_registry_arg(args.registry)
    text = scaffold_card(CardKind(args.kind), registry)
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            _err(f"cannot write {args.output}: {exc}")
            return EXIT_INTERNAL
    else:
        sys.stdout.write(text)
    return EXIT_COMPLIANT


def _parse_set_literal(
    registry: AttributeRegistry, spec_text: str
) -> tuple[str, str, object]:
    head, eq, literal = spec_text.partition("=")
    card_id, colon, attr_id = head.partition(":")
    if not eq or not colon or not card_id or not attr_id:
        raise MutationError(
            f"malformed --set {spec_text!r}; expected CARDID:ATTR=VALUE"
        )
    definition = registry.lookup(attr_id)
    if definition is None:
        raise MutationError(f"unknown attribute {attr_id!r}")
    literal = literal.strip()
    if literal.lower() in ("null", "~", "unanswered"):
        return card_id, attr_id, UNANSWERED
    domain = definition.domain
    if isinstance(domain, FlagDomain):
        if literal.lower() in ("true", "false"):
            return card_id, attr_id, Flag(literal.lower() == "true")
        raise MutationError(f"{attr_id}: expected true or false, got {literal!r}")
    if isinstance(domain, LevelDomain):
        try:
            return card_id, attr_id, Level(int(literal))
        except ValueError as exc:
            raise MutationError(f"{attr_id}: {exc}") from exc
    if isinstance(domain, ChoiceDomain):
        if literal in domain.vocabulary:
            return card_id, attr_id, Choice(literal)
        raise MutationError(
            f"{attr_id}: {literal!r} not in vocabulary {sorted(domain.vocabulary)}"
        )
    tokens = [t for t in (p.strip() for p in literal.split(",")) if t]
    bad = [t for t in tokens if t not in domain.vocabulary]
    if bad:
        raise MutationError(
            f"{attr_id}: {bad[0]!r} not in vocabulary {sorted(domain.vocabulary)}"
        )
    return card_id, attr_id, TagSet(frozenset(tokens))


def _load_replacements(
    paths: list[str] | None, kind: CardKind, registry: AttributeRegistry
) -> list[Mutation]:
    mutations: list[Mutation] = []
    for path in paths or []:
        card, issues = load_card(path, registry)
        _print_issues(issues, prefix=f"{path}:")
        if card is None:
            raise MutationError(f"cannot load replacement card from {path}")
        if card.kind is not kind:
            raise MutationError(
                f"{path}: expected a {kind.value} card, got {card.kind.value}"
            )
        mutations.append(ReplaceCard(card.card_id, card))
    return mutations


def cmd_whatif(args: argparse.Namespace) -> int:
    registry = _load_registry_arg(args.registry)
    table = _load_rules_arg(args.rules, registry)
    card_set, issues = _assemble_from_args(args, registry)
    _print_issues(issues)
    if card_set is None:
        return _issues_exit(issues)
    try:
        mutations: list[Mutation] = []
        for spec_text in args.set or []:
            card_id, attr_id, value = _parse_set_literal(registry, spec_text)
            mutations.append(SetValue(card_id, attr_id, value))
        mutations += _load_replacements(args.replace_data, CardKind.DATA, registry)
        mutations += _load_replacements(args.replace_model, CardKind.MODEL, registry)
        if not mutations:
            raise MutationError(
                "nothing to explore: give at least one --set or --replace-* "
                "(e.g. --set proj1:record_keeping.logging_enabled=true)"
            )
        result = what_if(card_set, mutations, table, registry, strict=args.strict)
    except MutationError as exc:
        _err(str(exc))
        return EXIT_INTERNAL
    if args.format == "json":
        import json

        sys.stdout.write(json.dumps(whatif_to_dict(result), indent=2) + "\n")
    else:
        def banner(v: Verdict) -> str:
            return v.value.upper().replace("_", " ")

        print(f"baseline: {banner(result.baseline.verdict)}")
        print(f"mutated:  {banner(result.mutated.verdict)}")
        if result.delta:
            print(f"changed requirements ({len(result.delta)}):")
            for req_id in result.delta:
                base = result.baseline.result_for(req_id)
                new = result.mutated.result_for(req_id)
                print(f"  {req_id}: {base.status.value} -> {new.status.value}")
        else:
            print("changed requirements (0)")
    return _VERDICT_EXIT[result.mutated.verdict]


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    registry = _load_registry_arg(args.registry)
    table = _load_rules_arg(args.rules, registry)
    host, _, port = args.listen.rpartition(":")
    if not host or not port.isdigit():
        _err(f"bad --listen {args.listen!r}; expected ADDR:PORT")
        return EXIT_INTERNAL
    app = create_app(
        registry=registry,
        table=table,
        max_body=args.max_body,
        cors=args.cors,
    )
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
    return EXIT_COMPLIANT


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_registry_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--registry",
        metavar="FILE",
        help="registry override file (default: $CC_REGISTRY or the bundled registry)",
    )


def _add_set_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--project", required=True, metavar="FILE",
                        help="project card file")
    parser.add_argument("--data", action="append", nargs="+", metavar="FILE",
                        help="data card file(s); repeatable")
    parser.add_argument("--model", action="append", nargs="+", metavar="FILE",
                        help="model card file(s); repeatable")
    parser.add_argument("--rules", metavar="FILE",
                        help="rule table file (default: $CC_RULES or the bundled table)")
    _add_registry_flag(parser)
    parser.add_argument("--format", choices=("text", "json", "markdown"),
                        default="text", help="report format (default: text)")
    parser.add_argument("--strict", action="store_true",
                        help="demote an indeterminate verdict to non-compliant")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compliance-cards",
        description=(
            "Validate compliance cards and analyze an AI project's card set "
            "against the bundled EU AI Act requirement table."
        ),
        epilog=_EXIT_CODE_HELP,
    )
    parser.add_argument(
        "--version",
        action="version",
        version=(
            f"compliance-cards {__version__} "
            f"(registry {baseline_registry().version}, "
            f"rules {bundled_rule_table().version})"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate card files",
                       epilog=_EXIT_CODE_HELP)
    p.add_argument("paths", nargs="+", metavar="FILE")
    p.add_argument("--kind", choices=[k.value for k in CardKind],
                   help="require every file to be of this kind")
    _add_registry_flag(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", help="run a compliance analysis over a card set",
                       epilog=_EXIT_CODE_HELP)
    _add_set_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("scaffold", help="emit a questionnaire-style card template")
    p.add_argument("--kind", required=True, choices=[k.value for k in CardKind])
    p.add_argument("-o", "--output", metavar="FILE")
    _add_registry_flag(p)
    p.set_defaults(func=cmd_scaffold)

    p = sub.add_parser("whatif", help="preview the effect of edits or component swaps",
                       epilog=_EXIT_CODE_HELP)
    _add_set_flags(p)
    p.add_argument("--set", action="append", metavar="CARDID:ATTR=VALUE",
                   help="attribute mutation; repeatable")
    p.add_argument("--replace-data", action="append", metavar="FILE",
                   help="swap in a data card (replaces the card with the same card_id)")
    p.add_argument("--replace-model", action="append", metavar="FILE",
                   help="swap in a model card (replaces the card with the same card_id)")
    p.set_defaults(func=cmd_whatif)

    p = sub.add_parser("serve", help="run the HTTP analysis service")
    p.add_argument("--listen", default="127.0.0.1:8787", metavar="ADDR:PORT")
    p.add_argument("--rules", metavar="FILE")
    _add_registry_flag(p)
    p.add_argument("--max-body", type=int, default=1 << 20, metavar="BYTES",
                   help="request size cap (default 1 MiB)")
    p.add_argument("--cors", action=argparse.BooleanOptionalAction, default=True,
                   help="permissive cross-origin policy (default on)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; map to the internal-error code.
        if exc.code not in (0, None):
            return EXIT_INTERNAL
        return 0
    try:
        return args.func(args)
    except (ConfigurationError, RegistryFileError) as exc:
        _err(f"configuration error: {exc}")
        return EXIT_INTERNAL
    except OSError as exc:
        _err(str(exc))
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
