#!/usr/bin/env python3
"""Regenerate the golden fixture corpus under tests/fixtures/golden/.

Twenty deterministic card sets spanning every verdict. The manifest's
expected verdict is computed by the independent naive evaluator in
tests/oracles.py (never by the engine under test) and frozen at generation
time. Re-run only when the registry schema changes; commit the output.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from compliance_cards import baseline_registry, serialize_card
from compliance_cards.model import UNANSWERED, CardKind, CardSet, Choice, Flag, TagSet
from compliance_cards.rules import bundled_rule_table

from generators import all_satisfied_values, in_scope_dispositive, rand_card, rand_card_set
from oracles import naive_analyze

GOLDEN = ROOT / "tests" / "fixtures" / "golden"


def compliant_set(rng: random.Random, high_risk: bool) -> CardSet:
    registry = baseline_registry()
    dispositive = {
        "operator_role": Choice("provider"),
        "placed_on_eu_market": Flag(True),
        "put_into_service_in_eu": Flag(True),
        "exception": Choice("none"),
        "prohibited_practices": TagSet(frozenset()),
        "is_ai_system": Flag(True),
        "is_gpai_model": Flag(not high_risk),
        "gpai_systemic_risk": Flag(False),
        "high_risk_basis": Choice("annex_iii_use_case" if high_risk else "none"),
        "intended_purpose": TagSet(frozenset({"medical_triage"})),
    }
    values = all_satisfied_values(CardKind.PROJECT, registry)
    values.update(dispositive)
    values["intended_purpose"] = TagSet(frozenset({"medical_triage"}))
    project = rand_card(CardKind.PROJECT, registry, rng, "proj", 0.0, overrides=values)
    data = tuple(
        rand_card(CardKind.DATA, registry, rng, f"d{i}", 0.0,
                  overrides=all_satisfied_values(CardKind.DATA, registry))
        for i in range(rng.randrange(1, 3))
    )
    models = tuple(
        rand_card(CardKind.MODEL, registry, rng, f"m{i}", 0.0,
                  overrides=all_satisfied_values(CardKind.MODEL, registry))
        for i in range(rng.randrange(1, 3))
    )
    return CardSet(project=project, data=data, models=models)


def scenario(i: int, rng: random.Random) -> CardSet:
    registry = baseline_registry()
    kind = i % 5
    if kind == 0:
        return compliant_set(rng, high_risk=bool(i % 2))
    if kind == 1:
        # Gap-only set: satisfied everywhere it is answered -> indeterminate.
        card_set = compliant_set(rng, high_risk=True)
        def punch(card):
            for d in registry.for_kind(card.kind):
                if not d.dispositive and rng.random() < 0.4:
                    card = card.with_value(d.id, UNANSWERED)
            return card
        return CardSet(
            project=punch(card_set.project),
            data=tuple(punch(c) for c in card_set.data),
            models=tuple(punch(c) for c in card_set.models),
        )
    if kind == 2:
        practices = rng.sample(
            ("social_scoring", "subliminal_manipulation", "untargeted_facial_scraping"),
            1 + rng.randrange(2),
        )
        dispositive = in_scope_dispositive(rng)
        dispositive["prohibited_practices"] = TagSet(frozenset(practices))
        return rand_card_set(registry, rng, dispositive=dispositive)
    if kind == 3:
        dispositive = in_scope_dispositive(rng)
        if rng.random() < 0.5:
            dispositive["operator_role"] = Choice(
                rng.choice(("deployer", "importer", "distributor"))
            )
        else:
            dispositive["exception"] = Choice(
                rng.choice(("military_defence", "scientific_research"))
            )
        return rand_card_set(registry, rng, dispositive=dispositive)
    # kind == 4: random in-scope, fully answered: compliant or non-compliant.
    return rand_card_set(registry, rng, dispositive=in_scope_dispositive(rng),
                         p_unanswered=0.0)


def main() -> None:
    registry = baseline_registry()
    table = bundled_rule_table()
    manifest = {}
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for old in GOLDEN.glob("set*/*"):
        old.unlink()
    for i in range(20):
        rng = random.Random(24_000 + i)
        card_set = scenario(i, rng)
        name = f"set{i:02d}"
        out = GOLDEN / name
        out.mkdir(parents=True, exist_ok=True)
        (out / "project.card.yaml").write_text(
            serialize_card(card_set.project), encoding="utf-8"
        )
        for j, card in enumerate(card_set.data):
            (out / f"data{j}.card.yaml").write_text(serialize_card(card), "utf-8")
        for j, card in enumerate(card_set.models):
            (out / f"model{j}.card.yaml").write_text(serialize_card(card), "utf-8")
        verdict, _ = naive_analyze(card_set, table, registry)
        manifest[name] = {
            "expected_verdict": verdict,
            "data": len(card_set.data),
            "models": len(card_set.models),
        }
    (GOLDEN / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    counts: dict[str, int] = {}
    for entry in manifest.values():
        counts[entry["expected_verdict"]] = counts.get(entry["expected_verdict"], 0) + 1
    print(f"wrote 20 sets to {GOLDEN}")
    print("verdict mix:", dict(sorted(counts.items())))


if __name__ == "__main__":
    main()
