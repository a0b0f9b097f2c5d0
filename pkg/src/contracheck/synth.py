"""Synthetic contradiction injection.

Takes a clean corpus plus facts and plants labeled contradictions: each case
restates one fact with exactly one mutation operator applied and inserts the
restatement as a new block under a synthetic document title. The mutated
texts double as ground-truth markers for the oracle provider, so injected
benchmarks have an exact NLI at desk scale.

The nine operator families describe observed contradiction categories, not
generative rules; these implementations are one concrete, deliberately
stylized realization, and output metadata says so.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import Block, CorpusSnapshot, allocate_largest_remainder, compute_block_id
from .errors import MutationError
from .evaluation import LabeledFact
from .facts import AtomicFact

MUTATION_TYPES = (
    "numerical_off_by_one",
    "numerical_clear",
    "logical_direct",
    "logical_indirect",
    "definition",
    "temporal",
    "named_entity",
    "categorical",
    "spatial",
)

DEFAULT_DISTRIBUTION: Mapping[str, float] = {
    "numerical_off_by_one": 0.230,
    "numerical_clear": 0.317,
    "logical_direct": 0.148,
    "logical_indirect": 0.027,
    "definition": 0.106,
    "temporal": 0.079,
    "named_entity": 0.060,
    "categorical": 0.021,
    "spatial": 0.012,
}

_NUMBER_RE = re.compile(r"\d+")
_YEAR_RE = re.compile(r"\b[12]\d{3}\b")
_AUXILIARY_RE = re.compile(r"\b(is|are|was|were|has|have|had|can|will|does|do|did)\b")
_CAPITALIZED_RE = re.compile(r"(?<=[a-z0-9,;] )([A-Z][a-z]+)")

_ENTITY_POOL = (
    "Varkell", "Ostrane", "Quillane", "Merrowby",
    "Tavissen", "Lornefield", "Brachton", "Veslor",
)

_DIRECTION_SWAPS = {
    "north": "south", "south": "north", "east": "west", "west": "east",
    "northern": "southern", "southern": "northern",
    "eastern": "western", "western": "eastern",
}


@dataclass(frozen=True)
class MutationSpec:
    type: str
    target_fact_id: str
    params: dict
    seed: int

    def __post_init__(self):
        if self.type not in MUTATION_TYPES:
            raise MutationError(f"unknown mutation type {self.type!r}")

    def to_record(self) -> dict:
        return {
            "type": self.type,
            "target_fact_id": self.target_fact_id,
            "params": self.params,
            "seed": self.seed,
        }


@dataclass
class InjectedCase:
    """One planted contradiction: the original fact, the refuting block (in a
    different document), and the deterministic mutation that produced it."""

    fact: AtomicFact
    mutated_block: Block
    mutation: MutationSpec
    gold_label: str = "inconsistent"
    support_blocks: tuple[Block, ...] = ()

    def to_record(self) -> dict:
        return {
            "fact": self.fact.to_record(),
            "mutated_block": self.mutated_block.to_record(),
            "mutation": self.mutation.to_record(),
            "gold_label": self.gold_label,
            "support_blocks": [b.to_record() for b in self.support_blocks],
        }

    @classmethod
    def from_record(cls, record: dict) -> "InjectedCase":
        def block_from(rec: dict) -> Block:
            return Block(
                block_id=rec["block_id"],
                doc_title=rec["doc_title"],
                section_path=tuple(rec["section_path"]),
                kind=rec["kind"],
                text=rec["text"],
                category=rec.get("category"),
            )

        return cls(
            fact=AtomicFact.from_record(record["fact"]),
            mutated_block=block_from(record["mutated_block"]),
            mutation=MutationSpec(**record["mutation"]),
            gold_label=record["gold_label"],
            support_blocks=tuple(block_from(b) for b in record.get("support_blocks", [])),
        )


def validate_distribution(distribution: Mapping[str, float]) -> None:
    unknown = set(distribution) - set(MUTATION_TYPES)
    if unknown:
        raise MutationError(f"unknown mutation types in distribution: {sorted(unknown)}")
    total = sum(distribution.values())
    if abs(total - 1.0) > 1e-9:
        raise MutationError(f"distribution must sum to 1, got {total}")
    if any(weight < 0 for weight in distribution.values()):
        raise MutationError("distribution weights must be non-negative")


def sample_mutation_type(distribution: Mapping[str, float], rng: random.Random) -> str:
    """Draw one mutation type with the configured probabilities."""
    validate_distribution(distribution)
    types = [t for t in MUTATION_TYPES if t in distribution]
    weights = [distribution[t] for t in types]
    return rng.choices(types, weights=weights, k=1)[0]


def _strip_period(text: str) -> str:
    return text.rstrip().rstrip(".")


def _negate(text: str) -> str:
    """Insert (or flip) a negation at the first auxiliary verb; otherwise wrap."""
    match = _AUXILIARY_RE.search(text)
    if match:
        end = match.end()
        if text[end:].lstrip().startswith("not "):
            rest = text[end:].lstrip()[len("not "):]
            return text[:end] + " " + rest
        return text[:end] + " not" + text[end:]
    return f"It is not the case that {_strip_period(text)}."


def applicable(mutation_type: str, text: str) -> bool:
    """Whether the operator has something to mutate in this text."""
    if mutation_type in ("numerical_off_by_one", "numerical_clear"):
        return _NUMBER_RE.search(text) is not None
    if mutation_type == "temporal":
        return _YEAR_RE.search(text) is not None
    if mutation_type == "named_entity":
        return _CAPITALIZED_RE.search(text) is not None
    return True


def apply_mutation(mutation_type: str, text: str, params: dict) -> str:
    """Apply one operator deterministically; params must fully determine it."""
    if not applicable(mutation_type, text):
        raise MutationError(f"operator {mutation_type} not applicable to {text!r}")
    if mutation_type == "numerical_off_by_one":
        delta = params["delta"]
        if abs(delta) != 1:
            raise MutationError(f"off-by-one delta must be +/-1, got {delta}")
        return _shift_first(_NUMBER_RE, text, delta)
    if mutation_type == "numerical_clear":
        delta = params["delta"]
        if abs(delta) < 2:
            raise MutationError(f"clear numerical delta must have magnitude >= 2, got {delta}")
        return _shift_first(_NUMBER_RE, text, delta)
    if mutation_type == "temporal":
        delta = params["delta"]
        return _shift_first(_YEAR_RE, text, delta)
    if mutation_type == "logical_direct":
        return _negate(text)
    if mutation_type == "logical_indirect":
        # refuting half of a two-block chain; the matching support block
        # (built at injection time) states the claim-to-registry implication
        bridge = params["bridge"]
        return f"According to {bridge}, {_negate(text)}"
    if mutation_type == "named_entity":
        replacement = params["replacement"]
        return _CAPITALIZED_RE.sub(replacement, text, count=1)
    if mutation_type == "definition":
        return f"By definition, {_negate(text)}"
    if mutation_type == "categorical":
        return f"Classifications differ here: {_negate(text)}"
    if mutation_type == "spatial":
        lowered = text.lower()
        for word, opposite in _DIRECTION_SWAPS.items():
            match = re.search(rf"\b{word}\b", lowered)
            if match:
                found = text[match.start():match.end()]
                swapped = opposite.capitalize() if found[0].isupper() else opposite
                return text[: match.start()] + swapped + text[match.end():]
        return f"Geographically, {_negate(text)}"
    raise MutationError(f"unknown mutation type {mutation_type!r}")


def _shift_first(pattern: re.Pattern, text: str, delta: int) -> str:
    match = pattern.search(text)
    value = int(match.group(0))
    shifted = value + delta
    if shifted < 0:
        shifted = value - delta
    return text[: match.start()] + str(shifted) + text[match.end():]


def _sample_params(mutation_type: str, text: str, rng: random.Random, case_tag: str) -> dict:
    if mutation_type == "numerical_off_by_one":
        value = int(_NUMBER_RE.search(text).group(0))
        return {"delta": 1 if value == 0 else rng.choice((1, -1))}
    if mutation_type in ("numerical_clear", "temporal"):
        magnitude = rng.randint(2, 30)
        return {"delta": rng.choice((1, -1)) * magnitude}
    if mutation_type == "named_entity":
        return {"replacement": rng.choice(_ENTITY_POOL)}
    if mutation_type == "logical_indirect":
        return {"bridge": f"registry entry {case_tag}"}
    return {}


def inject(
    snapshot: CorpusSnapshot,
    facts: list[AtomicFact],
    distribution: Mapping[str, float] = DEFAULT_DISTRIBUTION,
    n: int = 10,
    seed: int = 0,
) -> tuple[CorpusSnapshot, list[InjectedCase]]:
    """Plant n contradictions and return (mutated snapshot, cases).

    Deterministic under the seed. Mutation-type counts over the n cases
    follow the requested proportions by largest-remainder allocation. A fact
    an operator cannot mutate is skipped in favor of another; running out of
    mutable facts raises with the achievable counts.
    """
    validate_distribution(distribution)
    if n < 1:
        raise MutationError(f"n must be >= 1, got {n}")
    if n > len(facts):
        raise MutationError(f"requested {n} cases but only {len(facts)} facts supplied")
    rng = random.Random(seed)
    counts = allocate_largest_remainder(distribution, n)
    pool = list(facts)
    rng.shuffle(pool)
    used: set[str] = set()
    cases: list[InjectedCase] = []
    case_idx = 0
    for mutation_type in MUTATION_TYPES:
        needed = counts.get(mutation_type, 0)
        taken = 0
        for fact in pool:
            if taken == needed:
                break
            if fact.fact_id in used or not applicable(mutation_type, fact.claim_text):
                continue
            used.add(fact.fact_id)
            case_idx += 1
            case_tag = f"case-{seed}-{case_idx:04d}"
            params = _sample_params(mutation_type, fact.claim_text, rng, case_tag)
            mutated_text = apply_mutation(mutation_type, fact.claim_text, params)
            params = dict(params, marker=mutated_text)
            doc_title = f"Injected record {case_idx:04d} (seed {seed})"
            source_block = snapshot.get(fact.source_block_id)
            mutated_block = Block(
                block_id=compute_block_id(doc_title, (), 0),
                doc_title=doc_title,
                section_path=(),
                kind="passage",
                text=mutated_text,
                category=source_block.category if source_block else None,
            )
            support_blocks: tuple[Block, ...] = ()
            if mutation_type == "logical_indirect":
                support_title = f"Injected record {case_idx:04d}b (seed {seed})"
                support_blocks = (
                    Block(
                        block_id=compute_block_id(support_title, (), 0),
                        doc_title=support_title,
                        section_path=(),
                        kind="passage",
                        text=(
                            f"If {_strip_period(fact.claim_text)}, then "
                            f"{params['bridge']} is marked as verified."
                        ),
                        category=source_block.category if source_block else None,
                    ),
                )
            if mutated_block.doc_title == fact.source_doc_title:
                raise MutationError("synthetic document title collides with the source article")
            cases.append(
                InjectedCase(
                    fact=fact,
                    mutated_block=mutated_block,
                    mutation=MutationSpec(
                        type=mutation_type,
                        target_fact_id=fact.fact_id,
                        params=params,
                        seed=seed,
                    ),
                    support_blocks=support_blocks,
                )
            )
            taken += 1
        if taken < needed:
            achievable = {
                t: sum(1 for f in facts if applicable(t, f.claim_text)) for t in MUTATION_TYPES
            }
            raise MutationError(
                f"not enough mutable facts for {mutation_type}: needed {needed}, found "
                f"{taken}; achievable counts per type: {achievable}"
            )
    mutated = _extend_snapshot(snapshot, cases)
    return mutated, cases


def _extend_snapshot(snapshot: CorpusSnapshot, cases: list[InjectedCase]) -> CorpusSnapshot:
    from types import MappingProxyType

    blocks = dict(snapshot.blocks)
    title_index = {t: list(ids) for t, ids in snapshot.title_index.items()}
    for case in cases:
        for block in (case.mutated_block, *case.support_blocks):
            if block.block_id in blocks:
                raise MutationError(f"injected block id {block.block_id} collides with corpus")
            blocks[block.block_id] = block
            title_index.setdefault(block.doc_title, []).append(block.block_id)
    return CorpusSnapshot(
        snapshot_date=snapshot.snapshot_date,
        blocks=MappingProxyType(blocks),
        title_index=MappingProxyType({t: tuple(ids) for t, ids in title_index.items()}),
    )


def refutation_map(cases: Iterable[InjectedCase]) -> dict[str, list[str]]:
    """Claim text -> planted refuting texts; feeds the oracle provider."""
    mapping: dict[str, list[str]] = {}
    for case in cases:
        mapping.setdefault(case.fact.claim_text, []).append(case.mutated_block.text)
    return mapping


def cases_to_labeled(
    cases: Iterable[InjectedCase],
    clean_facts: Iterable[AtomicFact] = (),
    split: str = "test",
) -> list[LabeledFact]:
    """Benchmark records: injected cases labeled inconsistent (with the
    planted block as evidence), clean facts labeled consistent."""
    labeled = [
        LabeledFact(
            fact=case.fact,
            gold_label="inconsistent",
            evidence_block_ids=(case.mutated_block.block_id,)
            + tuple(b.block_id for b in case.support_blocks),
            inconsistency_type=case.mutation.type,
            split=split,
        )
        for case in cases
    ]
    labeled.extend(
        LabeledFact(
            fact=fact,
            gold_label="consistent",
            evidence_block_ids=(),
            inconsistency_type=None,
            split=split,
        )
        for fact in clean_facts
    )
    return labeled


def save_cases(cases: Iterable[InjectedCase], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for case in cases:
            fh.write(json.dumps(case.to_record(), ensure_ascii=False, sort_keys=True) + "\n")


def load_cases(path: str | Path) -> list[InjectedCase]:
    with open(path, encoding="utf-8") as fh:
        return [InjectedCase.from_record(json.loads(line)) for line in fh if line.strip()]
