"""Structured prompt composition and generation planning.

A prompt describes one or more people interacting with objects, one clause
per triplet, followed by an environment slot and four photographic slots:

    a {race} {age_gender} {verb_ing} a/an {object}[, <more person clauses>],
    {environment}, {quality}, {lighting}, {view}, {camera}

Composition is a pure function of (triplets, vocabularies, seed).  The draw
order from the seeded stream is fixed: per triplet race then age_gender, then
environment, quality, lighting, view, camera, then the negative sample, then
model-config values in sorted key order.  Re-running with the same inputs
reproduces the prompt byte for byte.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .rng import SplitMix64
from .vocabulary import AttributeVocabulary, CoOccurrenceTable, TripletVocabulary

# Annotated-to-generated ratio observed on the original SynHOI run
# (146,772 images survived filtering out of 259,806 generated).
DEFAULT_RETENTION_RATE = 146772 / 259806

DEFAULT_NEGATIVE_SAMPLE_SIZE = 5
DEFAULT_MAX_TRIPLETS_PER_PROMPT = 2

_VOWELS = "aeiou"


@dataclass(frozen=True)
class HoiPrompt:
    positive_text: str
    negative_text: str
    triplet_ids: list[int]
    seed: int
    model_config: dict[str, object]

    def to_dict(self) -> dict:
        return {
            "positive_text": self.positive_text,
            "negative_text": self.negative_text,
            "triplet_ids": list(self.triplet_ids),
            "seed": self.seed,
            "model_config": dict(self.model_config),
        }


@dataclass
class GenerationPlan:
    """Prompts to emit per category so the expected post-filter count reaches the target."""

    per_category: dict[int, int]
    retention_rate: float

    def total_prompts(self) -> int:
        return sum(self.per_category.values())


def article_for(noun: str) -> str:
    return "an" if noun[:1].lower() in _VOWELS else "a"


def compose_prompt(
    triplets: Sequence[int],
    vocab: TripletVocabulary,
    attrs: AttributeVocabulary,
    seed: int,
    negative_sample_size: int = DEFAULT_NEGATIVE_SAMPLE_SIZE,
    model_config_options: Mapping[str, Sequence[object]] | None = None,
) -> HoiPrompt:
    """Compose one prompt covering the given triplets.

    Each triplet becomes its own person clause with freshly sampled person
    attributes; the trailing environment and photographic slots are shared.
    ``model_config_options`` maps knob names to candidate values for the
    external generator; one value is drawn per knob.
    """
    if not triplets:
        raise ValueError("triplets must be non-empty")
    entries = [vocab.entry(t) for t in triplets]

    rng = SplitMix64(seed)
    clauses = []
    for e in entries:
        race = rng.choice(attrs.race)
        age_gender = rng.choice(attrs.age_gender)
        clauses.append(f"a {race} {age_gender} {e.verb_ing} {article_for(e.object_name)} {e.object_name}")

    tail = [rng.choice(attrs.environment)]
    tail += [rng.choice(attrs.slot(s)) for s in ("quality", "lighting", "view", "camera")]
    positive_text = ", ".join(clauses + tail)

    k = min(negative_sample_size, len(attrs.negative))
    negative_text = ", ".join(rng.sample(attrs.negative, k))

    model_config: dict[str, object] = {}
    if model_config_options:
        for key in sorted(model_config_options):
            model_config[key] = rng.choice(list(model_config_options[key]))

    return HoiPrompt(
        positive_text=positive_text,
        negative_text=negative_text,
        triplet_ids=list(triplets),
        seed=seed,
        model_config=model_config,
    )


def parse_prompt_triplets(positive_text: str, vocab: TripletVocabulary) -> list[int]:
    """Recover the triplet ids of a composed prompt from its person clauses.

    Matches each vocabulary entry's "{verb_ing} a/an {object}" fragment on
    word boundaries and returns hits in textual order.  Assumes attribute
    strings do not themselves spell out a vocabulary fragment.
    """
    hits: list[tuple[int, int]] = []
    for e in vocab.entries:
        pattern = re.compile(
            rf"\b{re.escape(e.verb_ing)} an? {re.escape(e.object_name)}\b"
        )
        for m in pattern.finditer(positive_text):
            hits.append((m.start(), e.hoi_id))
    return [hoi_id for _, hoi_id in sorted(hits)]


def sample_cooccurring(
    table: CoOccurrenceTable, anchor: int, k: int, seed: int
) -> list[int]:
    """Anchor plus up to k-1 distinct co-occurring ids, count-proportional.

    Partners are drawn without replacement with probability proportional to
    their co-occurrence count against the anchor; ids with zero count are
    never returned.  With no positive-count partner the result is [anchor].
    """
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    partners = table.partners(anchor)
    rng = SplitMix64(seed)
    chosen = [anchor]
    pool = list(partners)
    while pool and len(chosen) < k:
        i = rng.weighted_index([c for _, c in pool])
        chosen.append(pool[i][0])
        pool.pop(i)
    return chosen


def build_generation_plan(
    counts: Mapping[int, int] | Sequence[int],
    target_min: int,
    retention_rate: float = DEFAULT_RETENTION_RATE,
) -> GenerationPlan:
    """Plan prompt counts so every category is expected to reach ``target_min``.

    ``counts`` maps category id to its current image count (a sequence is
    read as counts for ids 0..len-1).  Each planned count is
    ceil(shortfall / retention_rate), nudged up if float rounding would leave
    the expected post-filter count short.
    """
    if target_min <= 0:
        raise ValueError(f"target_min must be positive, got {target_min}")
    if not (0.0 < retention_rate <= 1.0):
        raise ValueError(f"retention_rate must be in (0, 1], got {retention_rate}")
    if isinstance(counts, Mapping):
        items = counts.items()
    else:
        items = enumerate(counts)
    per_category: dict[int, int] = {}
    for cat, have in items:
        shortfall = max(0, target_min - have)
        if shortfall == 0:
            per_category[cat] = 0
            continue
        n = math.ceil(shortfall / retention_rate)
        # guard against ceil-of-float landing one short of the guarantee
        while have + n * retention_rate < target_min:
            n += 1
        per_category[cat] = n
    return GenerationPlan(per_category=per_category, retention_rate=retention_rate)


@dataclass
class PromptRun:
    """A planned batch of prompts plus the metadata needed to reproduce it."""

    prompts: list[HoiPrompt]
    meta: dict = field(default_factory=dict)


def generate_prompts(
    vocab: TripletVocabulary,
    attrs: AttributeVocabulary,
    table: CoOccurrenceTable,
    plan: GenerationPlan,
    seed: int,
    max_triplets: int = DEFAULT_MAX_TRIPLETS_PER_PROMPT,
    negative_sample_size: int = DEFAULT_NEGATIVE_SAMPLE_SIZE,
    model_config_options: Mapping[str, Sequence[object]] | None = None,
) -> PromptRun:
    """Emit the planned number of prompts per category.

    Every prompt gets its own sub-seed drawn from a master stream, so the
    whole run is reproducible from (plan, seed) alone.  Each prompt is
    anchored at its category and may pull in up to ``max_triplets - 1``
    co-occurring categories.
    """
    if max_triplets <= 0:
        raise ValueError(f"max_triplets must be positive, got {max_triplets}")
    master = SplitMix64(seed)
    prompts: list[HoiPrompt] = []
    for cat in sorted(plan.per_category):
        for _ in range(plan.per_category[cat]):
            sub_seed = master.next_uint64()
            triplets = sample_cooccurring(table, cat, max_triplets, sub_seed)
            prompts.append(
                compose_prompt(
                    triplets,
                    vocab,
                    attrs,
                    sub_seed,
                    negative_sample_size=negative_sample_size,
                    model_config_options=model_config_options,
                )
            )
    meta = {
        "seed": seed,
        "max_triplets_per_prompt": max_triplets,
        "negative_sample_size": negative_sample_size,
        "retention_rate": plan.retention_rate,
        "planned_prompts": plan.total_prompts(),
    }
    return PromptRun(prompts=prompts, meta=meta)
