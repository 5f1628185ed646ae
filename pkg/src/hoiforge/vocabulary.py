"""Vocabulary inputs: the HOI triplet list, prompt attribute slots and the
triplet co-occurrence table.

File formats
------------
Triplet vocabulary: JSON array of
    {"hoi_id": int, "verb": str, "verb_ing": str, "object": str, "object_id": int}
The participle ("verb_ing") is stored explicitly because the verb list
contains irregulars; nothing in the toolkit conjugates.

Attributes: JSON object with one non-empty string array per prompt slot
("race", "age_gender", "environment", "quality", "lighting", "view",
"camera") plus "negative".

Co-occurrence: JSON array of {"a": int, "b": int, "count": int}; the table
is symmetric, each unordered pair may appear once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SchemaError, ValidationError

ATTRIBUTE_SLOTS = ("race", "age_gender", "environment", "quality", "lighting", "view", "camera")


@dataclass(frozen=True)
class TripletEntry:
    hoi_id: int
    verb: str
    verb_ing: str
    object_name: str
    object_class_id: int


@dataclass
class TripletVocabulary:
    """Ordered HOI category list; hoi_ids are exactly 0..K-1."""

    entries: list[TripletEntry]

    def __post_init__(self):
        ids = [e.hoi_id for e in self.entries]
        if sorted(ids) != list(range(len(self.entries))):
            raise ValidationError("hoi_ids must be exactly 0..K-1 with no duplicates")
        pairs = set()
        for e in self.entries:
            if e.object_class_id < 0:
                raise ValidationError(f"hoi_id {e.hoi_id}: negative object_id")
            key = (e.verb, e.object_name)
            if key in pairs:
                raise ValidationError(f"duplicate (verb, object) pair {key!r}")
            pairs.add(key)
        self._by_id = {e.hoi_id: e for e in self.entries}

    @property
    def num_categories(self) -> int:
        return len(self.entries)

    @property
    def num_object_classes(self) -> int:
        return max(e.object_class_id for e in self.entries) + 1

    def entry(self, hoi_id: int) -> TripletEntry:
        try:
            return self._by_id[hoi_id]
        except KeyError:
            raise KeyError(f"unknown hoi_id {hoi_id}") from None

    def object_class_of(self, hoi_id: int) -> int:
        return self.entry(hoi_id).object_class_id

    def object_class_ids(self) -> list[int]:
        return sorted({e.object_class_id for e in self.entries})

    def verbs(self) -> list[str]:
        return sorted({e.verb for e in self.entries})

    def ids_for_verb(self, verb: str) -> list[int]:
        return sorted(e.hoi_id for e in self.entries if e.verb == verb)

    def ids_for_object_class(self, object_class_id: int) -> list[int]:
        return sorted(e.hoi_id for e in self.entries if e.object_class_id == object_class_id)


@dataclass
class AttributeVocabulary:
    """Prompt slot values; every list non-empty, every string non-empty after trimming."""

    race: list[str]
    age_gender: list[str]
    environment: list[str]
    quality: list[str]
    lighting: list[str]
    view: list[str]
    camera: list[str]
    negative: list[str]

    def __post_init__(self):
        for slot in ATTRIBUTE_SLOTS + ("negative",):
            values = [str(v).strip() for v in getattr(self, slot)]
            if not values or any(not v for v in values):
                raise ValidationError(f"attribute slot {slot!r} must be a non-empty list of non-empty strings")
            setattr(self, slot, values)

    def slot(self, name: str) -> list[str]:
        return getattr(self, name)


@dataclass
class CoOccurrenceTable:
    """Symmetric (hoi_id, hoi_id) -> count map; keys stored as unordered pairs."""

    counts: dict[tuple[int, int], int] = field(default_factory=dict)

    def count(self, a: int, b: int) -> int:
        return self.counts.get((min(a, b), max(a, b)), 0)

    def set_count(self, a: int, b: int, count: int) -> None:
        if count < 0:
            raise ValidationError(f"co-occurrence count for ({a}, {b}) must be >= 0")
        self.counts[(min(a, b), max(a, b))] = count

    def partners(self, anchor: int) -> list[tuple[int, int]]:
        """(other_id, count) for every id with positive count against anchor, ascending by id."""
        out = []
        for (a, b), c in self.counts.items():
            if c <= 0:
                continue
            if a == anchor and b != anchor:
                out.append((b, c))
            elif b == anchor and a != anchor:
                out.append((a, c))
        return sorted(out)


def _load_json(path: Path | str, what: str):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise SchemaError(f"{what} file {path}: {e}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{what} file {path}, line {e.lineno}: {e.msg}") from e


def _require(record: dict, key: str, kind, where: str):
    if key not in record:
        raise SchemaError(f"{where}: missing field {key!r}")
    value = record[key]
    if kind is int and isinstance(value, bool):
        raise SchemaError(f"{where}: field {key!r} must be {kind.__name__}")
    if not isinstance(value, kind):
        raise SchemaError(f"{where}: field {key!r} must be {kind.__name__}")
    return value


def load_vocabulary(path: Path | str) -> TripletVocabulary:
    """Parse and validate the triplet vocabulary file."""
    data = _load_json(path, "vocabulary")
    if not isinstance(data, list) or not data:
        raise SchemaError(f"vocabulary file {path}: expected a non-empty JSON array")
    entries = []
    for i, rec in enumerate(data):
        where = f"vocabulary entry {i}"
        if not isinstance(rec, dict):
            raise SchemaError(f"{where}: expected an object")
        entries.append(
            TripletEntry(
                hoi_id=_require(rec, "hoi_id", int, where),
                verb=_require(rec, "verb", str, where),
                verb_ing=_require(rec, "verb_ing", str, where),
                object_name=_require(rec, "object", str, where),
                object_class_id=_require(rec, "object_id", int, where),
            )
        )
    return TripletVocabulary(entries)


def load_attributes(path: Path | str) -> AttributeVocabulary:
    """Parse and validate the prompt attribute file."""
    data = _load_json(path, "attributes")
    if not isinstance(data, dict):
        raise SchemaError(f"attributes file {path}: expected a JSON object")
    kwargs = {}
    for slot in ATTRIBUTE_SLOTS + ("negative",):
        values = data.get(slot)
        if not isinstance(values, list):
            raise SchemaError(f"attributes file {path}: missing or non-array slot {slot!r}")
        kwargs[slot] = values
    return AttributeVocabulary(**kwargs)


def load_cooccurrence(path: Path | str) -> CoOccurrenceTable:
    """Parse and validate the co-occurrence file."""
    data = _load_json(path, "co-occurrence")
    if not isinstance(data, list):
        raise SchemaError(f"co-occurrence file {path}: expected a JSON array")
    table = CoOccurrenceTable()
    for i, rec in enumerate(data):
        where = f"co-occurrence entry {i}"
        if not isinstance(rec, dict):
            raise SchemaError(f"{where}: expected an object")
        a = _require(rec, "a", int, where)
        b = _require(rec, "b", int, where)
        count = _require(rec, "count", int, where)
        key = (min(a, b), max(a, b))
        if key in table.counts:
            raise ValidationError(f"{where}: duplicate pair ({a}, {b})")
        table.set_count(a, b, count)
    return table
