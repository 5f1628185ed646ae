from __future__ import annotations

import json

import pytest

from hoiforge.geometry import BBox
from hoiforge.manifest import AnnotatedImage, DetectionRecord
from hoiforge.vocabulary import AttributeVocabulary, TripletEntry, TripletVocabulary

PERSON = 0
BICYCLE = 1
UMBRELLA = 2
HORSE = 3


@pytest.fixture
def vocab() -> TripletVocabulary:
    return TripletVocabulary(
        entries=[
            TripletEntry(0, "ride", "riding", "bicycle", BICYCLE),
            TripletEntry(1, "hold", "holding", "umbrella", UMBRELLA),
            TripletEntry(2, "ride", "riding", "horse", HORSE),
            TripletEntry(3, "hold", "holding", "bicycle", BICYCLE),
            TripletEntry(4, "hug", "hugging", "person", PERSON),
        ]
    )


@pytest.fixture
def attrs_single() -> AttributeVocabulary:
    """One value per slot so composed text is fully determined."""
    return AttributeVocabulary(
        race=["asian"],
        age_gender=["young woman"],
        environment=["in a sunny park"],
        quality=["high quality"],
        lighting=["soft lighting"],
        view=["side view"],
        camera=["35mm photo"],
        negative=["blurry", "deformed", "cartoon", "duplicate", "low quality"],
    )


@pytest.fixture
def attrs_multi() -> AttributeVocabulary:
    return AttributeVocabulary(
        race=["asian", "black", "white", "hispanic"],
        age_gender=["young woman", "old man", "boy", "girl"],
        environment=["in a sunny park", "on a city street", "at the beach"],
        quality=["high quality", "sharp focus"],
        lighting=["soft lighting", "golden hour"],
        view=["side view", "front view", "wide shot"],
        camera=["35mm photo", "dslr"],
        negative=["blurry", "deformed", "cartoon", "duplicate", "low quality", "watermark", "text"],
    )


def det(image_id: str, class_id: int, box, confidence: float) -> DetectionRecord:
    return DetectionRecord(image_id=image_id, class_id=class_id, box=BBox.from_list(box), confidence=confidence)


def make_image(
    image_id: str,
    prompt_triplets,
    detections,
    width: int = 640,
    height: int = 480,
    annotations=(),
    kept: bool = True,
) -> AnnotatedImage:
    return AnnotatedImage(
        image_id=image_id,
        file=f"images/{image_id}.jpg",
        width=width,
        height=height,
        prompt_triplets=list(prompt_triplets),
        detections=list(detections),
        annotations=list(annotations),
        kept=kept,
    )


def write_vocab_file(path, entries) -> None:
    recs = [
        {"hoi_id": e.hoi_id, "verb": e.verb, "verb_ing": e.verb_ing, "object": e.object_name, "object_id": e.object_class_id}
        for e in entries
    ]
    path.write_text(json.dumps(recs))


@pytest.fixture
def vocab_file(tmp_path, vocab):
    path = tmp_path / "vocab.json"
    write_vocab_file(path, vocab.entries)
    return path


@pytest.fixture
def attrs_file(tmp_path, attrs_single):
    path = tmp_path / "attrs.json"
    path.write_text(
        json.dumps(
            {
                "race": attrs_single.race,
                "age_gender": attrs_single.age_gender,
                "environment": attrs_single.environment,
                "quality": attrs_single.quality,
                "lighting": attrs_single.lighting,
                "view": attrs_single.view,
                "camera": attrs_single.camera,
                "negative": attrs_single.negative,
            }
        )
    )
    return path
