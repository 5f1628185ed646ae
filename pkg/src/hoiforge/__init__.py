"""hoiforge: build, label, audit and evaluate synthetic human-object-interaction datasets.

The toolkit operates purely on structured data (prompt vocabularies,
detector outputs, annotation manifests, precomputed embeddings); it never
runs a generator or a detector itself.
"""

__version__ = "0.1.0"

from .geometry import BBox, giou, iou
from .manifest import AnnotatedImage, DetectionRecord, HoiAnnotation
from .vocabulary import AttributeVocabulary, CoOccurrenceTable, TripletVocabulary

__all__ = [
    "__version__",
    "BBox",
    "iou",
    "giou",
    "AnnotatedImage",
    "DetectionRecord",
    "HoiAnnotation",
    "TripletVocabulary",
    "AttributeVocabulary",
    "CoOccurrenceTable",
]
