"""Exception types shared across the toolkit."""


class SchemaError(ValueError):
    """An input file failed structural validation (bad JSON, missing or mistyped field)."""


class ValidationError(ValueError):
    """Parsed data violates a domain invariant (duplicate ids, out-of-range category, ...)."""


class AssociationError(ValueError):
    """Human-object association is impossible for an image (e.g. no person detections)."""
