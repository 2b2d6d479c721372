from typing import Optional


class RobustUNMTError(Exception):
    category = "runtime-error"


class ShapeError(RobustUNMTError, ValueError):
    category = "shape-mismatch"

    def __init__(self, primitive: str, *shapes):
        self.primitive = primitive
        self.shapes = shapes
        rendered = " , ".join(str(tuple(s)) for s in shapes)
        super().__init__(f"{primitive}: incompatible shapes {rendered}")


class GraphError(RobustUNMTError):
    category = "graph-error"


class NonFiniteError(RobustUNMTError, ValueError):
    category = "non-finite"

    def __init__(self, message: str, coordinate: Optional[tuple] = None):
        self.coordinate = coordinate
        if coordinate is not None:
            message = f"{message} (coordinate {coordinate})"
        super().__init__(message)


class NoiseSpecError(RobustUNMTError, ValueError):
    category = "invalid-noise-spec"


class CorpusFormatError(RobustUNMTError):
    category = "corpus-format"

    def __init__(self, path: str, line_number: Optional[int], reason: str):
        self.path = path
        self.line_number = line_number
        where = f"{path}:{line_number}" if line_number is not None else path
        super().__init__(f"{where}: {reason}")


class VocabularyError(RobustUNMTError, ValueError):
    category = "vocabulary-error"


class CheckpointNotFoundError(RobustUNMTError):
    category = "checkpoint-not-found"


class CheckpointFormatError(RobustUNMTError):
    category = "checkpoint-format"


class ConfigError(RobustUNMTError, ValueError):
    category = "config-error"
