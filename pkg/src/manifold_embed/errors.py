"""Exception hierarchy shared by every module."""


class EmbedError(Exception):
    """Base class for all library errors."""


class InvalidMatrix(EmbedError):
    pass


class ScaleMismatch(EmbedError):
    pass


class ShapeError(EmbedError):
    pass


class InvalidDimension(EmbedError):
    pass


class InvalidK(EmbedError):
    pass


class InvalidM(EmbedError):
    pass


class DegenerateInput(EmbedError):
    """Input geometry the requested operation cannot handle.

    ``pairs`` carries offending (i, j) index pairs when the failure is
    caused by coincident points.
    """

    def __init__(self, message, pairs=None):
        super().__init__(message)
        self.pairs = [] if pairs is None else list(pairs)


class Disconnected(EmbedError):
    """The neighbourhood graph has more than one connected component.

    ``labels[i]`` is the component id of node ``i``.
    """

    def __init__(self, message, labels):
        super().__init__(message)
        self.labels = labels

    @property
    def n_components(self):
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def components(self):
        return [list(map(int, (self.labels == c).nonzero()[0]))
                for c in range(self.n_components)]


class NumericalFailure(EmbedError):
    pass


class InvalidCorrection(EmbedError):
    pass


class NonEmbeddableDirection(EmbedError):
    pass


class SingularLandmarkBlock(EmbedError):
    pass


class ParseError(EmbedError):
    pass


class EmptyInput(ParseError):
    pass


class ModelFormatError(EmbedError):
    pass
