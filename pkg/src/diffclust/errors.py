"""Exception hierarchy shared by all diffclust modules."""


class DiffclustError(Exception):
    """Base class for every error raised by this package."""


class SimulationError(DiffclustError):
    """A diffusion step produced a non-finite value."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ErgodicityError(DiffclustError):
    """The speed measure does not integrate to a finite constant."""


class BasisError(DiffclustError):
    """Degenerate knots or a singular Gram matrix."""


class MetricError(DiffclustError):
    """Incompatible inputs for a dissimilarity measure."""


class ClusteringError(DiffclustError):
    pass


class PipelineError(DiffclustError):
    """Invalid configuration, malformed input file or I/O failure."""


class DegenerateOperatorWarning(UserWarning):
    """No observation of a path falls inside the basis support."""


class DegenerateEmbeddingWarning(UserWarning):
    pass
