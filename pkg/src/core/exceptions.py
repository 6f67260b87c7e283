"""
Exceptions

Error hierarchy shared by the geometry kernel, the chain calculus and the
command-line interface. The CLI maps these onto exit codes.
"""


class CircleChainError(Exception):
    """Base class for every error raised by the package."""


class DegenerateGeometryError(CircleChainError):
    """Collinear, parallel, coincident or zero-length input."""


class IncidenceError(CircleChainError):
    """A point that must lie on a circle does not."""


class JointError(CircleChainError):
    """
    An ill-posed chain joint.

    Args:
        message (str): What went wrong at the joint
        index (int, optional): Zero-based joint index inside the chain
    """

    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message if index is None else f"joint {index + 1}: {message}")


class IterationError(CircleChainError):
    """Failure while iterating pivot maps; carries the step and start index."""

    def __init__(self, step, message, start_index=None):
        self.step = step
        self.start_index = start_index
        prefix = f"step {step}"
        if start_index is not None:
            prefix = f"start {start_index}, {prefix}"
        super().__init__(f"{prefix}: {message}")


class GenerationError(CircleChainError):
    """A scene generator ran out of retries."""


class PoleError(CircleChainError):
    """A point or circle hits the pole of a Möbius map."""


class SceneFormatError(CircleChainError):
    """
    Invalid scene or report document.

    Args:
        path (str): JSON path of the offending value, e.g. ``chain.pivots[2]``
        message (str): Description of the violated rule
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
