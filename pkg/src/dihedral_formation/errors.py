"""Exception types.

Every error carries a short machine-readable ``code`` which the CLI prints
on failure.
"""


class FormationError(ValueError):
    code = "formation-error"


class InvalidOrderError(FormationError):
    code = "invalid-order"


class NormalizationError(FormationError):
    code = "normalization"


class InvalidMirrorError(FormationError):
    code = "invalid-mirror"


class WrongKindError(FormationError):
    code = "wrong-kind"


class IncompatibleError(FormationError):
    code = "incompatible"


class InvalidEdgeError(FormationError):
    code = "invalid-edge"


class UnassignedEdgesError(FormationError):
    code = "unassigned-edges"


class InvalidAnchorError(FormationError):
    code = "invalid-anchor"


class ShapeError(FormationError):
    code = "shape"


class InvalidScaleError(FormationError):
    code = "invalid-scale"


class NoPathError(FormationError):
    code = "no-path"


class NumericError(FormationError):
    """Base for numeric diagnostics (CLI exit code 3)."""

    code = "numeric"


class AsymmetryError(NumericError):
    code = "asymmetry"


class AmbiguousNullspaceError(NumericError):
    code = "ambiguous-nullspace"


class NoPositiveEigenvalueError(NumericError):
    code = "no-positive-eigenvalue"


class UnstableStepError(NumericError):
    code = "unstable-step"


class DivergenceError(FormationError):
    code = "divergence"

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class ScenarioError(FormationError):
    code = "parse-error"
