"""Exception hierarchy shared by every module.

Each error carries a short machine-readable ``code`` so the CLI can emit
structured failure records.
"""

from __future__ import annotations


class OrthoExpError(Exception):
    code = "error"

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


class EmptyInput(OrthoExpError):
    code = "empty_input"


class DegenerateInput(OrthoExpError):
    code = "degenerate_input"


class DimensionTooLarge(OrthoExpError):
    code = "dimension_too_large"


class SingularMatrix(OrthoExpError):
    code = "singular_matrix"


class NumericModeUnsupported(OrthoExpError):
    code = "numeric_mode_unsupported"


class AxisOutOfRange(OrthoExpError):
    code = "axis_out_of_range"


class NotSimple(OrthoExpError):
    code = "not_simple"


class NotSimpleAtVertex(NotSimple):
    code = "not_simple_at_vertex"


class NotRational(OrthoExpError):
    code = "not_rational"


class IrrationalAxis(NotRational):
    code = "irrational_axis"


class SingularFrequency(OrthoExpError):
    code = "singular_frequency"

    def __init__(self, message: str, edge: tuple[int, int] | None = None):
        super().__init__(message)
        self.edge = edge

    def to_dict(self) -> dict:
        out = super().to_dict()
        if self.edge is not None:
            out["edge"] = list(self.edge)
        return out


class EnumerationExhausted(OrthoExpError):
    code = "enumeration_exhausted"


class AxisEdgeViolation(OrthoExpError):
    code = "axis_edge_violation"


class NoIntegerKernel(OrthoExpError):
    code = "no_integer_kernel"


class AmbiguousReconstruction(OrthoExpError):
    code = "ambiguous_reconstruction"


class DependentSigmas(OrthoExpError):
    code = "dependent_sigmas"


class SingularU(OrthoExpError):
    code = "singular_u"


class NoIntersection(OrthoExpError):
    code = "no_intersection"


class NotInterior(OrthoExpError):
    code = "not_interior"


class MethodUnavailable(OrthoExpError):
    code = "method_unavailable"


class LambdaNotInSet(OrthoExpError):
    code = "lambda_not_in_set"


class SourceTooSmall(OrthoExpError):
    code = "source_too_small"


class InvalidKernel(OrthoExpError):
    code = "invalid_kernel"
