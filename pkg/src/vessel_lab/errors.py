"""Exception hierarchy shared by all vessel_lab modules."""


class VesselLabError(Exception):
    """Base class for every error raised by vessel_lab."""


class SingularMatrix(VesselLabError):
    pass


class SylvesterSingular(VesselLabError):
    """The Kronecker system of a Sylvester equation is numerically singular.

    Callers that propagate vessels catch this and fall back to path
    integration of the state equations.
    """


class Overflow(VesselLabError):
    pass


class MalformedRealization(VesselLabError):
    pass


class SchemaError(VesselLabError):
    """A realization document does not conform to the file schema."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class GenerationFailed(VesselLabError):
    pass


class PropagationDiverged(VesselLabError):
    pass


class ConventionError(VesselLabError):
    """Requested a (x, t) point the active sign convention cannot reach."""


class SingularState(VesselLabError):
    """X(x, t) is numerically singular, i.e. the point lies on the singular set."""


class OnSpectrum(VesselLabError):
    pass


class IntegrationThroughSingularity(VesselLabError):
    pass


class DegenerateFit(VesselLabError):
    pass


class TooFewPoints(VesselLabError):
    pass
