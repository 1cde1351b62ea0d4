"""Exception hierarchy shared by all modules."""


class ModelkitError(Exception):
    """Base class; the CLI maps every subclass to exit code 1."""

    code = "ModelkitError"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


def _make(name, doc):
    return type(name, (ModelkitError,), {"__doc__": doc, "code": name})


NonUpperHalfZero = _make("NonUpperHalfZero", "A Blaschke zero is not in the open upper half-plane.")
NonUpperHalfPoint = _make("NonUpperHalfPoint", "A kernel point is not in the open upper half-plane.")
PoleHit = _make("PoleHit", "Evaluation point coincides with a pole of the inner function.")
TailNotBounded = _make("TailNotBounded", "Infinite product without a usable tail bound.")
GridTooCoarse = _make("GridTooCoarse", "Sampling grid too coarse for the requested operation.")
NotIntegrable = _make("NotIntegrable", "Function failed the L^1(dt/(1+t^2)) witness.")
SingularitySwamp = _make("SingularitySwamp", "Integrand is unbounded near the evaluation point.")
NonRealPoint = _make("NonRealPoint", "Counting function requested for a non-real sequence.")
InexactBracket = _make("InexactBracket", "Density bracket is not exact.")
InexactDensity = _make("InexactDensity", "Decision needs an exact density.")
IllConditionedBasis = _make("IllConditionedBasis", "Gram matrix of the kernel basis is ill-conditioned.")
DegenerateSystem = _make("DegenerateSystem", "Interpolation system is degenerate.")
ToleranceNotMet = _make("ToleranceNotMet", "Construction residuals exceed the tolerance.")
NotSquareIntegrable = _make("NotSquareIntegrable", "Function has a non-decaying component on the line.")
SchemaError = _make("SchemaError", "Input document does not match the expected schema.")
InconsistentDensity = _make("InconsistentDensity", "Sequence tested strongly regular for two different slopes.")
FiniteBlaschkeTheta = _make("FiniteBlaschkeTheta", "Inner function is a finite Blaschke product.")
