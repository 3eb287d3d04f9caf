"""Exception hierarchy shared by all btparam modules."""


class BtParamError(Exception):
    """Base class for every error raised by btparam."""

    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class CurveError(BtParamError, ValueError):
    code = "curve_error"


class TooFewPoints(CurveError):
    code = "too_few_points"


class DegenerateEdge(CurveError):
    code = "degenerate_edge"


class NotSymmetric(CurveError):
    code = "not_symmetric"


class TriangleViolation(CurveError):
    code = "triangle_violation"

    def __init__(self, triple, excess):
        self.triple = tuple(int(i) for i in triple)
        self.excess = float(excess)
        i, j, k = self.triple
        super().__init__(
            f"D[{i}][{j}] exceeds D[{i}][{k}] + D[{k}][{j}] by {self.excess:.3g}"
        )

    def to_dict(self):
        d = super().to_dict()
        d["triple"] = list(self.triple)
        return d


class NotSimple(CurveError):
    code = "not_simple"


class SamePoint(CurveError):
    code = "same_point"


class DivisionError(BtParamError):
    code = "division_error"


class NoConvergence(DivisionError):
    code = "no_convergence"


class DegenerateSpan(DivisionError, ValueError):
    code = "degenerate_span"


class DepthExceedsResolution(BtParamError, ValueError):
    code = "depth_exceeds_resolution"


class BadChildCount(BtParamError, ValueError):
    code = "bad_child_count"


class LevelOutOfRange(BtParamError, ValueError):
    code = "level_out_of_range"


class NoneContained(BtParamError):
    code = "none_contained"


class BadConstant(BtParamError, ValueError):
    code = "bad_constant"


class BadParams(BtParamError, ValueError):
    code = "bad_params"


class InputError(BtParamError, ValueError):
    """Unreadable or malformed input file."""

    code = "input_error"
