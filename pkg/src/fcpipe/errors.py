"""Exception hierarchy shared by every pipeline stage.

Class names follow the pipeline's error vocabulary so that callers (and the
CLI) can report failures by name.
"""


class PipelineError(ValueError):
    """Base class for all data and configuration errors raised by fcpipe."""


# ingest
class MissingFile(PipelineError, FileNotFoundError):
    pass


class RaggedRows(PipelineError):
    pass


class NonNumericCell(PipelineError):
    pass


class DuplicateRegionLabel(PipelineError):
    pass


class TooFewRows(PipelineError):
    pass


class DuplicateSubject(PipelineError):
    pass


class UnknownLabel(PipelineError):
    pass


class ClassUnderpopulated(PipelineError):
    pass


class RegionMismatch(PipelineError):
    pass


class TrMismatch(PipelineError):
    pass


# denoise
class OrderTooHigh(PipelineError):
    pass


class BandOutOfRange(PipelineError):
    pass


class RankDeficientDesign(PipelineError):
    pass


class LengthMismatch(PipelineError):
    pass


# connectivity
class ZeroVarianceRegion(PipelineError):
    def __init__(self, region, subject_id=None):
        self.region = region
        self.subject_id = subject_id
        where = f" in subject {subject_id!r}" if subject_id else ""
        super().__init__(f"region {region!r} has zero variance{where}")


class TauOutOfRange(PipelineError):
    pass


class DensityOutOfRange(PipelineError):
    pass


# features
class MissingSubjectVector(PipelineError):
    def __init__(self, subject_id):
        self.subject_id = subject_id
        super().__init__(f"no feature vector for subject {subject_id!r}")


class FeatureNameMismatch(PipelineError):
    pass


# classify
class SingleClassTraining(PipelineError):
    pass


class DivergedLoss(PipelineError):
    pass


class DimensionMismatch(PipelineError):
    pass


class SingleClassLabels(PipelineError):
    pass


# simulate / cli
class SpecInvalid(PipelineError):
    pass


class MalformedReport(PipelineError):
    pass


class ConfigError(PipelineError):
    pass
