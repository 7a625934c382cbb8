"""Exception hierarchy; each module owns a distinct CLI exit code."""


class CiterankError(Exception):
    exit_code = 1


class IngestError(CiterankError):
    exit_code = 10


class EmptyDatasetError(IngestError):
    pass


class CocitationError(CiterankError):
    exit_code = 11


class BudgetExceededError(CocitationError):
    pass


class MetricError(CiterankError):
    exit_code = 12


class InconsistencyError(MetricError):
    pass


class RankingError(CiterankError):
    exit_code = 13


class EvalError(CiterankError):
    exit_code = 14


class SynthError(CiterankError):
    exit_code = 15
