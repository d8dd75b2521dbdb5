"""Exception hierarchy. Everything raised on bad input derives from SeqPredictError."""


class SeqPredictError(ValueError):
    pass


class SequenceTooShort(SeqPredictError):
    pass


class InvalidAlphabet(SeqPredictError):
    pass


class NoTransitions(SeqPredictError):
    pass


class InvalidCount(SeqPredictError):
    pass


class MismatchedProvenance(SeqPredictError):
    pass


class InsufficientReplicates(SeqPredictError):
    pass


class DegenerateVariance(SeqPredictError):
    pass


class TooFewRemaining(SeqPredictError):
    pass


class InvalidRate(SeqPredictError):
    pass


class FormatError(SeqPredictError):
    pass


class InvalidSpec(SeqPredictError):
    pass


class NoConvergence(SeqPredictError):
    pass


class OracleScaleExceeded(SeqPredictError):
    pass
