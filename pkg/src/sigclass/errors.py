"""Exception hierarchy for the sigclass pipeline."""


class SigclassError(Exception):
    """Base class for all library errors."""


class MalformedRow(SigclassError):
    def __init__(self, line_no, reason=""):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: malformed row" + (f" ({reason})" if reason else ""))


class RangeViolation(SigclassError):
    def __init__(self, line_no, field, value=None):
        self.line_no = line_no
        self.field = field
        self.value = value
        super().__init__(f"line {line_no}: {field} out of range" + (f" ({value!r})" if value is not None else ""))


class DuplicateKey(SigclassError):
    def __init__(self, epoch, sat_id):
        self.epoch = epoch
        self.sat_id = sat_id
        super().__init__(f"duplicate (epoch, sat_id) = ({epoch}, {sat_id})")


class UnsortedStream(SigclassError):
    pass


class InsufficientClassSamples(SigclassError):
    def __init__(self, signal_class, available, requested):
        self.signal_class = signal_class
        self.available = available
        self.requested = requested
        super().__init__(
            f"class {signal_class}: requested {requested} samples, only {available} available"
        )


class EmptyDataset(SigclassError):
    pass


class EmptyNode(SigclassError):
    pass


class TooFewSamples(SigclassError):
    def __init__(self, signal_class, count, k):
        self.signal_class = signal_class
        super().__init__(f"class {signal_class} has {count} samples, need at least k={k}")


class CorruptModel(SigclassError):
    def __init__(self, reason):
        self.reason = reason
        super().__init__(f"corrupt model file: {reason}")


class SceneError(SigclassError):
    pass
