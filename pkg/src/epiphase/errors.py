"""Exception hierarchy shared by all analysis stages."""


class EpiphaseError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(EpiphaseError, ValueError):
    pass


class OutOfRangeError(EpiphaseError, ValueError):
    pass


class UndefinedBaselineError(EpiphaseError, ZeroDivisionError):
    """A reduction was requested against a zero baseline volume."""


class EmptySeriesError(EpiphaseError, ValueError):
    pass


class MissingDataError(EpiphaseError, ValueError):
    pass


class InsufficientDataError(EpiphaseError, ValueError):
    pass


class DegenerateRegressorError(EpiphaseError, ValueError):
    pass


class UndefinedDayError(EpiphaseError, ValueError):
    """A contact-location set needed for a day-pair metric is empty."""


class InvalidRecordError(EpiphaseError, ValueError):
    pass


class SensorRejectedError(EpiphaseError):
    """One or more sensors exceed the allowed missing-cell rate."""

    def __init__(self, sensor_ids, rates=None):
        self.sensor_ids = list(sensor_ids)
        self.rates = dict(rates or {})
        super().__init__(
            "sensor(s) above missing-rate ceiling: "
            + ", ".join(str(s) for s in self.sensor_ids)
        )
