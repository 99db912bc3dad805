"""Exception types raised across the netspam package."""


class NetSpamError(Exception):
    """Base class for all package errors."""


class DatasetError(NetSpamError, ValueError):
    pass


class DuplicateReviewId(DatasetError):
    def __init__(self, review_id):
        super().__init__(f"duplicate review_id {review_id!r}")
        self.review_id = review_id


class RatingOutOfRange(DatasetError):
    def __init__(self, review_id, rating):
        super().__init__(f"review {review_id!r}: rating {rating!r} not in 1..5")
        self.review_id = review_id
        self.rating = rating


class InvalidDate(DatasetError):
    def __init__(self, review_id, date):
        super().__init__(f"review {review_id!r}: invalid date {date!r}")
        self.review_id = review_id
        self.date = date


class ParseError(DatasetError):
    def __init__(self, line, message=""):
        text = f"line {line}: parse error"
        if message:
            text += f": {message}"
        super().__init__(text)
        self.line = line


class MissingField(DatasetError):
    def __init__(self, name, line=None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"missing field {name!r}{where}")
        self.name = name
        self.line = line


class InfeasibleConfig(NetSpamError, ValueError):
    pass


class NoLabels(NetSpamError, ValueError):
    pass


class UnknownReview(NetSpamError, KeyError):
    def __init__(self, review_id):
        super().__init__(review_id)
        self.review_id = review_id

    def __str__(self):
        return f"unknown review {self.review_id!r}"


class DegenerateGroundTruth(NetSpamError, ValueError):
    pass


class LengthMismatch(NetSpamError, ValueError):
    pass


class TooFewPoints(NetSpamError, ValueError):
    pass
