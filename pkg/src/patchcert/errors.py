"""Exception hierarchy shared across the package."""


class PatchCertError(Exception):
    """Base class for all patchcert errors."""


class InvalidSchemeError(PatchCertError, ValueError):
    pass


class InvalidPatchError(PatchCertError, ValueError):
    pass


class InvalidKError(PatchCertError, ValueError):
    pass


class OracleTooLargeError(PatchCertError):
    """The instance exceeds the brute-force oracle's size caps."""


class VoteDataError(PatchCertError, ValueError):
    """Base class for vote-table validation failures."""


class MalformedRecordError(VoteDataError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: malformed record ({reason})")
        self.line_no = line_no


class LengthMismatchError(VoteDataError):
    pass


class LabelRangeError(VoteDataError):
    pass


class DuplicateIdError(VoteDataError):
    pass


class EmptyDatasetError(VoteDataError):
    pass


class UnknownProfileError(PatchCertError, ValueError):
    pass
