"""Exception hierarchy shared by every module."""


class LabError(Exception):
    pass


class InvalidArgument(LabError, ValueError):
    pass


class ResourceLimit(LabError):
    """Raised when an enumeration or generator would exceed its size guard."""


class Unrealizable(LabError):
    """The observed examples are not consistent with any hypothesis of the class."""


class ProtocolError(LabError):
    pass


class ParseError(LabError, ValueError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
