"""
Exceptions for rejected user input.
"""


class ValidationError(Exception):
    """
    Raised when user supplied values cannot be accepted.
    error_dict maps the offending field to a message.
    """

    def __init__(self, error_dict):
        if not isinstance(error_dict, dict):
            error_dict = {"message": error_dict}
        self.error_dict = error_dict
        super().__init__(str(self))

    def __str__(self):
        return "; ".join(f"{field}: {msg}" for field, msg in self.error_dict.items())


class ObjectNotFound(Exception):
    pass
