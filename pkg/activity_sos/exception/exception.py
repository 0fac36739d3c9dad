# ================================
# 🚨 Custom Exceptions
# ================================
import sys
from typing import Optional


class ActivitySemanticsException(Exception):
    """
    Base error of the engine.

    Records the script name and line number of the failure so that
    log files point at the rule or component that broke, the same way
    every component wraps its body:

        try:
            ...
        except Exception as e:
            raise ActivitySemanticsException(e, sys)
    """

    def __init__(self, error_message, error_details=sys):
        super().__init__(str(error_message))
        self.error_message = error_message

        _, _, exc_tb = error_details.exc_info()
        if exc_tb is not None:
            # innermost frame is where the original error was raised
            while exc_tb.tb_next is not None:
                exc_tb = exc_tb.tb_next
            self.lineno = exc_tb.tb_lineno
            self.file_name = exc_tb.tb_frame.f_code.co_filename
        else:
            # raised directly, not while handling: report the caller
            frame = sys._getframe(1)
            while frame.f_back is not None and frame.f_code.co_filename == __file__:
                frame = frame.f_back
            self.lineno = frame.f_lineno
            self.file_name = frame.f_code.co_filename

    def __str__(self):
        return "Error occurred in python script name [{0}] line number [{1}] error message [{2}]".format(
            self.file_name, self.lineno, str(self.error_message)
        )


class ModelParseError(ActivitySemanticsException):
    """Syntax error, duplicate identifier or unknown node kind in a model document."""

    def __init__(self, error_message, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            error_message = f"{error_message} (line {line}, column {column})"
        super().__init__(error_message, sys)


class GuardEvaluationError(ActivitySemanticsException):
    def __init__(self, error_message):
        super().__init__(error_message, sys)


class BehaviorError(ActivitySemanticsException):
    def __init__(self, error_message):
        super().__init__(error_message, sys)


class StaleInstanceError(ActivitySemanticsException):
    def __init__(self, error_message):
        super().__init__(error_message, sys)


class ExplorationLimitError(ActivitySemanticsException):
    def __init__(self, error_message):
        super().__init__(error_message, sys)


class AlphabetMismatchError(ActivitySemanticsException):
    def __init__(self, error_message):
        super().__init__(error_message, sys)


class ProfileError(ActivitySemanticsException):
    def __init__(self, error_message):
        super().__init__(error_message, sys)


def reraise(e: Exception):
    """Keeps typed engine errors intact, wraps everything else."""
    if isinstance(e, ActivitySemanticsException):
        return e
    return ActivitySemanticsException(e, sys)
