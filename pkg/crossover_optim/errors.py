# crossover_optim/errors.py
# Exception hierarchy; the CLI maps each class to its exit code.


class CrossoverError(Exception):
    """Base error. `code` is the short tag written into sweep cells."""

    exit_code = 1
    code = "error"


class InvalidInputError(CrossoverError, ValueError):
    exit_code = 2
    code = "invalid_input"


class UnsupportedError(InvalidInputError):
    code = "unsupported"


class ClassViolationError(InvalidInputError):
    code = "class_violation"


class NotPositiveDefiniteError(CrossoverError, ArithmeticError):
    exit_code = 3
    code = "not_pd"

    def __init__(self, message, eigenvalue=None):
        if eigenvalue is not None:
            message = f"{message} (smallest eigenvalue {eigenvalue:.6g})"
        super().__init__(message)
        self.eigenvalue = eigenvalue


class NumericalError(CrossoverError, ArithmeticError):
    exit_code = 3
    code = "numerical"


class CapacityError(CrossoverError):
    exit_code = 4
    code = "capacity"
