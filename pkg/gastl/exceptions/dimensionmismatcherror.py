# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Dimension mismatch error; matrix shapes do not agree
"""

from .invalidinputerror import InvalidInputError


class DimensionMismatchError(InvalidInputError):
    """
    Exception raised when the shapes of two or more matrices are not compatible
    """

    def __init__(self, name: str, expected: tuple | int | str, actual: tuple | int | str):
        """
        Set up the new DimensionMismatchError object
        """
        self.name = name
        self.expected = expected
        self.actual = actual
        super().__init__(f"Dimension mismatch for {name}: expected {expected}, got {actual}")
