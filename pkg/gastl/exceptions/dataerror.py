# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Data error; a data file could not be parsed or the loaded data is inconsistent
"""

from pathlib import Path
from typing import Optional


class DataError(Exception):
    """
    Exception raised when a data file is malformed or a dataset violates its invariants
    """

    def __init__(self, message: str, path: Optional[Path] = None, line: Optional[int] = None):
        """
        Set up the new DataError object
        """
        self.path = path
        self.line = line

        # Prefix the location when known
        if path is not None and line is not None:
            message = f"{path}:{line}: {message}"
        elif path is not None:
            message = f"{path}: {message}"

        self.message = message

    def __str__(self):
        return self.message
