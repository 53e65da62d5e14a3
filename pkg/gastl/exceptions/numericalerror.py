# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Numerical error; a computation produced non-finite values or an unsolvable system
"""

from typing import Optional


class NumericalError(Exception):
    """
    Exception raised when a numerical kernel cannot produce a finite result
    """

    def __init__(self, message: str, block: Optional[str] = None, iteration: Optional[int] = None):
        """
        Set up the new NumericalError object
        """
        self.block = block
        self.iteration = iteration
        self.detail = message

        # Build the full message from the available context
        parts = []
        if iteration is not None:
            parts.append(f"outer iteration {iteration}")
        if block is not None:
            parts.append(f"block {block}")
        self.message = f"{message} ({', '.join(parts)})" if parts else message

    def at_iteration(self, iteration: int) -> "NumericalError":
        """
        Return a copy of this error tagged with the outer iteration it was raised in
        """
        return NumericalError(self.detail, block=self.block, iteration=iteration)

    def __str__(self):
        return self.message
