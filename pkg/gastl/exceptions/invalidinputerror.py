# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Invalid input error; an argument or configuration value is outside its domain
"""


class InvalidInputError(Exception):
    """
    Exception raised when an operation receives arguments it cannot work with
    """

    def __init__(self, message: str):
        """
        Set up the new InvalidInputError object
        """
        self.message = message

    def __str__(self):
        return self.message
