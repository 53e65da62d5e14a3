# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Version information for the GASTL application.
"""

import importlib.metadata

__version__ = importlib.metadata.version("gastl")
