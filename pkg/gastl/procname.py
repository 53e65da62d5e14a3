# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Manage the main and grid worker process names
"""

from __future__ import annotations

from typing import Optional

import loguru
from setproctitle import setproctitle


class ProcName:
    """
    Manage the main and grid worker process names
    """

    def __init__(self, role: str, log_context: loguru.Logger, run: Optional[str] = None):
        """
        Set up the new process name manager
        """

        # Set the logging context
        self.log = log_context.bind(subsystem="utility")

        # Set the base process name that will be used
        self._base = f"gastl {role} [{run}]" if run else f"gastl {role}"

        # Log setup
        self.log.bind(event="debug").debug("Created process name manager with base name '{base}'", base=self._base)

    @property
    def base(self) -> str:
        """
        Return the base process name
        """
        return self._base

    def update(self, message: str) -> str:
        """
        Set the process name to the base name followed by the message and return it
        """
        # Combine the base process name with the new message
        procname = f"{self._base}: {message}"

        # Set the process name
        try:
            setproctitle(procname)
        # pylint: disable=broad-except
        except Exception as exc:
            self.log.bind(event="error").warning("Exception while changing process name: {exception}", exception=exc)
        else:
            self.log.bind(event="debug").trace("Set new process name: '{procname}'", procname=procname)

        # Return the new process name
        return procname
