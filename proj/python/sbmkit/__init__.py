"""Python access to the sbmkit C++ core.

Closed-form and quadrature quantities are exposed directly (``Family``,
``Ladder``, ``Kernels``); every CLI command is available through ``run``.
"""

import json

from ._sbmkit import (
    ConfigError,
    Family,
    InversionError,
    Kernels,
    Ladder,
    QuadratureError,
    SimulationError,
    Subordinator,
    __version__,
    commands,
    stable_ball_exit_time,
    stable_ball_green,
)
from ._sbmkit import _execute

__all__ = [
    "ConfigError",
    "Family",
    "InversionError",
    "Kernels",
    "Ladder",
    "QuadratureError",
    "Result",
    "SimulationError",
    "Subordinator",
    "__version__",
    "commands",
    "run",
    "stable_ball_exit_time",
    "stable_ball_green",
]


class Result:
    """Report document, overall verdict and CSV text of one command run."""

    def __init__(self, document, passed, csv):
        self.document = document
        self.passed = passed
        self.csv = csv

    def __repr__(self):
        return f"Result(command={self.document['config']['command']!r}, passed={self.passed})"


def run(command, **params):
    """Run a CLI command in-process, e.g. ``run("phi", family="mixture", beta=0.5)``.

    Keys and defaults are those of ``sbmkit <command> --help``; an unknown key
    or a value of the wrong type raises ``ConfigError``.
    """
    doc, passed, csv = _execute(command, json.dumps(params))
    return Result(json.loads(doc), passed, csv)
