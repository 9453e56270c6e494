"""Aggregate loss distributions and VaR allocation for insured portfolios."""

import json

from ._core import *  # noqa: F401,F403
from ._core import DEFAULT_LEVELS, build_report_json

__version__ = "0.1.0"


def build_report(portfolio, banded, distribution, levels=DEFAULT_LEVELS):
    """Risk report as a nested dict (same layout as the CLI's report.json)."""
    return json.loads(build_report_json(portfolio, banded, distribution, list(levels)))
