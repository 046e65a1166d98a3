"""Python front end for the pstore simulator.

Scenario entry points return the parsed JSON report with the process-style
exit code under ``"exit_code"``.
"""

import json

from . import _core
from ._core import Cluster, Error, fixtures, sha1_hex

__all__ = ["Cluster", "Error", "fixtures", "sha1_hex", "in_ring", "run", "run_text", "sweep", "restart",
           "interleave"]


def _hex(k):
    return k if isinstance(k, str) else format(k, "040x")


def in_ring(k, lo, hi):
    """k in (lo, hi] clockwise; keys are ints below 2**160 or 40-digit hex."""
    return _core.in_ring(_hex(k), _hex(lo), _hex(hi))


def _report(pair):
    code, text = pair
    report = json.loads(text)
    report["exit_code"] = code
    return report


def run(scenario, durable=None):
    return _report(_core.run(scenario, durable))


def run_text(text, name="", durable=None):
    return _report(_core.run_text(text, name, durable))


def sweep(scenario, commit, durable=None):
    return _report(_core.sweep(scenario, commit, durable))


def restart(scenario, split, durable=None):
    return _report(_core.restart(scenario, split, durable))


def interleave(policy="optimistic", seed=42):
    return _report(_core.interleave(policy, seed))
