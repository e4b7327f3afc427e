"""DarTwin models from Python: parse, flatten, diff, apply and render."""

import json

from ._dartwin import DartwinError, Workspace, format_source, run, tokenize

__all__ = [
    "DartwinError",
    "Workspace",
    "format_source",
    "load",
    "model_json",
    "run",
    "tokenize",
]


def load(*paths):
    """Workspace over the given files."""
    ws = Workspace()
    for p in paths:
        ws.load_file(str(p))
    return ws


def model_json(ws):
    """Element list of a workspace as Python data."""
    return json.loads(ws.export_json())
