import logging
import os
import sys
from typing import List, Tuple

import config

_OUTPUTS = ("stdout", "stderr", "file", "none")


def resolve_outputs(debug: bool = False) -> Tuple[List[str], str]:
    """(output names, log file path) for the normal or debug profile."""
    if debug:
        outputs = getattr(config, "DEBUG_LOG_OUTPUTS", config.LOG_OUTPUTS)
        path = getattr(config, "DEBUG_LOG_FILE_PATH", config.LOG_FILE_PATH)
    else:
        outputs = config.LOG_OUTPUTS
        path = config.LOG_FILE_PATH
    names = []
    for part in outputs.split(","):
        name = part.strip().lower()
        if not name:
            continue
        if name not in _OUTPUTS:
            raise ValueError(f"unknown log output '{name}', expected some of {_OUTPUTS}")
        if name not in names:
            names.append(name)
    return names, path


def _file_handler(path: str) -> logging.Handler:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    return logging.FileHandler(path, encoding="utf-8")


def build_handlers(verbose: bool = True, debug: bool = False) -> List[logging.Handler]:
    """
    Handlers for a pipeline logger.

    `none` silences the logger. Without any usable output the logger falls
    back to stderr, since stdout carries the subcommand summary lines.
    """
    if not verbose:
        return []
    names, path = resolve_outputs(debug)
    if "none" in names:
        return []
    streams = {"stdout": sys.stdout, "stderr": sys.stderr}
    handlers = [_file_handler(path) if name == "file" else logging.StreamHandler(streams[name]) for name in names]
    return handlers or [logging.StreamHandler(sys.stderr)]
