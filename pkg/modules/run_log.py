import json
import os
from datetime import datetime, timezone
from typing import Any, Dict, Optional


def _utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def append_run_record(command: str, payload: Dict[str, Any], path: Optional[str] = None) -> None:
    """Append one JSON line describing a finished subcommand run."""
    try:
        import config
    except Exception:
        config = None

    if not path and config is not None:
        if getattr(config, "RUN_LOGGER", "jsonl") == "none":
            return
        path = getattr(config, "RUN_LOG_PATH", "")

    if not path:
        return
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    record = {"ts": _utc_now_iso(), "command": command, **payload}
    with open(path, "a", encoding="utf-8") as f:
        f.write(json.dumps(record, ensure_ascii=False) + "\n")
