import json
import logging
import os
import uuid
from datetime import datetime


class MemoryStore:
    """Append-only run log, one JSON object per line."""

    def __init__(self, path="run_log.jsonl"):
        self.path = path
        self.logger = logging.getLogger(__name__)
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)

    def reset(self):
        with open(self.path, "w", encoding="utf-8"):
            pass
        self.logger.info(f"[MemoryStore] {self.path} truncated.")

    def log(self, source, data, scenario=None, run_id=None):
        entry = {
            "id": str(uuid.uuid4()),
            "timestamp": str(datetime.now()),
            "source": source,
            "scenario": scenario,
            "run_id": run_id,
            "data": data,
        }
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(json.dumps(entry, default=str) + "\n")

        self.logger.debug(f"[Memory Log] Added entry: {entry['id']} from {source}")
        return entry["id"]

    def get_all(self):
        if not os.path.exists(self.path):
            return []
        result = []
        with open(self.path, "r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line:
                    result.append(json.loads(line))
        return result
