import logging
import os
import uuid

from config import ScenarioConfig
from memory_store import MemoryStore
from scenario_agent import SCENARIOS

STATUS_ERROR = 1


class ScenarioOrchestrator:
    def __init__(self, cfg: ScenarioConfig, memory=None):
        self.cfg = cfg
        self.memory = memory if memory is not None else MemoryStore(os.path.join(cfg.out_dir, "run_log.jsonl"))
        self.run_id = str(uuid.uuid4())
        self.logger = logging.getLogger(__name__)

    def route_scenario(self, name):
        name = name.strip().lower()
        if name == "all":
            return self._run_all()

        handler = SCENARIOS.get(name)
        if handler is None:
            return {"scenario": name, "error": f"Unsupported scenario: {name}", "status": STATUS_ERROR}

        self.logger.info(f"[Orchestrator] Running scenario {name}")
        try:
            result = handler(self.cfg, self.memory)
        except Exception as e:
            self.logger.error(f"[Orchestrator] Scenario {name} failed: {e}")
            result = {"scenario": name, "error": f"{type(e).__name__}: {e}", "status": STATUS_ERROR}

        self.memory.log("Orchestrator", result, scenario=name, run_id=self.run_id)
        self.logger.info(f"[Orchestrator] {name} finished with status {result['status']}")
        return result

    def _run_all(self):
        results = [self.route_scenario(name) for name in SCENARIOS]
        statuses = [r["status"] for r in results]
        # an operational error outranks a reproduction mismatch
        status = STATUS_ERROR if STATUS_ERROR in statuses else max(statuses)
        return {"scenario": "all", "status": status, "results": results}
