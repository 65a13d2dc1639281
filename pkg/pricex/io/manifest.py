import json
import os
from dataclasses import asdict
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path
from typing import Optional

from loguru import logger

logger = logger.bind(module="io")

MANIFEST_NAME = "manifest.json"

PENDING = "pending"
DONE = "done"
FAILED = "failed"
SKIPPED = "skipped"


@dataclass
class RunManifest:
    """
    Record of a pipeline run, persisted as JSON in the run directory.

    Parameters
    ----------
    config_hash : str
        Hash of the configuration the artifacts were produced with
    days : dict
        ISO date -> stage -> status ("pending", "done", "failed" or "skipped")
    errors : dict
        ISO date -> stage -> error message of a failed stage
    outputs : dict
        ISO date -> stage -> artifact path relative to the run directory
    diagnostics : dict
        ISO date -> stage -> solver and fit diagnostics
    timings : dict
        Stage -> wall-clock seconds of its last execution
    reports : list
        Evaluation files relative to the run directory
    """

    config_hash: str
    days: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    reports: list = field(default_factory=list)

    def register(self, day: str, stages):
        """Give every stage of `day` a status."""
        status = self.days.setdefault(day, {})
        for stage in stages:
            status.setdefault(stage, PENDING)

    def status(self, day: str, stage: str) -> Optional[str]:
        return self.days.get(day, {}).get(stage)

    def mark(
        self,
        day: str,
        stage: str,
        status: str,
        output: Optional[str] = None,
        error: Optional[str] = None,
        diagnostics: Optional[dict] = None,
    ):
        self.days.setdefault(day, {})[stage] = status
        if output is not None:
            self.outputs.setdefault(day, {})[stage] = output
        if error is not None:
            self.errors.setdefault(day, {})[stage] = error
        else:
            self.errors.get(day, {}).pop(stage, None)
        if diagnostics is not None:
            self.diagnostics.setdefault(day, {})[stage] = diagnostics

    def is_done(self, day: str, stage: str, run_dir) -> bool:
        """Completed stages count only while their artifact is still on disk."""
        if self.status(day, stage) != DONE:
            return False
        output = self.outputs.get(day, {}).get(stage)
        return output is None or (Path(run_dir) / output).exists()

    def failed_days(self, days, stages) -> list[str]:
        return [d for d in days if any(self.status(d, s) == FAILED for s in stages)]

    def failure_share(self, days, stages) -> float:
        days = list(days)
        if not days:
            return 0.0
        return len(self.failed_days(days, stages)) / len(days)

    def to_dict(self) -> dict:
        return asdict(self)

    def save(self, run_dir) -> Path:
        path = Path(run_dir) / MANIFEST_NAME
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".json.tmp")
        with open(tmp, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
        os.replace(tmp, path)
        return path

    @classmethod
    def load(cls, run_dir) -> "RunManifest":
        with open(Path(run_dir) / MANIFEST_NAME) as f:
            return cls(**json.load(f))

    @classmethod
    def open(cls, run_dir, config_hash: str) -> "RunManifest":
        """Resume the manifest of `run_dir`, or start a new one if the configuration changed."""
        path = Path(run_dir) / MANIFEST_NAME
        if path.exists():
            manifest = cls.load(run_dir)
            if manifest.config_hash == config_hash:
                return manifest
            logger.warning(
                f"configuration changed since the last run in {run_dir} "
                f"({manifest.config_hash} -> {config_hash}); recomputing every stage"
            )
        return cls(config_hash=config_hash)
