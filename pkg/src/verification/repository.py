import json
import logging
import os
from typing import Any, Dict, List

from src.geometry.errors import ConfigError
from src.utils.fixture_parser import KIND_UNKNOWN, detect_fixture_kind

logger = logging.getLogger(__name__)


class FixtureRepository:
    def __init__(self, base_dir: str):
        self.base_dir = base_dir

    def get_available_fixtures(self) -> Dict[str, str]:
        """
        Returns a dictionary of {fixture_name: path} for every JSON file in the directory.
        """
        fixtures = {}
        if not os.path.isdir(self.base_dir):
            return fixtures
        for item in sorted(os.listdir(self.base_dir)):
            full_path = os.path.join(self.base_dir, item)
            if os.path.isfile(full_path) and item.endswith(".json"):
                fixtures[item[: -len(".json")]] = full_path
        return fixtures

    def load(self, name: str) -> Dict[str, Any]:
        """Parsed fixture with its `name` and detected `kind` filled in."""
        path = self.get_available_fixtures().get(name)
        if path is None:
            raise ConfigError(f"Unknown fixture: {name} (looked in {self.base_dir})")
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Failed to load fixture '{name}': {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"Failed to load fixture '{name}': top level must be an object")
        kind = detect_fixture_kind(data)
        if kind == KIND_UNKNOWN:
            raise ConfigError(f"Failed to load fixture '{name}': cannot tell what it describes")
        data.setdefault("name", name)
        data["kind"] = kind
        return data

    def load_kind(self, kind: str) -> List[Dict[str, Any]]:
        """Every fixture of one kind, in name order."""
        fixtures = [self.load(name) for name in self.get_available_fixtures()]
        selected = [data for data in fixtures if data["kind"] == kind]
        logger.debug("%d %s fixtures in %s", len(selected), kind, self.base_dir)
        return selected
