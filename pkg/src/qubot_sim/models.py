from typing import Any, Dict, Optional


class ScenarioResponse:
    """Outcome of one scenario handler: a readable summary plus structured metadata."""

    def __init__(self, content: str, metadata: Optional[Dict[str, Any]] = None) -> None:
        self.content = content
        self.metadata = metadata or {}

    @property
    def success(self) -> bool:
        return bool(self.metadata.get("success", False))

    @property
    def exit_code(self) -> int:
        return int(self.metadata.get("exit_code", 0 if self.success else 1))
