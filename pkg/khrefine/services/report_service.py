import sys
from typing import Optional

import structlog

from khrefine.errors import KhRefineError
from khrefine.models.artifacts import Artifact, ErrorDetail, ErrorReport


class ReportService:
    """
    Service for publishing a command's JSON document.

    Call `publish` with the artifact a command produced, or `publish_error` with
    the error that stopped it. Subclasses decide where the text goes.
    """

    def __init__(self, indent: Optional[int] = 2):
        self.indent = indent
        self.log = structlog.get_logger(service="report")

    def render(self, artifact: Artifact) -> str:
        return artifact.to_json(indent=self.indent, ensure_ascii=False)

    def publish(self, artifact: Artifact) -> str:
        text = self.render(artifact)
        self._publish(text)
        return text

    def publish_error(self, error: KhRefineError) -> str:
        report = ErrorReport(error=ErrorDetail(**error.to_dict()))
        self.log.debug("Publishing error", type=report.error.type)
        return self.publish(report)

    def _publish(self, text: str):
        raise NotImplementedError


class StdoutReportService(ReportService):
    def _publish(self, text: str):
        sys.stdout.write(text + "\n")
        sys.stdout.flush()


class FileReportService(ReportService):
    def __init__(self, path: str, indent: Optional[int] = 2):
        super().__init__(indent=indent)
        self.path = path

    def _publish(self, text: str):
        with open(self.path, "w", encoding="utf-8") as f:
            f.write(text + "\n")
        self.log.info("Wrote report", path=self.path)


class DummyReportService(ReportService):
    """Keeps everything it publishes, for tests."""

    def __init__(self, indent: Optional[int] = 2):
        super().__init__(indent=indent)
        self.published: list[str] = []

    def _publish(self, text: str):
        self.published.append(text)
