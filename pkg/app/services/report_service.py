import csv
import io
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import BaseModel, ValidationError

from app.core.constants import VERSION
from app.core.exceptions import InvalidConfigurationError
from app.models.schemas import Configuration, HomotopyTrace, RunManifest

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class RunTimer:
    """Wall-clock timer feeding the run manifest"""

    def __init__(self):
        self.started = time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self.started


def build_manifest(
    subcommand: str,
    parameters: Dict[str, Any],
    seed: Optional[int],
    timer: RunTimer,
) -> RunManifest:
    return RunManifest(
        subcommand=subcommand,
        parameters=parameters,
        seed=seed,
        version=VERSION,
        wall_time_seconds=timer.elapsed(),
    )


def _field_path(error: dict) -> str:
    return ".".join(str(part) for part in error["loc"]) or "<root>"


def parse_configuration(text: str, source: str = "<input>") -> Configuration:
    """
    Parse a configuration from JSON text

    Accepts the full form {"dim": m, "points": [[...], ...]} or a bare list
    of points, whose dimension is taken from the first point.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidConfigurationError(
            f"{source}: not valid JSON (line {e.lineno}, column {e.colno})"
        )

    if isinstance(data, list):
        dim = len(data[0]) if data and isinstance(data[0], list) else 0
        data = {"dim": dim, "points": data}
    try:
        return Configuration.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise InvalidConfigurationError(
            f"{source}: field '{_field_path(first)}': {first['msg']}"
        )


def load_configuration(path: PathLike) -> Configuration:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InvalidConfigurationError(f"{path}: cannot read file ({e.strerror})")
    return parse_configuration(text, source=str(path))


def dump_configuration(c: Configuration) -> str:
    return c.model_dump_json()


def homotopy_csv(trace: HomotopyTrace) -> str:
    """
    Slot-0 track of a homotopy trace as CSV: frame, time, phase, coordinates
    """
    dim = trace.frames[0].dim if trace.frames else 0
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["frame", "time", "phase"] + [f"x{k}" for k in range(dim)])
    for k, (t, frame, phase) in enumerate(zip(trace.grid, trace.frames, trace.phase)):
        writer.writerow([k, repr(t), phase.value] + [repr(v) for v in frame.points[0]])
    return buffer.getvalue()


def render_report(report: BaseModel) -> str:
    return report.model_dump_json(indent=2)


def write_output(text: str, out: Optional[PathLike] = None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text, encoding="utf-8")
    logger.info(f"Report written to {out}")
