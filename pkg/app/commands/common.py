"""Helpers shared by the subcommands: spec loading, grids and output writing."""

import json
import logging
import sys
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import pandas as pd
from pydantic import BaseModel

from app.config import settings
from app.schemas import StateSpec, StateSpecDocument
from app.services.scans import grid

log = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.12g"

Records = Union[BaseModel, Sequence[BaseModel]]


# ---------------------------------------------------------------------------
# Input
# ---------------------------------------------------------------------------

def load_spec(path: str) -> StateSpec:
    text = Path(path).read_text()
    return StateSpecDocument.model_validate_json(text).root


def add_grid_arguments(parser, name: str, start: float, stop: float, step: float) -> None:
    parser.add_argument(f"--{name}", type=float, nargs="+", dest=f"{name}_values",
                        help=f"explicit {name} values (overrides the range)")
    parser.add_argument(f"--{name}-min", type=float, default=start)
    parser.add_argument(f"--{name}-max", type=float, default=stop)
    parser.add_argument(f"--{name}-step", type=float, default=step)


def grid_from_args(args, name: str) -> list[float]:
    key = name.replace("-", "_")
    explicit = getattr(args, f"{key}_values")
    if explicit is not None:
        return list(explicit)
    return grid(getattr(args, f"{key}_min"), getattr(args, f"{key}_max"), getattr(args, f"{key}_step"))


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _as_list(records: Records) -> list[BaseModel]:
    return [records] if isinstance(records, BaseModel) else list(records)


def to_frame(records: Records, row_model: Optional[type[BaseModel]] = None) -> pd.DataFrame:
    rows = _as_list(records)
    if not rows and row_model is not None:
        return pd.DataFrame(columns=list(row_model.model_fields))
    return pd.json_normalize([r.model_dump(mode="json") for r in rows])


def render_json(records: Records) -> str:
    if isinstance(records, BaseModel):
        return records.model_dump_json(indent=2) + "\n"
    return json.dumps([r.model_dump(mode="json") for r in records], indent=2) + "\n"


def render_csv(
    records: Records, comments: Iterable[str] = (), row_model: Optional[type[BaseModel]] = None,
) -> str:
    text = to_frame(records, row_model).to_csv(index=False, float_format=CSV_FLOAT_FORMAT)
    return text + "".join(f"# {line}\n" for line in comments)


def render_gnuplot(records: Records) -> str:
    """Whitespace-separated columns, '#' header, booleans as 1/0, missing values as NaN."""
    frame = to_frame(records).drop(columns=["error"], errors="ignore")
    frame = frame.apply(lambda col: col.map(lambda v: float("nan") if v is None else float(v)))
    body = frame.to_csv(sep=" ", index=False, header=False, na_rep="NaN", float_format=CSV_FLOAT_FORMAT)
    return "# " + " ".join(frame.columns) + "\n" + body


def resolve_out(out: Optional[str]) -> Optional[Path]:
    if not out:
        return None
    path = Path(out)
    if not path.is_absolute() and settings.OUTPUT_DIR:
        path = Path(settings.OUTPUT_DIR) / path
    return path


def write_output(
    args, records: Records, default_format: str, comments: Sequence[str] = (),
    row_model: Optional[type[BaseModel]] = None,
) -> None:
    fmt = args.format or default_format
    if getattr(args, "gnuplot", False):
        text = render_gnuplot(records)
    elif fmt == "csv":
        text = render_csv(records, comments, row_model)
    else:
        text = render_json(records)
        for line in comments:
            log.warning("%s", line)

    path = resolve_out(args.out)
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    log.info("Wrote %s", path)
