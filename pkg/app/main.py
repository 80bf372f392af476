import argparse
import logging
import sys
from contextlib import contextmanager
from typing import Optional, Sequence

from pydantic import ValidationError

from app.commands import ad_sim, check, recurrence, scan
from app.config import settings
from app.errors import ConsistencyError, InvalidInput, ResourceLimitExceeded

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RESOURCE = 3
EXIT_CONSISTENCY = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shieldlab",
        description="Key-distillability lab for shielded two-qubit states",
    )
    parser.add_argument("--out", help="output file (relative paths resolve against OUTPUT_DIR)")
    parser.add_argument("--format", choices=["json", "csv"], default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--max-dim", type=int, default=None, help="override MAX_DIM")
    parser.add_argument("--tolerance", type=float, default=None, help="override TOLERANCE")
    parser.add_argument("-v", "--verbose", action="store_true")

    subparsers = parser.add_subparsers(dest="command", required=True)
    check.register(subparsers)
    scan.register(subparsers)
    recurrence.register(subparsers)
    ad_sim.register(subparsers)
    return parser


@contextmanager
def _overrides(args):
    """Apply per-invocation flags to the shared settings, restoring them afterwards."""
    saved = (settings.MAX_DIM, settings.TOLERANCE)
    if args.max_dim is not None:
        settings.MAX_DIM = args.max_dim
    if args.tolerance is not None:
        settings.TOLERANCE = args.tolerance
    try:
        yield
    finally:
        settings.MAX_DIM, settings.TOLERANCE = saved


def _describe_validation(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(x) for x in err["loc"]) or "<document>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else settings.LOG_LEVEL,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        with _overrides(args):
            args.handler(args)
    except ValidationError as exc:
        print(f"invalid input: {_describe_validation(exc)}", file=sys.stderr)
        return EXIT_INVALID
    except InvalidInput as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"cannot read or write file: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ResourceLimitExceeded as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ConsistencyError as exc:
        log.error("Internal consistency check failed: %s", exc)
        print(f"internal consistency error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
