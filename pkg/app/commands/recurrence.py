"""recurrence: explicit rounds next to the closed-form sequence."""

from app.commands.common import load_spec, write_output
from app.schemas import RecurrenceStep
from app.services.recurrence import iterate
from app.services.shielded import state_from_spec


def register(subparsers) -> None:
    parser = subparsers.add_parser("recurrence", help="run k explicit recurrence rounds")
    parser.add_argument("spec", help="state-spec JSON file")
    parser.add_argument("--k", type=int, default=2, help="number of rounds")
    parser.set_defaults(handler=run)


def run(args) -> None:
    trace = iterate(state_from_spec(load_spec(args.spec)), args.k)
    if (args.format or "csv") == "json":
        write_output(args, trace, default_format="json")
        return
    comments = [f"truncated at round {trace.truncated_at}: {trace.message}"] if trace.truncated else []
    write_output(args, trace.steps, default_format="csv", comments=comments, row_model=RecurrenceStep)
