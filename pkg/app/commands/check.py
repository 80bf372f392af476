"""check: verdict and key spectrum for one state-spec file."""

from app.commands.common import load_spec, write_output
from app.schemas import CheckResponse
from app.services.criteria import full_verdict
from app.services.shielded import key_spectrum, state_from_spec


def register(subparsers) -> None:
    parser = subparsers.add_parser("check", help="distillability verdict for a state spec")
    parser.add_argument("spec", help="state-spec JSON file")
    parser.set_defaults(handler=run)


def run(args) -> None:
    spec = load_spec(args.spec)
    state = state_from_spec(spec)
    response = CheckResponse(
        family=spec.family,
        shield_dims=state.shield_dims,
        noise_eps=spec.noise_eps,
        key_spectrum=key_spectrum(state).to_response(),
        verdict=full_verdict(state),
    )
    write_output(args, response, default_format="json")
