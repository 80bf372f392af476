"""ad-sim: advantage distillation, analytic and Monte Carlo."""

from app.commands.common import load_spec, write_output
from app.config import settings
from app.schemas import AdSimulationReport
from app.services.ccq import (
    ad_block_stats, ad_monte_carlo, ad_security_check, ccq_from_full_state, ccq_from_spectrum,
)
from app.services.shielded import assemble_density, key_spectrum, state_from_spec


def register(subparsers) -> None:
    parser = subparsers.add_parser("ad-sim", help="simulate advantage distillation on a state spec")
    parser.add_argument("spec", help="state-spec JSON file")
    parser.add_argument("--n", type=int, default=4, help="block size N")
    parser.add_argument("--trials", type=int, default=100_000)
    parser.add_argument("--chunk-size", type=int, default=None)
    parser.add_argument("--ccq", choices=["spectrum", "full"], default="spectrum",
                        help="derive the ccq state from the key spectrum or from a purification of the full state")
    parser.set_defaults(handler=run)


def run(args) -> None:
    state = state_from_spec(load_spec(args.spec))
    if args.ccq == "full":
        ccq = ccq_from_full_state(assemble_density(state), state.shield_dims)
    else:
        ccq = ccq_from_spectrum(key_spectrum(state))

    seed = settings.DEFAULT_SEED if args.seed is None else args.seed
    chunk_size = args.chunk_size or settings.MC_CHUNK_SIZE
    secure, margin = ad_security_check(ccq)
    report = AdSimulationReport(
        p_ab=ccq.p.tolist(),
        eve_overlap=ccq.eve_overlap,
        security_ok=secure,
        security_margin=margin,
        seed=seed,
        chunk_size=chunk_size,
        analytic=ad_block_stats(ccq, args.n),
        empirical=ad_monte_carlo(ccq, args.n, args.trials, seed, chunk_size=chunk_size),
    )
    write_output(args, report, default_format="json")
