"""Proposal distributions over CS(n, m)"""
import numpy as np

from proposals.base import Proposal, ProposalKind, UpdateSelection, draw_m1, draw_selection
from proposals.hypergeometric import MvhgProposal, mvhg_init, mvhg_log_density, mvhg_update
from proposals.multinomial import (
    MultinomialProposal,
    MultinomialState,
    multinomial_init,
    multinomial_log_density,
    multinomial_update,
)
from proposals.uniform import (
    UniformProposal,
    uniform_sequential_log_density,
    uniform_sequential_sample,
)

PROPOSALS = {
    ProposalKind.MULTINOMIAL: MultinomialProposal,
    ProposalKind.UNIFORM: UniformProposal,
    ProposalKind.MVHG: MvhgProposal,
}


def make_proposal(kind: ProposalKind, n: int, m: int, rng: np.random.Generator) -> Proposal:
    """Instantiate the proposal for one chain"""
    return PROPOSALS[ProposalKind(kind)](n, m, rng)


__all__ = [
    "Proposal",
    "ProposalKind",
    "UpdateSelection",
    "draw_m1",
    "draw_selection",
    "make_proposal",
    "MultinomialProposal",
    "MultinomialState",
    "multinomial_init",
    "multinomial_update",
    "multinomial_log_density",
    "UniformProposal",
    "uniform_sequential_sample",
    "uniform_sequential_log_density",
    "MvhgProposal",
    "mvhg_init",
    "mvhg_update",
    "mvhg_log_density",
]
