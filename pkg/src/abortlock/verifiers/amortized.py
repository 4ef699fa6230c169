from __future__ import annotations

from ..costs import CC_LINE_BOUNDS, CC_PROOF_BOUNDS, DSM_LINE_BOUNDS, StepCost
from .invariant import Violation


def check_amortized_step(
    record, cost_cc: StepCost, cost_dsm: StepCost, cc_bounds: dict[int, int] = CC_LINE_BOUNDS
) -> list[Violation]:
    """rmr + delta(phi) against the per-line bound in both models.

    Environment actions (no line) must not move either potential.
    """
    out = []
    line = record.line
    if line is None:
        for name, c in (("lemma4", cost_cc), ("lemma3", cost_dsm)):
            if c.rmr or c.phi_after != c.phi_before:
                out.append(
                    Violation(name, record.seq, f"{record.kind} by {record.actor} cost {c.amortized}")
                )
        return out
    if cost_dsm.amortized > DSM_LINE_BOUNDS[line]:
        out.append(
            Violation(
                f"lemma3({line})",
                record.seq,
                f"{record.actor}: rmr {cost_dsm.rmr} + dphi {cost_dsm.phi_after - cost_dsm.phi_before}"
                f" > {DSM_LINE_BOUNDS[line]}",
            )
        )
    if cost_cc.amortized > cc_bounds[line]:
        out.append(
            Violation(
                f"lemma4({line})",
                record.seq,
                f"{record.actor}: rmr {cost_cc.rmr} + dphi {cost_cc.phi_after - cost_cc.phi_before}"
                f" > {cc_bounds[line]}",
            )
        )
    return out


def exceeds_proof_constant(record, cost_cc: StepCost) -> bool:
    """CC amortized cost above the constant printed in the line-by-line proof."""
    return record.line is not None and cost_cc.amortized > CC_PROOF_BOUNDS[record.line]
