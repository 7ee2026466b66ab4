"""Combine rule contributions with normalized model attributions.

The overall contribution of input feature j is::

    e_j = r_j + sum over models m of r_m * phi_hat_j(m)

where r_j is the feature's own rule contribution and r_m is the rule
contribution of model m's output. e is reported unnormalized (it sums up
to N+1 bounded terms); rankings use |e_j|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DecisionSystem,
    Instance,
    Outcome,
    Rule,
    as_instance,
    complete,
    evaluate_policy,
)
from .errors import RuleNotInPolicy
from .models_explain import normalize_attribution
from .rules_explain import rule_contributions
from .scaling import Scaler


@dataclass(frozen=True)
class ExplanationMetadata:
    scaler_bounds: dict[str, tuple[float, float]]
    backend: str
    background_seed: int | None
    background_size: int


@dataclass(frozen=True)
class Explanation:
    """The final report plus every intermediate needed to audit it."""

    instance: Instance
    rule: str
    outcome: Outcome
    e: np.ndarray                      # length D, input features only
    r: np.ndarray                      # length D+N, inputs then internals
    phi_hat: dict[str, np.ndarray]     # model name -> length-D vector
    feature_names: tuple[str, ...]     # all D+N names, inputs first
    metadata: ExplanationMetadata

    @property
    def input_names(self) -> tuple[str, ...]:
        return self.feature_names[: len(self.e)]

    def recompute_e(self) -> np.ndarray:
        """Re-derive e from the stored r and phi_hat; must match bit-for-bit."""
        return combine_contributions(self.r, self.phi_hat, len(self.e))


def combine_contributions(
    r: np.ndarray, phi_hat: dict[str, np.ndarray], n_inputs: int
) -> np.ndarray:
    """Apply the aggregation formula with a fixed left-to-right model order
    so the result is reproducible bit-for-bit from stored components."""
    e = np.empty(n_inputs)
    for j in range(n_inputs):
        total = float(r[j])
        for k, hat in enumerate(phi_hat.values()):
            total += float(r[n_inputs + k]) * float(hat[j])
        e[j] = total
    return e


def resolve_rule(system: DecisionSystem, rule: Rule | str | None, triggered: Rule | None) -> Rule:
    """Default to the triggered rule, else the policy's first rule;
    a name or Rule object overrides, but must belong to the policy."""
    policy = system.policy
    if rule is None:
        if triggered is not None:
            return triggered
        if not policy.rules:
            raise RuleNotInPolicy("the policy has no rules to explain")
        return policy.rules[0]
    if isinstance(rule, str):
        found = policy.rule_named(rule)
        if found is None:
            raise RuleNotInPolicy(f"no rule named {rule!r} in the policy")
        return found
    if rule not in policy.rules:
        raise RuleNotInPolicy(f"rule {rule.name!r} is not part of the policy")
    return rule


def explain(
    system: DecisionSystem,
    scaler: Scaler,
    instance,
    rule: Rule | str | None = None,
    engine=None,
) -> Explanation:
    """Full pipeline for one decision: normalized attributions per model,
    instance completion, rule contributions, then the aggregation."""
    if engine is None:
        raise ValueError("an attribution engine is required (see make_engine)")
    inst = as_instance(instance)
    completed = complete(system, inst)
    outcome, triggered = evaluate_policy(system.policy, completed)
    explained = resolve_rule(system, rule, triggered)

    phi_hat: dict[str, np.ndarray] = {}
    for model in system.models:
        attribution = engine.attribute(model, inst)
        phi_hat[model.name] = normalize_attribution(attribution).phi_hat

    r = rule_contributions(system, explained, completed, scaler)
    e = combine_contributions(r, phi_hat, system.n_inputs)

    background = getattr(engine, "background", None)
    metadata = ExplanationMetadata(
        scaler_bounds=dict(scaler.bounds),
        backend=engine.name,
        background_seed=getattr(engine, "seed", None),
        background_size=background.n_rows if background is not None else 0,
    )
    return Explanation(
        instance=inst,
        rule=explained.name,
        outcome=outcome,
        e=e,
        r=r,
        phi_hat=phi_hat,
        feature_names=system.feature_names,
        metadata=metadata,
    )


def rank(explanation: Explanation) -> list[tuple[str, float]]:
    """Input features by |e_j| descending; ties break by feature index."""
    order = sorted(
        range(len(explanation.e)), key=lambda j: (-abs(explanation.e[j]), j)
    )
    return [(explanation.input_names[j], float(explanation.e[j])) for j in order]
