# ============================ #
#   Semantics Profiles
# ============================ #

"""
A profile is a rule catalog plus a closure policy. Extensions are catalog
transformations: add a rule, replace a rule, conjoin a premise, attach an
effect or swap the closure policy. Profiles are immutable values.
"""
from dataclasses import dataclass, replace
from typing import Dict, Mapping, Optional, Tuple

from activity_sos.components.instances import InstanceIndex
from activity_sos.components.rules import Rule, RuleContext, reference_catalog
from activity_sos.components.rules.action import apply_action_terminate, find_ready_action_terminate
from activity_sos.components.rules.extension import (
    CLOCK_TICK_RULE,
    EDGE_TRANSFER_RULE,
    EXECUTION_TIME_RULE,
    SEQUENTIAL_EDGE_TRANSFER_RULE,
    single_core,
    start_clock,
)
from activity_sos.constant.semantics import (
    ACTION_INVOKE,
    ACTION_TERMINATE,
    CLOSURE_EAGER_TRANSFER,
    CLOSURE_STANDARD,
    PROFILE_EXEC_TIME,
    PROFILE_NAMES,
    PROFILE_REFERENCE,
    PROFILE_SINGLE_CORE,
    PROFILE_VAR1,
    PROFILE_VAR2,
    SINGLE_CORE_PREMISE,
)
from activity_sos.entity.model_entity import Model, NodeKind
from activity_sos.entity.state_entity import LabelKind
from activity_sos.exception.exception import ProfileError
from activity_sos.logging.logger import logging

CLOCK_START_EFFECT = "clock-start"


@dataclass(frozen=True)
class SemanticsProfile:
    """
    Attributes:
        name (str): profile spec it was built from, e.g. "reference,single-core".
        rules (tuple): catalog in application order.
        closure (str): "standard" or "eager-transfer".
        pins_only (bool): invocations consume only tokens waiting on their pins.
        timing (tuple): (node id, execution time) pairs; None unless execution time is modelled.
        variation (str): active consumption variation, None for the reference consumption.
    """
    name: str
    rules: Tuple[Rule, ...]
    closure: str = CLOSURE_STANDARD
    pins_only: bool = False
    timing: Optional[Tuple[Tuple[str, int], ...]] = None
    variation: Optional[str] = None

    @property
    def timed(self) -> bool:
        return self.timing is not None

    @property
    def rule_ids(self) -> Tuple[str, ...]:
        return tuple(rule.id for rule in self.rules)

    def rule(self, rule_id: str) -> Optional[Rule]:
        return next((r for r in self.rules if r.id == rule_id), None)

    def context(self, model: Model, index: Optional[InstanceIndex] = None) -> RuleContext:
        return RuleContext(
            model=model,
            index=index or InstanceIndex.build(model),
            pins_only=self.pins_only,
            timing=dict(self.timing) if self.timing is not None else None,
        )


def _replace_rule(rules: Tuple[Rule, ...], rule_id: str, update) -> Tuple[Rule, ...]:
    return tuple(update(rule) if rule.id == rule_id else rule for rule in rules)


def _add_rule(rules: Tuple[Rule, ...], rule: Rule) -> Tuple[Rule, ...]:
    if any(r.id == rule.id for r in rules):
        return rules
    return rules + (rule,)


def _suffix(name: str, extension: str) -> str:
    parts = name.split(",")
    return name if extension in parts else f"{name},{extension}"


# ================================
# 🧪 Profile constructors
# ================================
def profile_reference() -> SemanticsProfile:
    return SemanticsProfile(name=PROFILE_REFERENCE, rules=reference_catalog())


def _action_ids(model: Model) -> Tuple[str, ...]:
    return tuple(sorted({n.id for a in model.activities for n in a.nodes if n.kind is NodeKind.ACTION}))


def extend_execution_time(
    profile: SemanticsProfile, timing: Optional[Mapping[str, int]] = None, model: Optional[Model] = None
) -> SemanticsProfile:
    """
    Invocation starts the node's clock, exeTime(n) marks it Ready once the
    clock reaches its execution time, and termination requires Ready.

    A timing table, when given, must cover every Action of `model`;
    without one each Action's own `execution_time` is used.
    """
    if profile.timed:
        return profile
    table: Dict[str, int] = {}
    if timing is not None:
        table = {str(k): int(v) for k, v in timing.items()}
        negative = sorted(k for k, v in table.items() if v < 0)
        if negative:
            raise ProfileError(f"negative execution times for {negative}")
        if model is not None:
            missing = [n for n in _action_ids(model) if n not in table]
            if missing:
                raise ProfileError(f"timing table misses actions {missing}")
    elif model is not None:
        table = {
            n.id: n.execution_time
            for a in model.activities
            for n in a.nodes
            if n.kind is NodeKind.ACTION and n.execution_time is not None
        }

    rules = _replace_rule(profile.rules, ACTION_INVOKE, lambda r: r.with_effect(CLOCK_START_EFFECT, start_clock))
    rules = _replace_rule(
        rules,
        ACTION_TERMINATE,
        lambda r: replace(r, find=find_ready_action_terminate, apply=apply_action_terminate),
    )
    rules = _add_rule(_add_rule(rules, EXECUTION_TIME_RULE), CLOCK_TICK_RULE)
    return replace(
        profile,
        name=_suffix(profile.name, PROFILE_EXEC_TIME),
        rules=rules,
        timing=tuple(sorted(table.items())),
    )


def extend_single_core(profile: SemanticsProfile) -> SemanticsProfile:
    """Every invocation rule additionally requires that no other node is executing."""
    rules = tuple(
        rule.with_premise(SINGLE_CORE_PREMISE, single_core) if rule.label is LabelKind.INVOKE else rule
        for rule in profile.rules
    )
    return replace(profile, name=_suffix(profile.name, PROFILE_SINGLE_CORE), rules=rules)


def extend_consumption(profile: SemanticsProfile, variation: str) -> SemanticsProfile:
    """
    Tokens reach input pins through a standalone transfer step and
    invocations consume only what already waits on the pins. var1 moves
    tokens one flow at a time and transfers everything it can before any
    node runs; var2 interleaves transfers and executions freely.
    """
    if variation not in (PROFILE_VAR1, PROFILE_VAR2):
        raise ProfileError(f"unknown consumption variation '{variation}'")
    if profile.variation is not None and profile.variation != variation:
        raise ProfileError(f"variations '{profile.variation}' and '{variation}' cannot be combined")
    if profile.variation == variation:
        return profile
    transfer_rule = SEQUENTIAL_EDGE_TRANSFER_RULE if variation == PROFILE_VAR1 else EDGE_TRANSFER_RULE
    return replace(
        profile,
        name=_suffix(profile.name, variation),
        rules=_add_rule(profile.rules, transfer_rule),
        closure=CLOSURE_EAGER_TRANSFER if variation == PROFILE_VAR1 else CLOSURE_STANDARD,
        pins_only=True,
        variation=variation,
    )


def parse_profile_spec(
    spec: str, timing: Optional[Mapping[str, int]] = None, model: Optional[Model] = None
) -> SemanticsProfile:
    """
    "reference", "exec-time", "single-core", "var1", "var2" or a comma list
    of them, applied left to right on top of the reference profile.
    """
    names = [part.strip() for part in (spec or PROFILE_REFERENCE).split(",") if part.strip()]
    unknown = [n for n in names if n not in PROFILE_NAMES]
    if unknown:
        raise ProfileError(f"unknown profile(s) {unknown}; expected a comma list of {list(PROFILE_NAMES)}")
    if PROFILE_VAR1 in names and PROFILE_VAR2 in names:
        raise ProfileError("var1 and var2 cannot be combined")
    if timing is not None and PROFILE_EXEC_TIME not in names:
        names.append(PROFILE_EXEC_TIME)

    profile = profile_reference()
    for name in names:
        if name == PROFILE_EXEC_TIME:
            profile = extend_execution_time(profile, timing, model)
        elif name == PROFILE_SINGLE_CORE:
            profile = extend_single_core(profile)
        elif name in (PROFILE_VAR1, PROFILE_VAR2):
            profile = extend_consumption(profile, name)
    logging.info(f"Profile '{profile.name}': {len(profile.rules)} rules, closure {profile.closure}")
    return profile
