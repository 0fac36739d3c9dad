# ============================ #
#   Semantics Engine
# ============================ #

"""
Applicable rule instances, firing, and the transition closure.

A transition is any sequence of micro-steps followed by one macro-step
whose post-state is visible (no switch node holds or processes tokens).
Under the eager-transfer closure the micro sequence must be maximal.
"""
from typing import Dict, List, Optional, Tuple

from activity_sos.components.instances import InstanceIndex
from activity_sos.components.profiles import SemanticsProfile
from activity_sos.components.state import fingerprint, initial_state, is_visible
from activity_sos.constant.semantics import CLOSURE_EAGER_TRANSFER, MAX_MICRO_DEPTH
from activity_sos.entity.model_entity import Model
from activity_sos.entity.state_entity import ExecState, RuleInstance, Step, StepKind, StepLabel
from activity_sos.exception.exception import ExplorationLimitError, StaleInstanceError, reraise
from activity_sos.logging.logger import logging


Transition = Tuple[StepLabel, ExecState]


class Semantics:
    """
    Binds a model to a profile. Every method is pure: states are immutable
    values and nothing is cached between calls except the instance index.
    """

    def __init__(
        self,
        model: Model,
        profile: SemanticsProfile,
        index: Optional[InstanceIndex] = None,
        max_micro_depth: int = MAX_MICRO_DEPTH,
    ):
        try:
            self.model = model
            self.profile = profile
            self.ctx = profile.context(model, index)
            self.index = self.ctx.index
            self.max_micro_depth = max_micro_depth
            self._rules = {rule.id: rule for rule in profile.rules}
        except Exception as e:
            raise reraise(e)

    def initial_state(self) -> ExecState:
        return initial_state(self.model, self.index, timed=self.profile.timed)

    # ================================
    # 🔎 Rule instances
    # ================================
    def applicable(self, state: ExecState) -> List[RuleInstance]:
        """Catalog order, then the order each finder yields its bindings in."""
        found: List[RuleInstance] = []
        for rule in self.profile.rules:
            found.extend(rule.instances(self.ctx, state))
        return found

    def fire(self, state: ExecState, instance: RuleInstance) -> Step:
        rule = self._rules.get(instance.rule_id)
        if rule is None or instance not in rule.instances(self.ctx, state):
            raise StaleInstanceError(f"{instance.rule_id} on '{instance.subject}' is not applicable in this state")
        return self._conclude(state, instance)

    def _conclude(self, state: ExecState, instance: RuleInstance) -> Step:
        rule = self._rules[instance.rule_id]
        return Step(instance.label, instance.kind, rule.conclude(self.ctx, state, instance), rule.id)

    def steps(self, state: ExecState) -> List[Step]:
        """Every individual micro- and macro-step leaving `state`."""
        return [self._conclude(state, instance) for instance in self.applicable(state)]

    # ================================
    # 🔁 Transition closure
    # ================================
    def transitions(self, state: ExecState) -> List[Transition]:
        """
        Reduced successors of `state`, deduplicated and sorted by label text
        then successor fingerprint. Revisited intermediate states are
        pruned, so cycles among switch nodes terminate.
        """
        eager = self.profile.closure == CLOSURE_EAGER_TRANSFER
        seen = {fingerprint(state)}
        stack = [state]
        found: Dict[Tuple[str, str], Transition] = {}
        examined = 0
        while stack:
            current = stack.pop()
            examined += 1
            if examined > self.max_micro_depth:
                raise ExplorationLimitError(
                    f"transition closure examined more than {self.max_micro_depth} intermediate states"
                )
            steps = self.steps(current)
            micro = [s for s in steps if s.kind is StepKind.MICRO]
            for step in micro:
                key = fingerprint(step.next)
                if key not in seen:
                    seen.add(key)
                    stack.append(step.next)
            if eager and micro:
                continue
            for step in steps:
                if step.kind is StepKind.MACRO and is_visible(step.next, self.index):
                    found.setdefault((str(step.label), fingerprint(step.next)), (step.label, step.next))
        return [found[key] for key in sorted(found)]

    def successors(self, state: ExecState, complete: bool = False) -> List[Transition]:
        """Reduced transitions, or with `complete` every single step."""
        if not complete:
            return self.transitions(state)
        unique: Dict[Tuple[str, str], Transition] = {}
        for step in self.steps(state):
            unique.setdefault((str(step.label), fingerprint(step.next)), (step.label, step.next))
        return [unique[key] for key in sorted(unique)]


def build_semantics(model: Model, profile: SemanticsProfile, max_micro_depth: int = MAX_MICRO_DEPTH) -> Semantics:
    logging.info(f"Building semantics for root '{model.root_activity.name}' under profile '{profile.name}'")
    try:
        return Semantics(model, profile, max_micro_depth=max_micro_depth)
    except Exception as e:
        logging.error(f"Semantics construction failed: {e}")
        raise reraise(e)
