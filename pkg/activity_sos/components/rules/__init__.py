"""The reference rule catalog, one entry per inference rule."""
from typing import Tuple

from activity_sos.components.rules.action import ACTION_RULES
from activity_sos.components.rules.base import Rule, RuleContext
from activity_sos.components.rules.call import ACTIVITY_RULES, CALL_RULES
from activity_sos.components.rules.control import CONTROL_RULES
from activity_sos.components.rules.events import EVENT_RULES
from activity_sos.components.rules.exceptions import EXCEPTION_RULES
from activity_sos.components.rules.final import FINAL_RULES
from activity_sos.constant.semantics import REFERENCE_RULE_IDS


def reference_catalog() -> Tuple[Rule, ...]:
    by_id = {
        rule.id: rule
        for rule in ACTION_RULES + CONTROL_RULES + FINAL_RULES + EVENT_RULES + CALL_RULES + ACTIVITY_RULES + EXCEPTION_RULES
    }
    return tuple(by_id[rule_id] for rule_id in REFERENCE_RULE_IDS)


__all__ = ["Rule", "RuleContext", "reference_catalog"]
