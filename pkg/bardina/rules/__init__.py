from bardina.rules.theorem_rules import ConditionContext, ConditionRule, THEOREM_RULES, evaluate_rules

__all__ = ['ConditionContext', 'ConditionRule', 'THEOREM_RULES', 'evaluate_rules']
