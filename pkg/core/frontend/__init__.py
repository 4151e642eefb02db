"""
Frontend package: parse, elaborate and rule-check ``.vpy`` designs.
"""

from core.frontend.elaborator import elaborate, evaluate_constant
from core.frontend.parser import parse_source
from core.frontend.rules import validate_rules

__all__ = ['parse_source', 'elaborate', 'evaluate_constant', 'validate_rules']
