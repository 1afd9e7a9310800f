"""
Classification Yard Location Modules
"""

from .flow_engine import InvestmentDecision, Scenario, TcsAssignment
from .instance_model import Instance, parse_instance, validate_instance
from .investment_solver import UpperSolveConfig, solve
from .reporting import RunReport
from .tcs_solver import TcsSolveConfig, solve_tcs

__all__ = ['Instance', 'parse_instance', 'validate_instance', 'InvestmentDecision', 'Scenario',
           'TcsAssignment', 'TcsSolveConfig', 'solve_tcs', 'UpperSolveConfig', 'solve', 'RunReport']
