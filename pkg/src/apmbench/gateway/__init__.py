from .cache import DiskCache
from .calls import ROLES, ChatCall
from .core import Gateway, JudgeVerdict, build_gateway, parse_score
from .diagnostics import judge_anticorrelation, judge_balance
from .http import EndpointConfig, OpenAIBackend
from .synthetic import SyntheticBackend

__all__ = [
    "ROLES", "ChatCall", "DiskCache", "EndpointConfig", "Gateway", "JudgeVerdict", "OpenAIBackend",
    "SyntheticBackend", "build_gateway", "judge_anticorrelation", "judge_balance", "parse_score",
]
