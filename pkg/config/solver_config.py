"""
Solver Configuration
Default settings for the yardloc solvers, read from the environment.
"""

import logging
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Solver defaults
SOLVER_CONFIG = {
    'threads': int(os.getenv('YARDLOC_THREADS', 1)),
    'exact_pair_limit': int(os.getenv('YARDLOC_EXACT_PAIR_LIMIT', 12)),
    'enumerate_limit': int(os.getenv('YARDLOC_ENUMERATE_LIMIT', 1000000)),
    'restarts': int(os.getenv('YARDLOC_RESTARTS', 8)),
    'max_iterations': int(os.getenv('YARDLOC_MAX_ITERATIONS', 10000)),
    'seed': int(os.getenv('YARDLOC_SEED', 0)),
}

# Simulated annealing over investment decisions
ANNEAL_CONFIG = {
    'initial_temp': float(os.getenv('YARDLOC_ANNEAL_TEMP', 10000.0)),
    'cooling_rate': float(os.getenv('YARDLOC_ANNEAL_COOLING', 0.95)),
    'steps': int(os.getenv('YARDLOC_ANNEAL_STEPS', 200)),
}

# Logging settings
LOG_CONFIG = {
    'level': os.getenv('YARDLOC_LOG_LEVEL', 'WARNING'),
    'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
}


def get_thread_cap() -> int:
    """Worker cap from YARDLOC_THREADS, re-read on every call."""
    try:
        threads = int(os.getenv('YARDLOC_THREADS', SOLVER_CONFIG['threads']))
    except ValueError:
        threads = 1
    return max(1, threads)


def configure_logging(level: str = None):
    """Apply LOG_CONFIG to the root logger (stderr)."""
    logging.basicConfig(
        level=(level or LOG_CONFIG['level']).upper(),
        format=LOG_CONFIG['format'],
    )
