"""
Configuration for experiment runs
"""

import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict

from dotenv import load_dotenv

from app.core.errors import UsageError
from app.core.textdata import DEFAULT_ALPHABET_PATH

# Load environment variables from .env.local
env_path = Path(__file__).parent.parent / 'env' / '.env.local'
load_dotenv(env_path)


class SplitView(Enum):
    POOLED = "pooled"
    CV = "cv"
    TEST_IN_DOMAIN = "test_in_domain"
    TEST_OUT_OF_DOMAIN = "test_out_of_domain"


class BenchConfig:
    # Default configurations
    DEFAULT_SEED = 0
    DEFAULT_PROB = 0.5
    DEFAULT_ALPHA = 0.01
    DEFAULT_N_COMPARISONS = 22
    DEFAULT_OUT_DIR = "data/processed"
    DEFAULT_WORKERS = 1
    DEFAULT_LOG_LEVEL = "INFO"

    @staticmethod
    def load_config() -> Dict[str, Any]:
        """Load configuration from the environment (and .env.local)"""
        try:
            config = {
                "seed": int(os.getenv("BENCH_SEED", BenchConfig.DEFAULT_SEED)),
                "prob": float(os.getenv("BENCH_PROB", BenchConfig.DEFAULT_PROB)),
                "alpha": float(os.getenv("BENCH_ALPHA", BenchConfig.DEFAULT_ALPHA)),
                "n_comparisons": int(os.getenv("BENCH_N_COMPARISONS", BenchConfig.DEFAULT_N_COMPARISONS)),
                "out_dir": os.getenv("BENCH_OUT_DIR", BenchConfig.DEFAULT_OUT_DIR),
                "workers": int(os.getenv("BENCH_WORKERS", BenchConfig.DEFAULT_WORKERS)),
                "log_level": os.getenv("BENCH_LOG_LEVEL", BenchConfig.DEFAULT_LOG_LEVEL).upper(),
                "alphabet": os.getenv("BENCH_ALPHABET", str(DEFAULT_ALPHABET_PATH)),
            }
        except ValueError as e:
            raise UsageError(f"Invalid BENCH_* environment value: {e}") from e

        # Validate ranges
        if not 0 <= config["prob"] <= 1:
            raise UsageError(f"BENCH_PROB must lie in [0, 1], got {config['prob']}")
        if config["seed"] < 0:
            raise UsageError(f"BENCH_SEED must be non-negative, got {config['seed']}")
        if config["workers"] < 1:
            raise UsageError(f"BENCH_WORKERS must be >= 1, got {config['workers']}")

        return config
