import logging
import math

import click
import numpy as np

from entity.config import Config


logger = logging.getLogger(__name__)

PRINT_STYLES = {
    "info": ("blue", logging.INFO),
    "warning": ("yellow", logging.WARNING),
    "error": ("red", logging.ERROR),
    "success": ("green", logging.INFO),
}


def get_config() -> Config:
    return Config.get_singleton()

def trial_rng(seed: int, snr_idx: int, trial_idx: int) -> np.random.Generator:
    """
    Independent stream for one trial, addressed by (seed, snr index, trial
    index) so that results do not depend on execution order.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(snr_idx, trial_idx)))

def format_float(value: float) -> str:
    if math.isnan(value):
        return "nan"
    return f"{value:.17g}"

def binomial_stderr(rate: float, n: int) -> float:
    return math.sqrt(max(rate * (1 - rate), 0.0) / n) if n > 0 else math.nan

def print(message: str, type: str = None):
    """
    Echoes a user-facing message, coloured by type when styles are active,
    and mirrors it to the log at the matching level.
    """
    config = Config.get_singleton()
    color, level = PRINT_STYLES.get(type, (None, logging.INFO))
    if color and config.is_styles_active:
        click.secho(message, fg=f"bright_{color}" if config.is_styles_bright else color)
    else:
        click.secho(message)
    logger.log(level, message)
