from __future__ import annotations
import json
import os
from pathlib import Path

from dotenv import load_dotenv


ROOT_DIR = Path(__file__).resolve().parent.parent


class Config():

    instance = None

    def __init__(self, path: str | None = None):
        load_dotenv()
        self.path = Path(path or os.getenv("MPPS_CONFIG") or ROOT_DIR / "config" / "config.json")
        with open(self.path, "r") as f:
            self.config = json.load(f)

    @staticmethod
    def get_singleton() -> Config:
        if Config.instance is None:
            Config.instance = Config()
        return Config.instance

    @staticmethod
    def reset():
        Config.instance = None

    def to_dict(self) -> dict:
        return self.config

    # Logging

    @property
    def log_file(self) -> str:
        return self.config["logging"]["file"]

    @property
    def log_level(self) -> str:
        return self.config["logging"].get("level", "DEBUG")

    # Cache

    @property
    def is_cache_active(self) -> bool:
        return self.config["cache"]["active"]

    @property
    def cache_dir(self) -> Path:
        """
        Directory of the pickle caches (oracle-labelled datasets).
        Relative paths are resolved against the repository root.

        Returns:
            Path: The cache directory.
        """
        cache_dir = Path(self.config["cache"]["dir"])
        return cache_dir if cache_dir.is_absolute() else ROOT_DIR / cache_dir

    # Detection

    @property
    def lambda_max(self) -> float:
        """
        Clamp value for every LLR leaving a clamping stage (missing
        counter-hypotheses, network output, training labels).

        Returns:
            float: Absolute LLR bound.
        """
        return float(self.config["detection"]["lambda_max"])

    @property
    def sigma2_floor(self) -> float:
        """
        Variance used when a layer's moment fit is not convex or has too few
        samples. Lattice units squared.

        Returns:
            float: Variance floor.
        """
        return float(self.config["detection"]["sigma2_floor"])

    @property
    def enumeration_limit(self) -> int:
        """
        Largest lattice size (2M)^(2N_t) the exhaustive log-MAP / max-log
        detectors agree to enumerate.

        Returns:
            int: Number of lattice points.
        """
        return int(self.config["detection"]["enumeration_limit"])

    @property
    def exhaustive_limit(self) -> int:
        """
        Largest lattice size for which constrained minima are computed by full
        enumeration. Beyond it a constrained K-best re-search is used.

        Returns:
            int: Number of lattice points.
        """
        return int(self.config["detection"]["exhaustive_limit"])

    @property
    def k_budget(self) -> int:
        return int(self.config["detection"]["k_budget"])

    # Network

    @property
    def network(self) -> dict:
        return self.config["network"]

    @property
    def hidden_dim(self) -> int:
        return int(self.config["network"]["hidden_dim"])

    @property
    def divergence_limit(self) -> float:
        return float(self.config["network"]["divergence_limit"])

    # Simulation

    @property
    def threads(self) -> int:
        return int(self.config["simulation"]["threads"])

    @property
    def record_timing(self) -> bool:
        """
        Populate wall_time_s in result rows. Off by default so that identical
        configurations produce byte-identical result files.

        Returns:
            bool: Whether detector wall time is recorded.
        """
        return bool(self.config["simulation"]["record_timing"])

    @property
    def train_snr_db(self) -> list[float]:
        return [float(v) for v in self.config["simulation"]["train_snr_db"]]

    @property
    def train_samples(self) -> int:
        return int(self.config["simulation"]["train_samples"])

    # Styles

    @property
    def is_styles_active(self) -> bool:
        return self.config["styles"]["active"]

    @property
    def is_styles_bright(self) -> bool:
        return self.config["styles"]["bright"]
