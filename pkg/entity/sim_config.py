from __future__ import annotations
from dataclasses import asdict, dataclass, field, fields
import hashlib
import json
import logging
import math
import os

from dotenv import load_dotenv

from entity.cachable import Cachable
from entity.channel import ChannelModelConfig, ChannelModelKind
from entity.config import Config
from entity.constellation import Constellation, build_constellation
from entity.mlp_model import TrainConfig


logger = logging.getLogger(__name__)

MOMENT_METHODS = ("fit", "statistical")


@dataclass(frozen=True)
class SimConfig(Cachable):
    """
    One experiment: system dimensions, channel model, SNR grid and the
    detectors to compare. Fields left out of a config file take the library
    defaults from Config.

    Attributes:
        n_t (int): Transmit streams.
        n_r (int): Receive antennas, >= n_t.
        m_c (int): Bits per symbol.
        channel (ChannelModelConfig): Channel model.
        snr_db_list (tuple[float, ...]): SNR points in dB.
        n_trials (int): Channel uses per SNR point.
        detectors (tuple[str, ...]): Detector specs, e.g. "mpps(24)".
        k_budget (int): Default path budget for specs without one.
        lambda_max (float): LLR clamp.
        seed (int): Root seed of every trial stream.
        model_path (str | None): Trained network for the mpps detectors.
        train_samples (int): Channel uses drawn by build_dataset.
        train_snr_db (tuple[float, float]): Training SNR range in dB.
        sigma2_floor (float): Fallback variance of the moment fit.
        moment_method (str): "fit" or "statistical".
        ot_sort (bool): Apply the sorting transform before fitting.
        record_timing (bool): Populate wall_time_s.
    """

    n_t: int
    n_r: int
    m_c: int
    channel: ChannelModelConfig = field(default_factory=ChannelModelConfig)
    snr_db_list: tuple = (10.0,)
    n_trials: int = 100
    detectors: tuple = ("exact_log_map",)
    k_budget: int = 24
    lambda_max: float = 60.0
    seed: int = 0
    model_path: str | None = None
    train_samples: int = 50000
    train_snr_db: tuple = (10.0, 25.0)
    sigma2_floor: float = 0.25
    moment_method: str = "fit"
    ot_sort: bool = True
    record_timing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "snr_db_list", tuple(float(v) for v in self.snr_db_list))
        object.__setattr__(self, "detectors", tuple(self.detectors))
        object.__setattr__(self, "train_snr_db", tuple(float(v) for v in self.train_snr_db))
        if self.n_t < 1 or self.n_r < self.n_t:
            raise SimConfigError(f"Need 1 <= n_t <= n_r, got n_t={self.n_t}, n_r={self.n_r}")
        build_constellation(self.m_c)
        if self.n_trials < 1:
            raise SimConfigError(f"n_trials must be >= 1, got {self.n_trials}")
        if not self.detectors:
            raise SimConfigError("Detector list is empty")
        if not self.snr_db_list:
            raise SimConfigError("SNR list is empty")
        if self.k_budget < 1:
            raise SimConfigError(f"k_budget must be >= 1, got {self.k_budget}")
        if not 0 <= self.seed < 2 ** 64:
            raise SimConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.moment_method not in MOMENT_METHODS:
            raise SimConfigError(f"moment_method must be one of {MOMENT_METHODS}")
        if len(self.train_snr_db) != 2 or self.train_snr_db[0] > self.train_snr_db[1]:
            raise SimConfigError(f"train_snr_db must be a [low, high] range, got {list(self.train_snr_db)}")

    @property
    def constellation(self) -> Constellation:
        return build_constellation(self.m_c)

    def train_config(self) -> TrainConfig:
        return TrainConfig.from_config(seed=self.seed)

    @staticmethod
    def from_dict(data: dict) -> SimConfig:
        config = Config.get_singleton()
        data = dict(data)
        channel = data.pop("channel", ChannelModelKind.IID_RAYLEIGH.value)
        rho_t, rho_r = data.pop("rho_t", 0.0), data.pop("rho_r", 0.0)
        if isinstance(channel, dict):
            channel = ChannelModelConfig(**channel)
        elif not isinstance(channel, ChannelModelConfig):
            channel = ChannelModelConfig(channel, rho_t, rho_r)
        known = {f.name for f in fields(SimConfig)}
        unknown = set(data) - known
        if unknown:
            raise SimConfigError(f"Unknown config fields: {sorted(unknown)}")
        defaults = {
            "k_budget": config.k_budget,
            "lambda_max": config.lambda_max,
            "sigma2_floor": config.sigma2_floor,
            "train_samples": config.train_samples,
            "train_snr_db": config.train_snr_db,
            "record_timing": config.record_timing,
        }
        return SimConfig(channel=channel, **{**defaults, **data})

    @staticmethod
    def from_file(path: str) -> SimConfig:
        load_dotenv()
        with open(path, "r") as f:
            data = json.load(f)
        seed = os.getenv("MPPS_SEED")
        if seed:
            logger.info(f"Seed overridden by MPPS_SEED={seed}")
            data["seed"] = int(seed)
        return SimConfig.from_dict(data)

    def replace(self, **changes) -> SimConfig:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.update(changes)
        return SimConfig(**data)

    def to_dict(self) -> dict:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["channel"] = self.channel.to_dict()
        data["snr_db_list"] = list(self.snr_db_list)
        data["detectors"] = list(self.detectors)
        data["train_snr_db"] = list(self.train_snr_db)
        return data

    def get_hash(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()


RESULT_COLUMNS = ("snr_db", "detector", "k", "n_symbols", "ber", "llr_mse", "sign_mismatch",
    "mean_abs_llr_err", "seed", "wall_time_s")


def _as_float(value) -> float:
    return math.nan if value is None else float(value)


@dataclass(frozen=True)
class ResultRow():
    """
    Aggregated metrics of one detector at one SNR point. Fidelity metrics
    compare clamped LLRs against the clamped exact log-MAP reference and
    are NaN when the reference is outside the enumeration guard.
    """

    ERROR_MARKER = "error"

    snr_db: float
    detector: str
    k: int
    n_symbols: int
    ber: float
    llr_mse: float
    sign_mismatch: float
    mean_abs_llr_err: float
    seed: int
    wall_time_s: float

    def __post_init__(self):
        for name in ("ber", "sign_mismatch"):
            rate = getattr(self, name)
            if not (math.isnan(rate) or 0.0 <= rate <= 1.0):
                raise SimConfigError(f"{name} must be a rate in [0, 1], got {rate}")
        if self.n_symbols < 0:
            raise SimConfigError(f"n_symbols must be nonnegative, got {self.n_symbols}")

    @staticmethod
    def error_marker(snr_db: float, seed: int) -> ResultRow:
        nan = float("nan")
        return ResultRow(snr_db, ResultRow.ERROR_MARKER, 0, 0, nan, nan, nan, nan, seed, 0.0)

    def to_record(self) -> dict:
        return asdict(self)

    def to_json_record(self) -> dict:
        # JSON has no NaN literal
        return {name: None if isinstance(value, float) and math.isnan(value) else value
            for name, value in self.to_record().items()}

    @staticmethod
    def from_record(record: dict) -> ResultRow:
        return ResultRow(
            snr_db=float(record["snr_db"]),
            detector=str(record["detector"]),
            k=int(record["k"]),
            n_symbols=int(record["n_symbols"]),
            ber=_as_float(record["ber"]),
            llr_mse=_as_float(record["llr_mse"]),
            sign_mismatch=_as_float(record["sign_mismatch"]),
            mean_abs_llr_err=_as_float(record["mean_abs_llr_err"]),
            seed=int(record["seed"]),
            wall_time_s=_as_float(record["wall_time_s"]),
        )


class SimConfigError(ValueError):
    pass
