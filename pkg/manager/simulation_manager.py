from __future__ import annotations
from dataclasses import dataclass
import csv
import json
import logging
import math
import time

import numpy as np

from algorithms.lattice_search import DegenerateChannelError, lattice_size
from detectors import Detector, EnumerationTooLargeError, exact_log_map
from entity.batch import TrialBatch
from entity.channel import draw_channel, noise_var_from_snr, transmit
from entity.config import Config
from entity.constellation import modulate
from entity.mlp_model import MlpModel, load_model
from entity.sim_config import RESULT_COLUMNS, ResultRow, SimConfig
from entity.trial import TrialContext, TrialOutcome
import utils.utils as utils
import utils.cli_utils as cli_utils


logger = logging.getLogger(__name__)

MAX_REDRAWS = 100


@dataclass(eq=False)
class ChannelUse():
    """
    One draw of the system model: channel, bits, received vector.
    """

    h: np.ndarray
    bits: np.ndarray
    y: np.ndarray
    noise_var: float


def draw_channel_use(cfg: SimConfig, snr_db: float, rng: np.random.Generator) -> ChannelUse:
    # draw order is part of the reproducibility contract: H, bits, noise
    c = cfg.constellation
    h = draw_channel(cfg.channel, cfg.n_r, cfg.n_t, rng)
    bits = rng.integers(0, 2, size=cfg.n_t * c.bits_per_symbol)
    noise_var = noise_var_from_snr(snr_db, cfg.n_t, c, cfg.channel)
    y = transmit(h, modulate(bits, c, cfg.n_t), noise_var, rng)
    return ChannelUse(h, bits, y, noise_var)


class SimulationManager:
    """
    Monte-Carlo SNR sweeps over the configured detectors.

    Attributes:
        sim_config (SimConfig): The experiment.
        threads (int): Trial-level parallelism.
        detectors (list[Detector]): Instantiated detectors, in config order.

    Methods:
        run_trial(snr_db: float, rng: np.random.Generator) -> TrialOutcome:
            One channel use through every detector.

        run_point(snr_idx: int) -> list[ResultRow]:
            All trials of one SNR point, aggregated per detector.

        run_sweep() -> list[ResultRow]:
            Every SNR point; on failure raises SweepError carrying the rows
            finished so far plus an error marker row.
    """

    def __init__(self, sim_config: SimConfig, threads: int | None = None, model: MlpModel | None = None):
        self.sim_config = sim_config
        self.config = Config.get_singleton()
        self.threads = threads or self.config.threads
        if model is None and sim_config.model_path and self._needs_model():
            model = load_model(sim_config.model_path)
            logger.info(f"Loaded model from {sim_config.model_path}")
        self.detectors = [Detector.get_instance(spec, model, sim_config.k_budget) for spec in sim_config.detectors]
        labels = [d.label for d in self.detectors]
        if len(set(labels)) != len(labels):
            raise SimulationManagerError(f"Duplicate detectors in {labels}")
        self.has_reference = lattice_size(sim_config.constellation, sim_config.n_t) <= self.config.enumeration_limit
        if not self.has_reference:
            logger.warning("Lattice exceeds the enumeration limit, fidelity metrics will be NaN")
            for detector in self.detectors:
                if detector.name in ("exact_log_map", "exact_max_log", "ml", "mpps_ideal"):
                    raise EnumerationTooLargeError(f"Detector '{detector.label}' needs full lattice enumeration")

    def _needs_model(self) -> bool:
        for spec in self.sim_config.detectors:
            detector_cls = Detector.detectors.get(cli_utils.split_detector_spec(spec)[0])
            if detector_cls is not None and detector_cls.requires_model:
                return True
        return False

    def _draw_trial(self, snr_db: float, rng: np.random.Generator) -> tuple[ChannelUse, TrialContext]:
        cfg = self.sim_config
        redraws = 0
        while True:
            use = draw_channel_use(cfg, snr_db, rng)
            ctx = TrialContext(use.y, use.h, use.noise_var, cfg.constellation, cfg.lambda_max, cfg.sigma2_floor,
                cfg.ot_sort, cfg.moment_method)
            try:
                ctx.decomposition
                return use, ctx
            except DegenerateChannelError as e:
                redraws += 1
                logger.warning(f"Redrawing degenerate channel at SNR {snr_db} dB: {e}")
                if redraws > MAX_REDRAWS:
                    raise

    def run_trial(self, snr_db: float, rng: np.random.Generator) -> TrialOutcome:
        cfg = self.sim_config
        use, ctx = self._draw_trial(snr_db, rng)
        outcome = TrialOutcome(bits=use.bits)
        reference_time = 0.0
        if self.has_reference:
            start = time.perf_counter()
            outcome.reference = exact_log_map(use.y, use.h, use.noise_var, cfg.constellation, cfg.n_t)
            reference_time = time.perf_counter() - start
        for detector in self.detectors:
            if detector.name == "exact_log_map" and outcome.reference is not None:
                llr, elapsed = outcome.reference, reference_time
            else:
                start = time.perf_counter()
                llr = detector.detect(ctx)
                elapsed = time.perf_counter() - start
            outcome.elapsed[detector.label] = elapsed
            outcome.llrs[detector.label] = llr
            candidate_hash = detector.candidate_hash(ctx)
            if candidate_hash is not None:
                outcome.candidate_hashes[detector.label] = candidate_hash
        return outcome

    def _run_indexed(self, snr_idx: int, trial_idx: int) -> TrialOutcome:
        rng = utils.trial_rng(self.sim_config.seed, snr_idx, trial_idx)
        return self.run_trial(self.sim_config.snr_db_list[snr_idx], rng)

    def run_point(self, snr_idx: int) -> list[ResultRow]:
        cfg = self.sim_config
        snr_db = cfg.snr_db_list[snr_idx]
        with TrialBatch(self.threads) as batch:
            for trial_idx in range(cfg.n_trials):
                batch.add(self._run_indexed, snr_idx, trial_idx)
            outcomes = batch.execute()
        rows = [self._aggregate(detector, snr_db, outcomes) for detector in self.detectors]
        logger.info(f"SNR {snr_db} dB: {cfg.n_trials} trials, "
            + ", ".join(f"{row.detector} ber={row.ber:.3e}" for row in rows))
        return rows

    def _aggregate(self, detector: Detector, snr_db: float, outcomes: list[TrialOutcome]) -> ResultRow:
        cfg = self.sim_config
        label = detector.label
        bits = np.concatenate([o.bits for o in outcomes])
        llrs = np.concatenate([o.llrs[label].llr for o in outcomes])
        ber = float(np.mean((llrs > 0) != (bits == 1)))
        if self.has_reference:
            lam = cfg.lambda_max
            reference = np.clip(np.concatenate([o.reference.llr for o in outcomes]), -lam, lam)
            error = np.clip(llrs, -lam, lam) - reference
            llr_mse = float(np.mean(error ** 2))
            sign_mismatch = float(np.mean((llrs > 0) != (reference > 0)))
            mean_abs = float(np.mean(np.abs(error)))
        else:
            llr_mse = sign_mismatch = mean_abs = math.nan
        n_symbols = len(outcomes) * cfg.n_t
        wall_time = sum(o.elapsed[label] for o in outcomes) / n_symbols if cfg.record_timing else 0.0
        return ResultRow(snr_db, label, detector.path_budget(cfg.n_t), n_symbols, ber, llr_mse, sign_mismatch,
            mean_abs, cfg.seed, wall_time)

    def run_sweep(self) -> list[ResultRow]:
        rows = []
        for snr_idx, snr_db in enumerate(self.sim_config.snr_db_list):
            try:
                rows.extend(self.run_point(snr_idx))
            except Exception as e:
                logger.exception(f"Sweep failed at SNR {snr_db} dB")
                rows.append(ResultRow.error_marker(snr_db, self.sim_config.seed))
                raise SweepError(f"Sweep failed at SNR {snr_db} dB: {e}", rows) from e
        return rows


def run_trial(cfg: SimConfig, snr_db: float, rng: np.random.Generator, model: MlpModel | None = None) -> TrialOutcome:
    return SimulationManager(cfg, threads=1, model=model).run_trial(snr_db, rng)


def run_sweep(cfg: SimConfig, threads: int | None = None, model: MlpModel | None = None) -> list[ResultRow]:
    return SimulationManager(cfg, threads=threads, model=model).run_sweep()


def emit_results(rows: list[ResultRow], format: str, path: str):
    """
    Writes result rows as CSV (fixed header, 17 significant digits, `nan`
    for missing metrics) or as a JSON list of records with the same field
    names and `null` for missing metrics.
    """
    if format == "csv":
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(RESULT_COLUMNS)
            for row in rows:
                record = row.to_record()
                writer.writerow([
                    utils.format_float(record[name]) if isinstance(record[name], float) else record[name]
                    for name in RESULT_COLUMNS
                ])
    elif format == "json":
        with open(path, "w") as f:
            json.dump([row.to_json_record() for row in rows], f, indent=2, allow_nan=False)
            f.write("\n")
    else:
        raise SimulationManagerError(f"Unknown result format '{format}', expected csv or json")
    logger.info(f"Wrote {len(rows)} rows to {path}")


def load_results(path: str) -> list[ResultRow]:
    if str(path).endswith(".json"):
        with open(path, "r") as f:
            return [ResultRow.from_record(record) for record in json.load(f)]
    with open(path, "r", newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
            raise SimulationManagerError(f"Unexpected CSV header in {path}: {reader.fieldnames}")
        return [ResultRow.from_record(record) for record in reader]


class SimulationManagerError(Exception):
    pass


class SweepError(Exception):

    def __init__(self, message: str, rows: list[ResultRow]):
        super().__init__(message)
        self.rows = rows
