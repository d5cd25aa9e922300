from __future__ import annotations
from abc import ABC, abstractmethod
import logging

from entity.llr_vector import LlrVector
from entity.mlp_model import MlpModel
from entity.trial import TrialContext
import utils.cli_utils as cli_utils


logger = logging.getLogger(__name__)


class Detector(ABC):
    """
    Soft-output detector evaluated on a shared TrialContext.

    Attributes:
        name (str): Registry name used in detector specs.
        budgeted (bool): Takes a path budget, written "name(k)".
        detectors (dict[str, type[Detector]]): Registry of detector classes.

    Methods:
        get_instance(spec: str, model: MlpModel | None, k_budget: int) -> Detector:
            Builds a detector from a spec such as "mpps(24)" or "lmmse".

        detect(ctx: TrialContext) -> LlrVector:
            Per-bit LLRs for the trial.

        candidate_hash(ctx: TrialContext) -> str | None:
            Hash of the candidate list the detector consumed, if any.
    """

    name: str = None
    budgeted: bool = False
    requires_model: bool = False

    detectors: dict[str, type[Detector]] = {}

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if cls.name:
            Detector.detectors[cls.name] = cls

    def __init__(self, k: int = 0):
        self.k = k

    @property
    def label(self) -> str:
        return f"{self.name}({self.k})" if self.budgeted else self.name

    @staticmethod
    def get_instance(spec: str, model: MlpModel | None = None, k_budget: int = 24) -> Detector:
        name, k = cli_utils.split_detector_spec(spec)
        detector_cls = Detector.detectors.get(name)
        if detector_cls is None:
            raise DetectorError(f"Unknown detector '{name}', expected one of {sorted(Detector.detectors)}")
        if k is not None and not detector_cls.budgeted:
            raise DetectorError(f"Detector '{name}' takes no path budget")
        k = k if k is not None else k_budget
        if detector_cls.budgeted and k < 1:
            raise DetectorError(f"Path budget must be >= 1, got {k}")
        if detector_cls.requires_model:
            if model is None:
                raise DetectorError(f"Detector '{name}' requires a trained model (model_path)")
            return detector_cls(k if detector_cls.budgeted else 0, model)
        return detector_cls(k if detector_cls.budgeted else 0)

    @abstractmethod
    def detect(self, ctx: TrialContext) -> LlrVector:
        pass

    def path_budget(self, n_t: int) -> int:
        return self.k

    def candidate_hash(self, ctx: TrialContext) -> str | None:
        return ctx.candidate_hash(self.k) if self.budgeted else None

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.label})"


class DetectorError(ValueError):
    pass
