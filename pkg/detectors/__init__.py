from detectors.detector import Detector, DetectorError
from detectors.log_map_detector import EnumerationTooLargeError, exact_log_map, exact_max_log, ml_hard
from detectors.candidate_detector import candidate_log_map, candidate_max_log
from detectors.lmmse_detector import lmmse_filter, lmmse_soft
from detectors.mpps_detector import MppsDetector, MppsIdealDetector, mpps_llrs
