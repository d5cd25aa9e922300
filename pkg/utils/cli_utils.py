import re

from entity.sim_config import ResultRow
import utils.utils as utils


DETECTOR_SPEC = re.compile(r"^\s*([a-z_]+)\s*(?:\(\s*(\d+)\s*\))?\s*$")


def split_detector_spec(spec: str) -> tuple[str, int | None]:
    """
    Splits a detector spec into its name and optional path budget.

    Args:
        spec (str): 'name' or 'name(k)', e.g. 'mpps(24)'.

    Returns:
        tuple[str, int | None]: The lower-case name and the budget, None when
            the detector spec has no parenthesised part.
    """
    match = DETECTOR_SPEC.match(spec.lower())
    if not match:
        raise ValueError(f"Malformed detector spec: '{spec}'")
    name, k = match.groups()
    return name, int(k) if k is not None else None

def parse_float_list(values: str) -> list[float]:
    return [float(v) for v in values.split(",") if v.strip()]

def print_rows(rows: list[ResultRow], bits_per_symbol: int):
    utils.print(f"{'snr_db':>7} {'detector':<22} {'k':>4} {'ber':>10} {'ber_se':>10} {'llr_mse':>11} {'sign_mism':>10}")
    for row in rows:
        type = "error" if row.detector == ResultRow.ERROR_MARKER else None
        stderr = utils.binomial_stderr(row.ber, row.n_symbols * bits_per_symbol)
        utils.print(f"{row.snr_db:>7.2f} {row.detector:<22} {row.k:>4d} {row.ber:>10.3e} {stderr:>10.2e} "
            f"{row.llr_mse:>11.4e} {row.sign_mismatch:>10.3e}", type)
