"""
Pandas utilities for tabular reports.
"""
import pandas as pd
from typing import Sequence
from ...protocols import ProtocolResult
from ...serialize import FLOAT_DIGITS


#: Report columns shared by every protocol; cells that do not apply are blank.
CSV_COLUMNS = [
    "protocol",
    "n",
    "sigma",
    "delta",
    "entropy_ebits",
    "coincidence_weight",
    "oracle_entropy_ebits",
    "rel_err",
]


def results_frame(results: Sequence[ProtocolResult]) -> pd.DataFrame:
    """
    Tabulate *results*, one row each in the given order.
    """
    return pd.DataFrame({
        "protocol":             [result.spec.kind for result in results],
        "n":                    pd.array([result.spec.n for result in results], dtype = "Int64"),
        "sigma":                [result.spec.sigma for result in results],
        "delta":                [result.spec.delta for result in results],
        "entropy_ebits":        [result.entropy_ebits for result in results],
        "coincidence_weight":   [result.coincidence_weight for result in results],
        "oracle_entropy_ebits": [result.oracle.entropy_ebits if result.oracle else None for result in results],
        "rel_err":              [result.rel_err for result in results],
    }, columns = CSV_COLUMNS)


def dump_csv(df: pd.DataFrame) -> str:
    """
    Render *df* as CSV text without the index, leaving missing values blank
    and writing floats with the same precision as JSON reports.

    >>> print(dump_csv(pd.DataFrame({"n": pd.array([3, None], dtype = "Int64"), "rel_err": [0.1, None]})), end = "")
    n,rel_err
    3,0.10000000000000001
    ,
    """
    return df.to_csv(index = False, na_rep = "", float_format = f"%.{FLOAT_DIGITS}g")
