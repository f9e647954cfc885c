import logging
from collections import Counter
from typing import Dict, Mapping, Optional, Tuple

from app.agent.actions import ActionSpace
from app.baselines.views import OracleLabel
from app.config import LOGGER_NAME
from app.datasetgen.views import DatasetManifest, HistogramCell, OptimumHistogram
from app.errors import MissingOracleResultError

logger = logging.getLogger(LOGGER_NAME)


def report_optimum_distribution(
    manifest: DatasetManifest,
    labels: Mapping[str, OracleLabel],
    space: Optional[ActionSpace] = None,
) -> OptimumHistogram:
    """
    Histogram of brute-force optima over (VF, IF).

    With a space, every grid cell is listed (zero counts included); otherwise
    only observed cells. Cells are ordered by (vf, if). The mode breaks ties
    toward the smallest (vf, if).

    Raises:
        MissingOracleResultError: a manifest program has no label
    """
    missing = [r.program_id for r in manifest.records if r.program_id not in labels]
    if missing:
        raise MissingOracleResultError(
            detail=f"{len(missing)} programs have no oracle label",
            context={"missing": missing[:10]},
        )

    counts: Counter = Counter(
        (labels[r.program_id].vf, labels[r.program_id].if_) for r in manifest.records
    )
    total = sum(counts.values())
    cells: Dict[Tuple[int, int], int] = {}
    if space is not None:
        cells.update({(a.vf, a.if_): 0 for a in space.actions()})
    cells.update(counts)

    mode = min(counts, key=lambda cell: (-counts[cell], cell))
    histogram = OptimumHistogram(
        total=total,
        cells=[
            HistogramCell(vf=vf, if_=if_, count=count, percent=100.0 * count / total)
            for (vf, if_), count in sorted(cells.items())
        ],
        mode_vf=mode[0],
        mode_if=mode[1],
    )
    logger.info("Optimum distribution over %d programs, mode VF=%d IF=%d", total, mode[0], mode[1])
    return histogram
