"""Block statistics of skewness, kurtosis and the dominance ratio.

Compute per-block sample moments over partitioned series, verify the
closed-form skewness/kurtosis bounds, estimate the small-n lower
envelope, detect power-law emergence via conditional ECDFs of the
dominance ratio, and measure box-counting dimensions of
skewness-kurtosis point sets.
"""

from .bounds import (
    BoundSet,
    LowerEnvelopeSpec,
    ParabolaSegment,
    Violation,
    bound_set,
    check_summary,
    envelope_spec,
    max_bound_excess,
    table1_lower,
    table1_lower_many,
)
from .boxdim import BoxCountResult, box_count, box_dimension, dimension_fit
from .detector import (
    DetectorConfig,
    EcdfCurve,
    EmergenceReport,
    conditional_ecdf,
    emergence,
    quantile,
)
from .engine import (
    BlockStatsTable,
    FileSource,
    SyntheticSource,
    ingest_series,
    iter_block_stats,
    map_moments,
    partition,
    read_stats_csv,
    write_stats_csv,
)
from .envelope import (
    EnvelopeAccumulator,
    EnvelopeEstimate,
    FittedEnvelope,
    fit_envelope,
    lower_envelope,
    pearson_gap,
)
from .errors import (
    DegenerateBlockError,
    EmptySampleError,
    InsufficientDataError,
    InvalidParameterError,
    NonFiniteValueError,
    SeriesError,
    SkewKurtError,
    SkewRangeError,
)
from .moments import (
    BlockSummaries,
    MomentSummary,
    SampleBlock,
    central_moments,
    power_law_rhs,
    summarize,
    summarize_blocks,
)
from .samplers import (
    DistributionSpec,
    SeedSpec,
    default_distributions,
    derive_seed,
    draw_block,
    draw_values,
    make_generator,
    parse_distribution,
    theoretical_skew_kurt,
)

__version__ = "0.1.0"
