from movact.segmenter.filter import (
    CLOSED,
    OPENED,
    AllenGate,
    DegenerateBeliefError,
    Event,
    FilterConfig,
    FilterState,
    FixedGate,
    ProductGate,
    StepResult,
    Timeline,
    consecutive_weights,
    filter_step,
    predict_prior,
    run_online,
    unconstrained,
    update_belief,
)
from movact.segmenter.model import (
    SegmentModel,
    build_segment_model,
    gaussian_pmf,
    geometric_pmf,
    hazard,
    hazards_from_pmf,
    load_segment_model,
    save_segment_model,
)
from movact.segmenter.oracle import InstanceTooLargeError, brute_force_map, brute_force_posterior
from movact.segmenter.recognize import (
    InfeasibleError,
    MapResult,
    map_segmentation,
    map_segmentation_from_loglik,
    stream_log_likelihoods,
)
