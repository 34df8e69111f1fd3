"""Unpaired translation between undamaged and damaged vibration-signal
domains, trained adversarially with cycle consistency and scored with
moment-based, separability-based, and spectral indicators."""

from .errors import (
    CheckpointError,
    ConfigError,
    DataError,
    TrainingDiverged,
    VibecycleError,
)
from .losses import (
    LossBreakdown,
    LossWeights,
    critic_loss,
    cycle_loss,
    generator_adversarial_loss,
    gradient_penalty,
    identity_loss,
    total_losses,
)
from .metrics import (
    MetricReport,
    dominant_frequency,
    evaluate_pair,
    fft_power,
    fid,
    likeliness_score,
    likeliness_score_records,
    xcross,
)
from .networks import (
    Critic,
    CriticSpec,
    Generator,
    GeneratorSpec,
    ModelQuad,
    build_critic,
    build_generator,
    build_model_quad,
    count_layers,
    has_batchnorm,
    layer_plan,
    residual_audit,
)
from .signal_data import (
    CANONICAL_SAMPLE_RATE_HZ,
    SEGMENT_LENGTH,
    DomainLabel,
    Provenance,
    Segment,
    VibrationRecord,
    load_record,
    load_record_with_meta,
    reassemble,
    segment,
    segment_matrix,
    summary_stats,
    write_record,
)
from .synthetic_structure import (
    ModalModel,
    ToyDomainSpec,
    build_modal_model,
    chain_matrices,
    default_desk_scale_models,
    generate_toy_record,
    simulate_response,
)
from .toy_experiment import (
    ToyOutcome,
    assess_toy_outcome,
    run_toy_experiment,
    toy_hyperparams,
    toy_records,
    toy_specs,
)
from .training import (
    Checkpoint,
    EpochRecord,
    Hyperparams,
    TrainResult,
    checkpoint_load,
    checkpoint_save,
    format_epoch_record,
    model_from_checkpoint,
    monitor,
    train,
    translate,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
