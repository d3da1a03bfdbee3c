from .adam import Adam, AdamState, OptimConfig, adam_step
from .loss_history import LOSS_COLUMNS, LossHistory
from .losses import (
    LOSS_CHECKS,
    LossWeights,
    StudentLosses,
    TeacherLosses,
    mse,
    student_losses,
    teacher_losses,
    total_loss,
)
from .trainer import (
    CHECKPOINT_FILE,
    LOSS_LOG_FILE,
    REPORT_FILE,
    RUN_CONFIG_FILE,
    Optimizers,
    TrainResult,
    TrainSettings,
    build_optimizers,
    hampel_from_meta,
    init_params,
    split_indices,
    synthesize_batched,
    train,
    train_step,
)
