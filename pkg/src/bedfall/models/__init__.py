"""Stage-1 logistic regression and stage-2 convolutional classifier."""

from .losses import (  # noqa: F401
    LOSS_BCE,
    LOSS_BINARY_FOCAL,
    LOSS_KINDS,
    LOSS_SIGMOID_FOCAL,
    gradient,
    loss,
    mean_loss,
    sigmoid,
)
from .optim import AdamState, adam_init, adam_step, sgd_step  # noqa: F401
from .logreg import LogRegModel, logreg_accuracy, logreg_predict, logreg_train  # noqa: F401
from .cnn import (  # noqa: F401
    CnnModel,
    ConvLayer,
    TrainConfig,
    TrainResult,
    cnn_backward,
    cnn_forward,
    conv2d_forward,
    init_cnn,
    maxpool2d,
    relu,
    train_cnn,
)
from .io import load_model, model_from_bytes, model_to_bytes, save_model  # noqa: F401
