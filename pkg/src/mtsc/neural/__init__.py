"""Minimal dense neural stack: conv classifier, LSTM, Adam, gradient checks."""

from .adam import AdamState, adam_init, adam_step
from .checkpoint import (
    CHECKPOINT_FORMAT,
    CHECKPOINT_VERSION,
    load_convtimenet,
    load_lstm,
    save_convtimenet,
    save_lstm,
)
from .convnet import (
    ConvTimeNetLite,
    ConvnetClassifier,
    convtimenet_backward,
    convtimenet_forward,
    fit_convtimenet_classifier,
    init_convtimenet,
    net_params,
    predict_classes,
    predict_convtimenet_classifier,
    train_convtimenet,
)
from .data import CLASS_ORDER, decode_labels, encode_labels, windowed_tensors
from .gradcheck import (
    finite_difference_gradients,
    gradcheck_convnet,
    gradcheck_lstm,
    max_relative_error,
)
from .layers import (
    BnParams,
    adaptive_avg_pool_to_1,
    batchnorm1d,
    bn_init,
    conv1d,
    conv1d_backward,
    cross_entropy,
    dropout,
    log_softmax,
    relu,
    softmax,
)
from .lstm import (
    GATE_WEIGHTS,
    LstmCellParams,
    LstmClassifier,
    TransferConfig,
    TransferResult,
    clone_lstm,
    fit_lstm,
    fit_lstm_classifier,
    init_lstm,
    lstm_backward,
    lstm_forward,
    lstm_predict_classes,
    predict_lstm_labels,
    transfer_learn,
)

__all__ = [
    "AdamState", "adam_init", "adam_step",
    "CHECKPOINT_FORMAT", "CHECKPOINT_VERSION",
    "load_convtimenet", "load_lstm", "save_convtimenet", "save_lstm",
    "ConvTimeNetLite", "ConvnetClassifier", "convtimenet_backward",
    "convtimenet_forward", "fit_convtimenet_classifier", "init_convtimenet",
    "net_params", "predict_classes", "predict_convtimenet_classifier",
    "train_convtimenet",
    "CLASS_ORDER", "decode_labels", "encode_labels", "windowed_tensors",
    "finite_difference_gradients", "gradcheck_convnet", "gradcheck_lstm",
    "max_relative_error",
    "BnParams", "adaptive_avg_pool_to_1", "batchnorm1d", "bn_init", "conv1d",
    "conv1d_backward", "cross_entropy", "dropout", "log_softmax", "relu",
    "softmax",
    "GATE_WEIGHTS", "LstmCellParams", "LstmClassifier", "TransferConfig",
    "TransferResult",
    "clone_lstm", "fit_lstm", "fit_lstm_classifier", "init_lstm",
    "lstm_backward", "lstm_forward", "lstm_predict_classes",
    "predict_lstm_labels", "transfer_learn",
]
