"""Hand-differentiated neural-network kernels (float64, numpy)."""
from .activations import sigmoid
from .attention import AttentionParams, attention_backward, attention_pool, softmax
from .checkpoint import load_checkpoint, save_checkpoint
from .conv import ConvParams, conv1d_apply, conv1d_backward, conv2d_apply, conv2d_backward
from .dense import BatchNormParams, DenseParams, batchnorm_apply, batchnorm_backward, dense_apply, dense_backward
from .mlp import Mlp
from .optim import AdamState, adam_step, soft_update
from .recurrent import LstmParams, LstmState, lstm_sequence, lstm_sequence_backward, lstm_step, lstm_step_backward

__all__ = [
    "AdamState",
    "AttentionParams",
    "BatchNormParams",
    "ConvParams",
    "DenseParams",
    "LstmParams",
    "LstmState",
    "Mlp",
    "adam_step",
    "attention_backward",
    "attention_pool",
    "batchnorm_apply",
    "batchnorm_backward",
    "conv1d_apply",
    "conv1d_backward",
    "conv2d_apply",
    "conv2d_backward",
    "dense_apply",
    "dense_backward",
    "load_checkpoint",
    "lstm_sequence",
    "lstm_sequence_backward",
    "lstm_step",
    "lstm_step_backward",
    "save_checkpoint",
    "sigmoid",
    "soft_update",
    "softmax",
]
