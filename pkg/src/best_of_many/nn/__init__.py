from .base import Module
from .cnn import CnnEncoder, cnn_encode
from .conv_lstm import ConvLstmCell, conv_lstm_step
from .init import glorot_bound, glorot_uniform, lstm_bias
from .layers import Conv2d, Linear, activate, flatten, linear, maxpool2, upsample2
from .lstm import LstmCell, lstm_step

__all__ = [
    "CnnEncoder",
    "Conv2d",
    "ConvLstmCell",
    "Linear",
    "LstmCell",
    "Module",
    "activate",
    "cnn_encode",
    "conv_lstm_step",
    "flatten",
    "glorot_bound",
    "glorot_uniform",
    "linear",
    "lstm_bias",
    "lstm_step",
    "maxpool2",
    "upsample2",
]
