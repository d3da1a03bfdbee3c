from .checkpoint import decode_blocks, encode_blocks, load_checkpoint, save_checkpoint, split_meta
from .conv import Conv3dParams, conv3d, conv3d_transposed, crop3d, pad3d
from .gradcheck import PRIMITIVES, GradCheck, GradResult, check_gradient, projected, run_checks
from .layers import activation, batch_norm
from .lstm import LstmParams, lstm_step
from .module import LSTM, BatchNorm3d, Conv3d, ConvTranspose3d, Module, Parameter
from .tensor import Tensor
