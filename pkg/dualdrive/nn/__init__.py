from .adam import AdamState, adam_step
from .exceptions import *
from .kernels import (
    conv2d_forward,
    dense_forward,
    mae,
    mse_grad,
    mse_loss,
    normalize,
    relu,
    separable_conv2d_forward,
)
from .layers import backward_layer, forward_layer
from .spec import (
    Activation,
    LayerKind,
    LayerSpec,
    Padding,
    mac_count,
    output_shape,
    param_count,
)
from .tensor import FLOAT_DTYPE, Tensor
