from .nn import (
    MixerSpec,
    MlpSpec,
    ParamStore,
    init_mixer,
    init_mlp,
    mixer_forward,
    mlp_forward,
    mlp_forward_numpy,
)
from .optim import OptimizerState, optimizer_step
from .persistence import load_arrays, save_arrays
from .tensor import Tensor, backward, concat

__all__ = [
    'MixerSpec',
    'MlpSpec',
    'OptimizerState',
    'ParamStore',
    'Tensor',
    'backward',
    'concat',
    'init_mixer',
    'init_mlp',
    'load_arrays',
    'mixer_forward',
    'mlp_forward',
    'mlp_forward_numpy',
    'optimizer_step',
    'save_arrays',
]
