"""Sequential belief-propagation decoding of CSS codes with a Q-learned
variable-node schedule."""

from .bp import BpConfig, decode_flooding, decode_svns
from .channel import NoiseParams, sample_bitflip, sample_depolarizing, syndrome, trial_rng
from .codes import CssCode, classify_binary, classify_quaternary, get_code
from .fast import decode_fast
from .graph import TannerAdjacency, build_adjacency
from .quaternary import DepolPrior, decode_quat, train_quat
from .rl import QTable, TrainConfig, load_qtable, save_qtable, train

__all__ = [
    "BpConfig", "CssCode", "DepolPrior", "NoiseParams", "QTable", "TannerAdjacency", "TrainConfig",
    "build_adjacency", "classify_binary", "classify_quaternary", "decode_fast", "decode_flooding",
    "decode_quat", "decode_svns", "get_code", "load_qtable", "sample_bitflip", "sample_depolarizing",
    "save_qtable", "syndrome", "train", "train_quat", "trial_rng",
]
