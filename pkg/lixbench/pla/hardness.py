'''Data hardness metrics.

* PLA hardness: the segment count of the optimal ε-approximate PLA. The coarse
  ``ε=4096`` count (global hardness) reflects the macro shape of the CDF, the fine
  ``ε=32`` count (local hardness) the difficulty of the individual models.
* MSE hardness: mean squared rank residual of a single least-squares line, an
  alternative single-number measure of global non-linearity.
'''

from typing import NamedTuple
import numpy as np
from ..common.Dataset import Dataset
from ..common.LinearModel import LinearModel
from ..common.constants import (GLOBAL_EPSILON, LOCAL_EPSILON)
from .Segmentation import segment_count


class HardnessProfile(NamedTuple):
    '''Global and local PLA hardness.'''
    global_h: int
    local_h: int

    def store(self): return {'global_h': self.global_h, 'local_h': self.local_h}


def hardness_profile(d:Dataset, global_epsilon:int=GLOBAL_EPSILON, local_epsilon:int=LOCAL_EPSILON):
    '''``(|pla(d, 4096)|, |pla(d, 32)|)`` by default.'''
    return HardnessProfile(segment_count(d, global_epsilon), segment_count(d, local_epsilon))


def hardness_table(d:Dataset, epsilons:list):
    '''``(epsilon, segments)`` rows for each ``epsilon``.'''
    return [(int(eps), segment_count(d, int(eps))) for eps in epsilons]


def mse_hardness(d:Dataset):
    '''Mean squared rank residual of the least-squares line over all CDF points.'''
    n = len(d)
    if n==0:
        raise ValueError('MSE of an empty dataset.')
    if n<=2: return 0.0

    model = LinearModel.fit(d.key_list)
    keys = d.key_list
    x = np.array([k - model.origin for k in keys], dtype=np.float64)
    residual = model.slope * x + model.intercept - np.arange(n, dtype=np.float64)
    return float(np.mean(residual**2))
