'''Synthetic datasets with controllable global and local PLA hardness.

Generation works top-down: a global segment is a random line at the coarse ``ε``; inside
it, local segments are random lines at the fine ``ε`` steered to stay close to the global
line. For each successive rank ``y`` a key is drawn uniformly from::

    [max((y - ε - b) / m, prev + 1), (y + ε - b) / m]

intersected with the band of the enclosing global line, so every local segment is
ε-feasible by construction. The first key of each new segment is pushed past the far side
of the previous segment's feasible band (see :py:func:`next_segment_start`), which forces
the optimal PLA to break exactly there. Each segment gets an equal share of the keys.

All band arithmetic is exact (``fractions.Fraction``) and all randomness comes from a
``numpy`` ``PCG64`` stream seeded by :py:attr:`GenSpec.seed`, so output is bit-identical
across runs and platforms.
'''

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
import numpy as np
from ..common.Dataset import Dataset
from ..common.LinearModel import LinearModel
from ..common.constants import (GLOBAL_EPSILON, LOCAL_EPSILON, MAX_KEY)
from ..pla.SegmentHull import SegmentHull
from ..pla.Segmentation import max_segments


@dataclass
class GenSpec:
    '''Generation parameters.

    ``validate`` requires ``n_keys >= 2*target_local`` (two keys per local segment) on top of
    ``n_keys >= target_local >= target_global >= 1``. Targets above
    :py:func:`~lixbench.pla.Segmentation.max_segments` cannot be measured and only draw a
    warning: 200000 keys give at most 25 segments at ``epsilon_global=4096``.
    '''
    n_keys: int
    target_global: int
    target_local: int
    epsilon_global: int = GLOBAL_EPSILON
    epsilon_local: int = LOCAL_EPSILON
    seed: int = 0
    slope_range: tuple = (2**-8, 2**-1)   # ranks per key unit, sampled log-uniformly
    intercept_range: tuple = None         # rank offset of a segment line at its first key; defaults to ±epsilon_local
    offset_range: tuple = None            # rank offset of a local segment end from the global line; defaults to ±epsilon_global/4
    start_key: int = 0
    max_retries: int = 16                 # model resamples per local segment

    def validate(self):
        if not self.n_keys >= self.target_local >= self.target_global >= 1:
            raise GenerationException(
                f'Expect n_keys >= target_local >= target_global >= 1: ' \
                f'{self.n_keys}, {self.target_local}, {self.target_global}.')
        if self.epsilon_global < 0 or self.epsilon_local < 0:
            raise GenerationException('Epsilons must be non-negative.')
        lo, hi = self.slope_range
        if not 0 < lo <= hi <= 1:
            raise GenerationException(f'Slope range must lie in (0, 1]: {self.slope_range}.')
        if self.n_keys < 2 * self.target_local:
            raise GenerationException(
                f'Each local segment needs at least 2 keys: {self.n_keys} keys, {self.target_local} segments.')
        if not 0 <= self.start_key <= MAX_KEY:
            raise GenerationException(f'Start key out of range: {self.start_key}.')


    @property
    def intercepts(self):
        return self.intercept_range or (-self.epsilon_local, self.epsilon_local)

    @property
    def offsets(self):
        return self.offset_range or (-(self.epsilon_global//4), self.epsilon_global//4)


    def local_counts(self):
        '''Key count of every local segment, in order: equal shares, remainder to the first ones.'''
        q, r = divmod(self.n_keys, self.target_local)
        return [q + (1 if i < r else 0) for i in range(self.target_local)]


    def locals_per_global(self):
        '''Local segment count of every global segment, remainder round-robin to the first ones.'''
        q, r = divmod(self.target_local, self.target_global)
        return [q + (1 if i < r else 0) for i in range(self.target_global)]


    def store(self):
        return {
            'n_keys'        : self.n_keys,
            'target_global' : self.target_global,
            'target_local'  : self.target_local,
            'epsilon_global': self.epsilon_global,
            'epsilon_local' : self.epsilon_local,
            'seed'          : self.seed
        }


@dataclass
class SegmentState:
    '''Progress of the segment being generated.

    ``model`` carries exact (fraction) parameters; ``prev`` is the last emitted key,
    ``-1`` before the first one; ``rank`` is the rank of the next key.
    '''
    model: LinearModel
    prev: int = -1
    rank: int = 0
    hull: SegmentHull = field(default=None)

    def __post_init__(self):
        if self.hull is None: self.hull = SegmentHull(0, self.rank)


# -------------------------------------
# operations
# -------------------------------------
def _band(model:LinearModel, rank:int, epsilon:int):
    '''Exact key interval whose predictions under ``model`` lie within ``epsilon`` of ``rank``.'''
    m, b = Fraction(model.slope), Fraction(model.intercept)
    return (model.origin + (rank-epsilon-b)/m, model.origin + (rank+epsilon-b)/m)


def _uniform_int(rng:np.random.Generator, lo:int, hi:int):
    '''Uniform integer in ``[lo, hi]``; the width may span the whole 64-bit range.'''
    return lo + int(rng.integers(0, hi-lo, endpoint=True, dtype=np.uint64))


def gen_segment(state:SegmentState, epsilon:int, count:int, rng:np.random.Generator, envelope:tuple=None):
    '''Draw ``count`` keys for the successive ranks of a segment.

    Args:
        state (SegmentState): Segment model and progress; ``prev``, ``rank`` and ``hull`` are updated.
        epsilon (int): Half height of the sampling band in ranks.
        count (int): Number of keys.
        rng (numpy.random.Generator): Random stream.
        envelope (tuple, optional): ``(model, epsilon)`` of an enclosing segment whose band
            also bounds every key. Defaults to None.

    Raises:
        EmptyIntervalException: No integer key fits for some rank. The state is then
            partially extended and must be discarded.

    Returns:
        list: Strictly increasing keys.
    '''
    model = state.model
    if model.slope <= 0:
        raise ValueError(f'Segment slope must be positive: {model.slope}.')
    if count < 1:
        raise ValueError(f'Segment key count must be positive: {count}.')

    keys = []
    prev, rank = state.prev, state.rank
    for _ in range(count):
        lo, hi = _band(model, rank, epsilon)
        if envelope:
            glo, ghi = _band(envelope[0], rank, envelope[1])
            lo, hi = max(lo, glo), min(hi, ghi)
        lo_key = max(math.ceil(lo), prev+1, 0)
        hi_key = min(math.floor(hi), MAX_KEY)
        if lo_key > hi_key:
            raise EmptyIntervalException(f'Empty sampling interval at rank {rank}.')

        key = _uniform_int(rng, lo_key, hi_key)
        if not state.hull.add(key, rank):
            raise GenerationException(f'Key {key} at rank {rank} breaks its own segment.')
        keys.append(key)
        prev, rank = key, rank+1

    state.prev, state.rank = prev, rank
    return keys


def next_segment_start(state:SegmentState, epsilon:int):
    '''Smallest key past the far side of the band of keys that would still extend the segment.

    Every key ``>=`` the returned key, placed at rank ``state.rank``, makes the segment
    infeasible at ``epsilon``. Found by doubling the distance from a feasible witness key,
    then binary search.

    Args:
        state (SegmentState): Segment generated so far.
        epsilon (int): Must equal the epsilon of ``state.hull``.

    Raises:
        GenerationException: The band reaches past the 64-bit key space.

    Returns:
        int: First key of the next segment; ``prev+1`` when no key fits the segment at all
        or the segment holds fewer than two points.
    '''
    hull = state.hull
    if hull.epsilon != epsilon:
        raise ValueError(f'Segment hull built for epsilon {hull.epsilon}, not {epsilon}.')
    prev, rank = state.prev, state.rank
    if hull.count < 2: return prev + 1
    if not hull.bounded:
        raise GenerationException(f'Key space exhausted: segment at rank {rank} extends to any key.')

    # feasible keys form one interval: the key predicted by the segment model is inside
    s, b = hull.exact_model()
    x = hull.origin + (rank - b) / s
    floor_key = hull.last_key + 1
    witness = None
    for key in sorted({max(math.floor(x), floor_key), max(math.ceil(x), floor_key)}):
        if key <= MAX_KEY and hull.can_add(key, rank):
            witness = key
            break
    if witness is None: return prev + 1

    # doubling, then binary search for the last feasible key
    feasible, step = witness, 1
    while True:
        probe = feasible + step
        if probe > MAX_KEY:
            raise GenerationException(f'Key space exhausted: segment at rank {rank} extends past 2^64-1.')
        if not hull.can_add(probe, rank): break
        feasible, step = probe, step*2

    while probe - feasible > 1:
        mid = (feasible + probe) // 2
        if hull.can_add(mid, rank):
            feasible = mid
        else:
            probe = mid

    return max(prev+1, probe)


# -------------------------------------
# dataset generation
# -------------------------------------
def _boundary(state:SegmentState, epsilon:int):
    '''First key of the next segment, or ``prev+1`` if the segment cannot be closed by a key gap.'''
    if not state.hull.bounded: return state.prev + 1
    return next_segment_start(state, epsilon)


def _sample_slope(spec:GenSpec, rng:np.random.Generator):
    lo, hi = spec.slope_range
    slope = math.exp(rng.uniform(math.log(lo), math.log(hi)))
    return Fraction(slope).limit_denominator(1<<24)


def _local_model(spec:GenSpec, rng, start_key:int, rank:int, count:int, global_model:LinearModel):
    '''Local line through ``start_key`` heading for the global line ``count`` ranks later.'''
    delta = int(rng.integers(spec.intercepts[0], spec.intercepts[1], endpoint=True))
    offset = int(rng.integers(spec.offsets[0], spec.offsets[1], endpoint=True))
    gm = global_model
    end_key = math.floor(gm.origin + (rank + count + offset - gm.intercept) / gm.slope)
    span = max(end_key - start_key, count) # no more than one rank per key unit
    return LinearModel(Fraction(count, span), Fraction(rank + delta), start_key)


def _gen_local(spec:GenSpec, rng, start_key:int, rank:int, count:int, global_model:LinearModel):
    '''Local segment of ``count`` keys starting at or after ``start_key``, retried with fresh
    models when the global band leaves no room.'''
    envelope = (global_model, spec.epsilon_global)
    for attempt in range(spec.max_retries + 1):
        if attempt==spec.max_retries:
            logging.warning('Local segment at rank %d leaves the global band after %d attempts.', rank, attempt)
            envelope = None

        model = _local_model(spec, rng, start_key, rank, count, global_model)
        state = SegmentState(model, start_key-1, rank, SegmentHull(spec.epsilon_local, rank))
        try:
            keys = gen_segment(state, spec.epsilon_local, count, rng, envelope)
        except EmptyIntervalException as e:
            logging.warning('%s Resampling local model (%d/%d).', e, attempt+1, spec.max_retries)
        else:
            return keys, state

    raise GenerationException(f'No local segment fits at rank {rank}.')


def generate(spec:GenSpec):
    '''Generate a dataset with ``spec.target_global`` global and ``spec.target_local`` local segments.

    Args:
        spec (GenSpec): Generation parameters.

    Raises:
        GenerationException: Invalid parameters, a local segment that cannot be sampled,
            or keys exceeding the 64-bit space.

    Returns:
        Dataset: Exactly ``spec.n_keys`` strictly increasing keys.
    '''
    spec.validate()
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    counts = spec.local_counts()
    groups = spec.locals_per_global()

    for name, target, epsilon in (('Global', spec.target_global, spec.epsilon_global),
                                  ('Local', spec.target_local, spec.epsilon_local)):
        bound = max_segments(spec.n_keys, epsilon)
        if target > bound:
            logging.warning('%s hardness %d is unreachable: %d keys form at most %d segments at epsilon %d.',
                name, target, spec.n_keys, bound, epsilon)

    if min(counts) < 2*spec.epsilon_local + 2:
        logging.warning('Local segments of %d keys may merge: %d keys needed to force a boundary at epsilon %d.',
            min(counts), 2*spec.epsilon_local + 2, spec.epsilon_local)
    k, g_min = 0, None
    for n in groups:
        g_keys = sum(counts[k:k+n])
        g_min = g_keys if g_min is None else min(g_min, g_keys)
        k += n
    if g_min < 2*spec.epsilon_global + 2:
        logging.warning('Global segments of %d keys may merge: %d keys needed to force a boundary at epsilon %d.',
            g_min, 2*spec.epsilon_global + 2, spec.epsilon_global)

    keys = []
    rank, local_idx = 0, 0
    local_state = global_state = None
    for g, n_locals in enumerate(groups):
        # global boundary: past both the last local and the last global band
        if g==0:
            start_key = spec.start_key
        else:
            start_key = max(_boundary(local_state, spec.epsilon_local),
                            _boundary(global_state, spec.epsilon_global))

        delta = int(rng.integers(spec.intercepts[0], spec.intercepts[1], endpoint=True))
        global_model = LinearModel(_sample_slope(spec, rng), Fraction(rank + delta), start_key)
        global_state = SegmentState(global_model, start_key-1, rank, SegmentHull(spec.epsilon_global, rank))

        rejected = 0
        for j in range(n_locals):
            if j > 0: start_key = _boundary(local_state, spec.epsilon_local)
            count = counts[local_idx]
            local_keys, local_state = _gen_local(spec, rng, start_key, rank, count, global_model)

            # global hull takes keys once the local segment is complete
            for key in local_keys:
                if not global_state.hull.add(key, rank):
                    rejected += 1
                    global_state.hull = SegmentHull(spec.epsilon_global, rank)
                    global_state.hull.add(key, rank)
                rank += 1
            global_state.prev, global_state.rank = local_keys[-1], rank

            keys.extend(local_keys)
            local_idx += 1

        if rejected:
            logging.warning('Global segment %d split %d time(s) by keys outside its band.', g, rejected)

    return Dataset(np.array(keys, dtype=np.uint64))


class GenerationException(Exception):
    pass

class EmptyIntervalException(GenerationException):
    pass
