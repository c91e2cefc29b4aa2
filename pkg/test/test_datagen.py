'''
Synthetic datasets with target hardness.
'''

import logging
from fractions import Fraction
import numpy as np
import pytest

from lixbench import GenSpec, generate, hardness_profile
from lixbench.common.LinearModel import LinearModel
from lixbench.datagen.Generator import (SegmentState, gen_segment, next_segment_start,
                                        GenerationException, EmptyIntervalException)
from lixbench.pla.SegmentHull import SegmentHull


def rng(seed=0):
    return np.random.Generator(np.random.PCG64(seed))


class TestGenSegment:
    '''Keys of one segment.'''

    def test_keys_within_band(self):
        '''every key lies in the band of its rank and keys strictly increase.'''
        model = LinearModel(Fraction(1, 10), Fraction(0), 1000)
        state = SegmentState(model, 999, 0, SegmentHull(8, 0))
        keys = gen_segment(state, 8, 500, rng())
        assert len(keys) == 500
        assert all(a < b for a, b in zip(keys, keys[1:]))
        assert all(abs(model.predict(k) - r) <= 8 for r, k in enumerate(keys))
        assert state.rank == 500 and state.prev == keys[-1]

    def test_one_key_per_unit_slope(self):
        '''slope 1 at epsilon 0 leaves exactly one key per rank.'''
        state = SegmentState(LinearModel(Fraction(1), Fraction(0), 50), 49, 0, SegmentHull(0, 0))
        assert gen_segment(state, 0, 5, rng()) == [50, 51, 52, 53, 54]

    def test_empty_interval(self):
        '''a slope above one rank per key runs out of keys.'''
        state = SegmentState(LinearModel(Fraction(4), Fraction(0), 0), -1, 0, SegmentHull(0, 0))
        with pytest.raises(EmptyIntervalException):
            gen_segment(state, 0, 3, rng())

    def test_invalid_arguments(self):
        '''non-positive slope or count.'''
        state = SegmentState(LinearModel(Fraction(0), Fraction(0), 0))
        with pytest.raises(ValueError):
            gen_segment(state, 4, 3, rng())


class TestNextSegmentStart:
    '''Key forcing a new segment.'''

    def setup_method(self):
        model = LinearModel(Fraction(1, 16), Fraction(0), 0)
        self.epsilon = 4
        self.state = SegmentState(model, -1, 0, SegmentHull(self.epsilon, 0))
        gen_segment(self.state, self.epsilon, 200, rng(3))

    def test_every_later_key_breaks(self):
        '''the returned key and keys past it cannot extend the segment, the key before can.'''
        start = next_segment_start(self.state, self.epsilon)
        hull, rank = self.state.hull, self.state.rank
        assert start > self.state.prev
        for k in (start, start+1, start+1000, 2*start):
            assert not hull.can_add(k, rank)
        assert hull.can_add(start-1, rank)

    def test_short_segment(self):
        '''fewer than two points: the next key follows directly.'''
        state = SegmentState(LinearModel(Fraction(1, 16), Fraction(0), 0), -1, 0, SegmentHull(4, 0))
        gen_segment(state, 4, 1, rng())
        assert next_segment_start(state, 4) == state.prev + 1

    def test_epsilon_mismatch(self):
        '''the hull was built for another epsilon.'''
        with pytest.raises(ValueError):
            next_segment_start(self.state, 8)

    def test_unbounded_segment(self):
        '''a segment admitting horizontal lines extends to any key.'''
        state = SegmentState(LinearModel(Fraction(1, 16), Fraction(0), 0), -1, 0, SegmentHull(4, 0))
        gen_segment(state, 4, 3, rng())
        with pytest.raises(GenerationException):
            next_segment_start(state, 4)


class TestGenerate:
    '''Whole datasets.'''

    @pytest.mark.parametrize('target_global, target_local', [(1, 8), (2, 16), (2, 32)])
    def test_profile_near_target(self, target_global, target_local):
        '''measured hardness within [target-1, 1.25*target] in both dimensions.'''
        spec = GenSpec(n_keys=20000, target_global=target_global, target_local=target_local, seed=5)
        d = generate(spec)
        assert len(d) == 20000
        g, l = hardness_profile(d)
        assert target_global - 1 <= g <= 1.25*target_global
        assert target_local - 1 <= l <= 1.25*target_local

    def test_deterministic(self):
        '''same seed, bit-identical keys; another seed, other keys.'''
        spec = GenSpec(n_keys=5000, target_global=1, target_local=4, seed=9)
        a, b = generate(spec), generate(spec)
        assert np.array_equal(a.keys, b.keys)
        spec.seed = 10
        assert not np.array_equal(a.keys, generate(spec).keys)

    def test_start_key(self):
        '''keys start at or after the start key.'''
        spec = GenSpec(n_keys=1000, target_global=1, target_local=2, start_key=10**12)
        assert generate(spec).min_key >= 10**12

    @pytest.mark.parametrize('kwargs', [
        dict(n_keys=10, target_global=2, target_local=1),
        dict(n_keys=10, target_global=1, target_local=6),
        dict(n_keys=100, target_global=1, target_local=2, slope_range=(0.5, 2.0)),
        dict(n_keys=100, target_global=0, target_local=2)])
    def test_invalid_spec(self, kwargs):
        '''inconsistent targets or slopes.'''
        with pytest.raises(GenerationException):
            generate(GenSpec(**kwargs))

    def test_unreachable_target_warns(self, caplog):
        '''more global segments than 20000 keys can form at epsilon 4096 is reported up front.'''
        spec = GenSpec(n_keys=20000, target_global=4, target_local=16, seed=5)
        with caplog.at_level(logging.WARNING):
            try:
                generate(spec)
            except GenerationException:
                pass
        assert any('Global hardness 4 is unreachable' in r.getMessage() for r in caplog.records)

    def test_reachable_target_quiet(self, caplog):
        '''no unreachable warning within the bound.'''
        spec = GenSpec(n_keys=20000, target_global=2, target_local=16, seed=5)
        with caplog.at_level(logging.WARNING):
            generate(spec)
        assert not any('unreachable' in r.getMessage() for r in caplog.records)
