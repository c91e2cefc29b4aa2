'''
Shared types: datasets and the key file layout, linear models, counters, the reference map.

The test framework: pytest, pytest-cov, hypothesis.

- pytest -vs --no-header test_common.py::TestDataset
'''

import os
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lixbench import Dataset, load_dataset, save_dataset, SortedOracle, oracle_apply
from lixbench.common.Dataset import DatasetException
from lixbench.common.LinearModel import LinearModel
from lixbench.common.Counters import Counters
from lixbench.common.share import OpKind, OpResult, check_key, is_sorted_unique, ceil_div
from lixbench.common.constants import MAX_KEY
from lixbench.btree.BPlusTree import BPlusTree


def write_words(path, words):
    np.array(words, dtype='<u8').tofile(path)


class TestDataset:
    '''Dataset type and binary key files.'''

    @pytest.fixture(autouse=True)
    def setup_path(self, tmp_path):
        self.path = os.path.join(tmp_path, 'keys.bin')

    def test_load_sorts_and_deduplicates(self):
        '''file [count=3; 5, 1, 5] -> [1, 5].'''
        write_words(self.path, [3, 5, 1, 5])
        d = load_dataset(self.path)
        assert d.key_list == [1, 5]

    def test_load_empty(self):
        '''count=0 is an empty dataset error.'''
        write_words(self.path, [0])
        with pytest.raises(DatasetException, match='Empty'):
            load_dataset(self.path)

    def test_load_truncated(self):
        '''header declaring more keys than the file holds.'''
        write_words(self.path, [4, 1, 2])
        with pytest.raises(DatasetException, match='Truncated'):
            load_dataset(self.path)

    def test_load_partial_word(self):
        '''file size not a multiple of 8 bytes.'''
        with open(self.path, 'wb') as f: f.write(b'\x01\x00\x00')
        with pytest.raises(DatasetException):
            load_dataset(self.path)

    def test_load_missing_file(self):
        '''I/O failure.'''
        with pytest.raises(DatasetException):
            load_dataset(self.path + '.missing')

    def test_save_layout(self):
        '''Dataset [1,5] -> 24 bytes: header 2, then 1, 5.'''
        save_dataset(Dataset.from_keys([5, 1]), self.path)
        assert os.path.getsize(self.path) == 24
        assert np.fromfile(self.path, dtype='<u8').tolist() == [2, 1, 5]

    def test_roundtrip_random(self):
        '''save then load is the identity for 10k random keys, full 64-bit range.'''
        rng = np.random.default_rng(7)
        d = Dataset.from_keys(rng.integers(0, MAX_KEY, size=10000, dtype=np.uint64, endpoint=True))
        save_dataset(d, self.path)
        assert os.path.getsize(self.path) == 8 + 8*len(d)
        assert load_dataset(self.path) == d

    def test_strictly_increasing(self):
        '''constructor rejects unsorted or duplicate keys.'''
        with pytest.raises(ValueError):
            Dataset(np.array([1, 1], dtype=np.uint64))
        with pytest.raises(ValueError):
            Dataset(np.array([2, 1], dtype=np.uint64))

    def test_points_and_pairs(self):
        '''CDF points carry 0-based ranks; bulk-load payload equals the key.'''
        d = Dataset.from_keys([10, 30, 20])
        assert [tuple(p) for p in d.points()] == [(10, 0), (20, 1), (30, 2)]
        assert d.pairs() == [(10, 10), (20, 20), (30, 30)]
        assert d.store() == {'num_keys': 3, 'min_key': 10, 'max_key': 30}

    def test_large_keys_exact(self):
        '''keys near 2^64 stay exact python integers.'''
        d = Dataset.from_keys([MAX_KEY, MAX_KEY-1])
        assert d.key_list == [MAX_KEY-1, MAX_KEY]
        assert all(isinstance(k, int) for k in d)


class TestLinearModel:
    '''Model arithmetic anchored at an origin key.'''

    def test_predict_near_max_key(self):
        '''no cancellation for keys close to 2^64.'''
        m = LinearModel(0.5, 3.0, MAX_KEY-100)
        assert m.predict(MAX_KEY) == 53.0

    def test_slot_clamped(self):
        '''predictions outside the array map to its ends.'''
        m = LinearModel(1.0, 0.0, 10)
        assert m.slot(0, 8) == 0
        assert m.slot(13, 8) == 3
        assert m.slot(1000, 8) == 7

    def test_fit_ranks(self):
        '''least squares on evenly spaced keys is exact.'''
        m = LinearModel.fit([100, 110, 120, 130])
        assert m.origin == 100
        assert m.predict(120) == pytest.approx(2.0)

    def test_fit_degenerate(self):
        '''empty and single key inputs.'''
        assert LinearModel.fit([]) == LinearModel()
        assert LinearModel.fit([42]).predict(42) == 0.0

    def test_through_and_spanning(self):
        '''through maps first and last key to the array ends, spanning maps a half-open range.'''
        m = LinearModel.through(0, 100, 11)
        assert m.slot(0, 11) == 0 and m.slot(100, 11) == 10
        s = LinearModel.spanning(0, 64, 4)
        assert [s.slot(k, 4) for k in (0, 15, 16, 63)] == [0, 0, 1, 3]


class TestCounters:
    '''Operation counters.'''

    def test_delta_and_per_insert(self):
        '''delta subtracts a snapshot; per-insert means divide by inserts.'''
        c = Counters()
        before = c.snapshot()
        c.inserts, c.keys_shifted, c.nodes_created, c.smo_ns = 4, 10, 2, 400
        d = c.delta(before)
        assert d.inserts == 4 and d.keys_shifted == 10
        assert d.per_insert() == {'nodes_traversed': 0.0, 'keys_shifted': 2.5, 'nodes_created': 0.5,
                                  'search_ns': 0.0, 'write_ns': 0.0, 'smo_ns': 100.0}
        assert before == Counters()


class TestOracle:
    '''Reference ordered map.'''

    def test_insert_lookup(self):
        '''[insert(5,50), lookup(5)] -> [ok, found(50)].'''
        res = oracle_apply([(OpKind.INSERT, 5, 50), (OpKind.LOOKUP, 5, None)])
        assert res == [(OpResult.OK, None), (OpResult.FOUND, 50)]

    def test_lookup_missing(self):
        '''[lookup(7)] -> [not-found].'''
        assert oracle_apply([(OpKind.LOOKUP, 7, None)]) == [(OpResult.NOT_FOUND, None)]

    def test_set_semantics(self):
        '''duplicate insert overwrites, remove of absent key reports absence.'''
        ops = [(OpKind.INSERT, 1, 10), (OpKind.INSERT, 1, 11), (OpKind.REMOVE, 2, None),
               (OpKind.REMOVE, 1, None), (OpKind.LOOKUP, 1, None)]
        assert [r for r, _ in oracle_apply(ops)] == \
            [OpResult.OK, OpResult.UPDATED, OpResult.ABSENT, OpResult.REMOVED, OpResult.NOT_FOUND]

    def test_scan(self):
        '''scans return the count smallest keys >= start.'''
        oracle = SortedOracle([(k, k) for k in range(0, 100, 10)])
        assert oracle.range_scan(25, 3) == [(30, 30), (40, 40), (50, 50)]
        assert oracle.range_scan(95, 3) == []

    def test_applies_to_given_oracle(self):
        '''an empty oracle passed in is used, not replaced.'''
        oracle = SortedOracle()
        oracle_apply([(OpKind.INSERT, 3, 4)], oracle)
        assert oracle.items() == [(3, 4)]

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.tuples(st.sampled_from([OpKind.INSERT, OpKind.LOOKUP, OpKind.REMOVE, OpKind.SCAN]),
                              st.integers(0, 200), st.integers(0, 20)), max_size=200))
    def test_index_contract_matches_oracle(self, ops):
        '''an index applying the same operations gives the oracle's results.'''
        tree = BPlusTree(fanout=4)
        assert [tree.apply(op) for op in ops] == oracle_apply(ops)


class TestHelpers:
    '''Small helpers.'''

    def test_check_key(self):
        '''keys outside [0, 2^64-1] are rejected.'''
        check_key(0)
        check_key(MAX_KEY)
        with pytest.raises(ValueError): check_key(-1)
        with pytest.raises(ValueError): check_key(MAX_KEY+1)

    def test_sorted_unique(self):
        '''pairs or keys, strictly increasing.'''
        assert is_sorted_unique([(1, 0), (2, 0)])
        assert not is_sorted_unique([1, 1])
        assert ceil_div(7, 2) == 4 and ceil_div(8, 2) == 4
