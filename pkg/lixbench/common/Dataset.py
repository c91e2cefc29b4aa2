'''Sorted unique 64-bit key datasets and the binary key-file layout.

The file layout is a little-endian 64-bit ``count`` header followed by ``count``
little-endian 64-bit keys, i.e. the layout of the SOSD benchmark files::

    +---------+--------+--------+-----+--------+
    | count   | key 0  | key 1  | ... | key n-1|
    +---------+--------+--------+-----+--------+
      8 bytes   8 bytes

Keys in a file need not be sorted or unique: loading sorts and removes duplicates.
'''

import os
from typing import NamedTuple
import numpy as np
from .share import lazyproperty
from .constants import KEY_BYTES


class CdfPoint(NamedTuple):
    '''A key with its 0-based rank in the dataset.'''
    key: int
    rank: int


class Dataset:
    '''Strictly increasing sequence of unsigned 64-bit keys.'''

    def __init__(self, keys:np.ndarray):
        keys = np.asarray(keys, dtype=np.uint64)
        if keys.ndim!=1:
            raise ValueError('Dataset keys must be a one-dimensional array.')
        if keys.size>1 and not np.all(keys[1:] > keys[:-1]):
            raise ValueError('Dataset keys must be strictly increasing.')
        self._keys = keys


    @classmethod
    def from_keys(cls, keys):
        '''Create dataset from arbitrary keys: sort and remove duplicates.'''
        arr = np.asarray(list(keys) if not isinstance(keys, np.ndarray) else keys, dtype=np.uint64)
        return cls(np.unique(arr))


    @property
    def keys(self): return self._keys

    def __len__(self): return int(self._keys.size)

    def __getitem__(self, idx): return self.key_list[idx]

    def __iter__(self): return iter(self.key_list)

    def __eq__(self, other):
        return isinstance(other, Dataset) and np.array_equal(self._keys, other._keys)


    @lazyproperty
    def key_list(self):
        '''Keys as python integers: exact arithmetic on the full 64-bit range.'''
        return [int(k) for k in self._keys.tolist()]


    @property
    def min_key(self): return self.key_list[0]

    @property
    def max_key(self): return self.key_list[-1]


    def points(self):
        '''Iterate the CDF points ``(key, rank)``.'''
        return (CdfPoint(k, i) for i, k in enumerate(self.key_list))


    def pairs(self):
        '''``(key, payload)`` pairs for bulk loading; payload of key ``k`` is ``k`` itself.'''
        return [(k, k) for k in self.key_list]


    def store(self):
        '''Summary in json format.'''
        n = len(self)
        return {
            'num_keys': n,
            'min_key' : self.min_key if n else None,
            'max_key' : self.max_key if n else None
        }


# -------------------------------------
# file I/O
# -------------------------------------
def load_dataset(path:str):
    '''Load a key file.

    Args:
        path (str): Key file path.

    Raises:
        DatasetException: I/O failure, truncated file or empty dataset.

    Returns:
        Dataset: Sorted, de-duplicated keys.
    '''
    try:
        size = os.path.getsize(path)
        words = np.fromfile(path, dtype='<u8')
    except OSError as e:
        raise DatasetException(f'Failed to read dataset "{path}": {e}') from e

    if size < KEY_BYTES or size % KEY_BYTES:
        raise DatasetException(f'Truncated dataset "{path}": {size} bytes.')

    count = int(words[0])
    if size != KEY_BYTES * (count+1):
        raise DatasetException(
            f'Truncated dataset "{path}": header declares {count} keys, ' \
            f'file holds {size//KEY_BYTES - 1}.')
    if count==0:
        raise DatasetException(f'Empty dataset "{path}".')

    return Dataset(np.unique(words[1:].astype(np.uint64)))


def save_dataset(d:Dataset, path:str):
    '''Write dataset in the binary key-file layout, the exact inverse of :py:func:`load_dataset`.'''
    try:
        with open(path, 'wb') as f:
            np.array([len(d)], dtype='<u8').tofile(f)
            d.keys.astype('<u8').tofile(f)
    except OSError as e:
        raise DatasetException(f'Failed to write dataset "{path}": {e}') from e


class DatasetException(Exception):
    pass
