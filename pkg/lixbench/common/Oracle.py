'''Reference ordered map used to check every index implementation.

Correctness only: a sorted key list with ``bisect`` plus a dict of payloads.
Single-threaded.
'''

from bisect import bisect_left, insort
from .share import OpKind, OpResult


class SortedOracle:
    '''Sorted reference map.'''

    def __init__(self, pairs:list=None):
        self._keys = []
        self._payloads = {}
        if pairs: self.bulk_load(pairs)

    def __len__(self): return len(self._keys)

    def __contains__(self, key): return key in self._payloads


    def bulk_load(self, pairs:list):
        self._payloads = dict(pairs)
        self._keys = sorted(self._payloads)
        return self


    def lookup(self, key:int): return self._payloads.get(key, None)


    def insert(self, key:int, payload:int):
        new = key not in self._payloads
        if new: insort(self._keys, key)
        self._payloads[key] = payload
        return new


    def remove(self, key:int):
        if key not in self._payloads: return False
        del self._payloads[key]
        del self._keys[bisect_left(self._keys, key)]
        return True


    def range_scan(self, start:int, count:int):
        i = bisect_left(self._keys, start)
        return [(k, self._payloads[k]) for k in self._keys[i:i+max(count, 0)]]


    def items(self): return [(k, self._payloads[k]) for k in self._keys]

    def keys(self): return list(self._keys)


    def apply(self, op:tuple):
        '''Apply one ``(kind, key, arg)`` operation, see :py:func:`oracle_apply`.'''
        kind, key, arg = op
        if kind in (OpKind.INSERT, OpKind.UPDATE):
            return (OpResult.OK, None) if self.insert(key, arg) else (OpResult.UPDATED, None)
        if kind==OpKind.LOOKUP:
            payload = self.lookup(key)
            return (OpResult.NOT_FOUND, None) if payload is None else (OpResult.FOUND, payload)
        if kind==OpKind.REMOVE:
            return (OpResult.REMOVED, None) if self.remove(key) else (OpResult.ABSENT, None)
        if kind==OpKind.SCAN:
            return (OpResult.SCANNED, self.range_scan(key, arg))
        raise TypeError(f'Unknown operation kind "{kind}".')


def oracle_apply(ops, oracle:SortedOracle=None):
    '''Apply operations to a reference map and collect per-operation results.

    Args:
        ops (iterable): ``(kind, key, arg)`` tuples, ``kind`` an :py:class:`~lixbench.common.share.OpKind`;
            ``arg`` is the payload of inserts and the count of scans, ignored otherwise.
        oracle (SortedOracle, optional): Map to apply to. Defaults to a new empty map.

    Returns:
        list: ``(OpResult, value)`` per operation; ``value`` is the payload of a found key,
        the list of pairs of a scan, ``None`` otherwise.
    '''
    if oracle is None: oracle = SortedOracle()
    return [oracle.apply(op) for op in ops]
