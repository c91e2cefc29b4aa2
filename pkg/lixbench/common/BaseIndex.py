'''Ordered-index contract shared by the learned indexes and the B+-tree baseline.

Every index maps unique 64-bit keys to 64-bit payloads with set semantics:

* ``insert`` of a present key overwrites its payload and returns ``False``;
* ``remove`` of an absent key returns ``False``;
* ``range_scan(start, count)`` returns the ``count`` smallest keys ``>= start`` in order.

After any sequence of operations the observable mapping equals the one of
:py:class:`~lixbench.common.Oracle.SortedOracle` replaying the same sequence.
'''

import sys
from abc import ABC, abstractmethod
from time import perf_counter_ns
from .Counters import Counters
from .share import OpKind, OpResult


class BaseIndex(ABC):
    '''Base class of ordered indexes.'''

    # name used by the index factory and in reports
    name = 'base'

    # ``learned`` or ``traditional``: heatmap winner family
    family = 'traditional'

    # time insert phases into the ``*_ns`` counters; costs clock reads on every insert
    timed = False

    def __init__(self, **settings):
        '''Create an empty index.

        Args:
            settings (dict): Parameters updating :py:attr:`default_settings`.
        '''
        self.settings = self.default_settings
        unknown = set(settings) - set(self.settings)
        if unknown:
            raise ValueError(f'Unknown settings for {self.name}: {", ".join(sorted(unknown))}.')
        self.settings.update(settings)
        self.stats = Counters()


    @property
    def default_settings(self):
        '''Default parameters.'''
        return {}


    # -----------------------------------------------
    # contract
    # -----------------------------------------------
    @abstractmethod
    def bulk_load(self, pairs:list):
        '''Build the index from sorted unique ``(key, payload)`` pairs and return ``self``.'''

    @abstractmethod
    def lookup(self, key:int):
        '''Payload of ``key``, or ``None`` if absent.'''

    @abstractmethod
    def insert(self, key:int, payload:int):
        '''Insert or overwrite; ``True`` if the key is new.'''

    @abstractmethod
    def remove(self, key:int):
        '''Remove ``key``; ``True`` if it was present.'''

    @abstractmethod
    def range_scan(self, start:int, count:int):
        '''Up to ``count`` ``(key, payload)`` pairs with key ``>= start``, ascending.'''

    @abstractmethod
    def size_in_bytes(self):
        '''End-to-end allocated bytes of all nodes.'''

    def op_stats(self):
        '''Snapshot of the operation counters.'''
        return self.stats.snapshot()


    # -----------------------------------------------
    # helpers
    # -----------------------------------------------
    def _clock(self):
        '''Nanosecond clock of the insert phase timers, 0 unless :py:attr:`timed`.'''
        return perf_counter_ns() if self.timed else 0


    def items(self):
        '''All ``(key, payload)`` pairs in key order.'''
        return self.range_scan(0, sys.maxsize)


    def apply(self, op:tuple):
        '''Apply one ``(kind, key, arg)`` operation and encode the result like
        :py:func:`~lixbench.common.Oracle.oracle_apply`. ``arg`` is the payload for
        inserts/updates and the count for scans.'''
        kind, key, arg = op
        if kind in (OpKind.INSERT, OpKind.UPDATE):
            return (OpResult.OK, None) if self.insert(key, arg) else (OpResult.UPDATED, None)
        if kind==OpKind.LOOKUP:
            payload = self.lookup(key)
            return (OpResult.NOT_FOUND, None) if payload is None else (OpResult.FOUND, payload)
        if kind==OpKind.REMOVE:
            return (OpResult.REMOVED, None) if self.remove(key) else (OpResult.ABSENT, None)
        if kind==OpKind.SCAN:
            return (OpResult.SCANNED, list(self.range_scan(key, arg)))
        raise TypeError(f'Unknown operation kind "{kind}".')


class IndexException(Exception):
    pass
