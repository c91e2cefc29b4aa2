'''Unified node of the collision-chain index.

Each entry of the node array is empty, holds one record, or holds a child node. The node
model maps a key to exactly one entry; keys colliding on an entry at build time form a
child node, built recursively. Entries are kept as parallel arrays:

* ``kinds``: :py:data:`EMPTY`, :py:data:`DATA` or :py:data:`CHILD` per entry;
* ``keys``/``values``: record key and payload, or ``None`` and the child node;
* ``locks``: one versioned lock word per entry.
'''

import math
from ..common.LinearModel import LinearModel
from ..common.share import ceil_div
from ..common.constants import (CHAIN_NODE_HEADER, RECORD_BYTES, LOCK_WORD_BYTES)
from ..sync.VersionedLock import VersionedLockTable


EMPTY, DATA, CHILD = 0, 1, 2


def node_bytes(size:int):
    '''Header, records or child pointers with lock words, and the two-bit kind map.'''
    return CHAIN_NODE_HEADER + size*(RECORD_BYTES+LOCK_WORD_BYTES) + ceil_div(2*size, 8)


class ChainNode:
    '''Model plus entry array, with insert statistics of its subtree.'''

    __slots__ = ('model', 'size', 'kinds', 'keys', 'values', 'locks',
                 'node_inserts', 'node_conflicts', 'node_size', 'build_size', 'obsolete')

    def __init__(self, model:LinearModel, size:int):
        self.model = model
        self.size = size
        self.kinds = bytearray(size)
        self.keys = [None] * size
        self.values = [None] * size
        self.locks = VersionedLockTable(size)
        self.node_inserts = 0   # inserts through this node since build
        self.node_conflicts = 0 # inserts colliding with a record in this subtree since build
        self.node_size = 0      # keys placed in this subtree: built plus inserted
        self.build_size = 0     # keys at build
        self.obsolete = False


    @classmethod
    def build(cls, pairs:list, density:float=0.5, max_size:int=None, counter:list=None):
        '''Subtree holding sorted ``pairs``.

        Args:
            pairs (list): Sorted unique ``(key, payload)`` pairs.
            density (float): Fill factor, the array length is ``max(2, ceil(n/density))``.
            max_size (int, optional): Upper bound of the array length.
            counter (list, optional): One-element list incremented per node built.

        The model is a least-squares fit of ranks scaled to the array; if it maps all keys
        to one entry, the line through the first and last key is used instead, which sends
        them to the first and the last entry.
        '''
        n = len(pairs)
        floor = 2 if n < 2 else 4 # room to separate two keys under float rounding
        size = max(floor, math.ceil(n / density))
        if max_size: size = max(floor, min(size, max_size))
        keys = [k for k, _ in pairs]

        if n==0:
            model = LinearModel()
        else:
            model = LinearModel.fit(keys).scaled(size / n)
            if n>1 and model.slot(keys[0], size)==model.slot(keys[-1], size):
                model = LinearModel.through(keys[0], keys[-1], size)

        node = cls(model, size)
        node.build_size = node.node_size = n
        if counter is not None: counter[0] += 1

        i = 0
        while i < n:
            slot = model.slot(keys[i], size)
            j = i + 1
            while j < n and model.slot(keys[j], size)==slot: j += 1
            if j - i == 1:
                node.kinds[slot] = DATA
                node.keys[slot], node.values[slot] = pairs[i]
            else:
                node.kinds[slot] = CHILD
                node.values[slot] = cls.build(pairs[i:j], density, max_size, counter)
            i = j
        return node


    def slot(self, key:int):
        return self.model.slot(key, self.size)

    def size_in_bytes(self): return node_bytes(self.size)

    def children(self):
        return [self.values[i] for i in range(self.size) if self.kinds[i]==CHILD]


    def walk(self, out:list):
        '''Append the subtree records to ``out`` in key order.'''
        kinds, keys, values = self.kinds, self.keys, self.values
        for i in range(self.size):
            if kinds[i]==DATA:
                out.append((keys[i], values[i]))
            elif kinds[i]==CHILD:
                values[i].walk(out)
        return out


    def reclaim(self):
        '''Poison a retired node: any later access fails loudly.'''
        self.kinds = self.keys = self.values = None
