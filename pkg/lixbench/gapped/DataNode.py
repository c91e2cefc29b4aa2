'''Gapped data node.

Records sit in a slot array with free slots (gaps) interleaved, at positions predicted by
the node model. Every gap stores a copy of the nearest occupied key on its right (or
:py:data:`~lixbench.common.constants.KEY_SENTINEL` past the last record), so the key
array is non-decreasing and an exponential search around the predicted slot followed by
binary search finds the last slot holding a key ``<= k``: that slot holds ``k`` iff
``k`` is present.

Inserts land in a gap when the predicted region has one; otherwise records shift by one
slot towards the nearest gap. All in-place writes happen under the node lock and keep
the array lengths fixed, so optimistic readers never index out of range.
'''

from bisect import bisect_right
from ..common.LinearModel import LinearModel
from ..common.share import ceil_div
from ..common.constants import (KEY_SENTINEL, DATA_NODE_HEADER, RECORD_BYTES, LOCK_WORD_BYTES)
from ..sync.VersionedLock import VersionedLock


MIN_CAPACITY = 4


def node_bytes(capacity:int):
    '''Allocated bytes of a data node with ``capacity`` slots: header, records, bitmap, lock.'''
    return DATA_NODE_HEADER + capacity*RECORD_BYTES + ceil_div(capacity, 8) + LOCK_WORD_BYTES


def capacity_for(num_keys:int, density:float):
    '''Slots needed to hold ``num_keys`` at ``density``, with at least one gap.'''
    return max(ceil_div(num_keys*1000, round(density*1000)), num_keys+1, MIN_CAPACITY)


class DataNode:
    '''Leaf of the gapped index.'''

    __slots__ = ('model', 'capacity', 'keys', 'payloads', 'occupied', 'num_keys', 'lock', 'obsolete',
                 'next', 'prev', 'parent', 'slot_lo', 'slot_hi', 'shifts_since_smo', 'inserts_since_smo')

    def __init__(self, capacity:int):
        self.model = LinearModel()
        self.capacity = capacity
        self.keys = [KEY_SENTINEL] * capacity
        self.payloads = [None] * capacity
        self.occupied = bytearray(capacity)
        self.num_keys = 0
        self.lock = VersionedLock()
        self.obsolete = False
        self.next = None
        self.prev = None
        self.parent = None # inner node routing to this node, None for a root leaf
        self.slot_lo = 0   # slot range in the parent
        self.slot_hi = 0
        self.shifts_since_smo = 0
        self.inserts_since_smo = 0


    @classmethod
    def build(cls, pairs:list, capacity:int):
        '''Node holding sorted ``pairs`` at model-predicted slots.

        The model is a least-squares fit of ranks scaled to the capacity; a record goes to
        its predicted slot unless that slot is taken by its predecessor or too close to the
        end for the remaining records.
        '''
        node = cls(capacity)
        n = len(pairs)
        if n==0: return node

        node.model = LinearModel.fit([k for k, _ in pairs]).scaled(capacity / n)
        keys, payloads, occupied = node.keys, node.payloads, node.occupied
        last = -1
        for i, (k, p) in enumerate(pairs):
            pos = min(max(node.model.slot(k, capacity), last+1), capacity-(n-i))
            keys[pos], payloads[pos], occupied[pos] = k, p, 1
            last = pos

        nxt = KEY_SENTINEL
        for i in range(capacity-1, -1, -1):
            if occupied[i]:
                nxt = keys[i]
            else:
                keys[i] = nxt
        node.num_keys = n
        return node


    @property
    def density(self): return self.num_keys / self.capacity

    def size_in_bytes(self): return node_bytes(self.capacity)

    def mean_shift(self):
        '''Mean keys shifted per insert since the node was built.'''
        return self.shifts_since_smo / max(self.inserts_since_smo, 1)


    # -----------------------------------------------
    # search
    # -----------------------------------------------
    def search(self, key:int):
        '''Last slot whose key is ``<= key``, ``-1`` if none: exponential search around the
        predicted slot, then binary search inside the bracket.'''
        keys, cap = self.keys, self.capacity
        pos = self.model.slot(key, cap)
        step = 1
        if keys[pos] <= key:
            while pos+step < cap and keys[pos+step] <= key: step <<= 1
            lo, hi = pos + (step>>1), min(pos+step, cap)
        else:
            while pos-step >= 0 and keys[pos-step] > key: step <<= 1
            lo, hi = max(pos-step, 0), pos - (step>>1)
        return bisect_right(keys, key, lo, hi) - 1


    def find(self, key:int):
        '''Slot of ``key``, or ``-1``.'''
        c = self.search(key)
        return c if c>=0 and self.keys[c]==key else -1


    def get(self, key:int):
        c = self.search(key)
        return self.payloads[c] if c>=0 and self.keys[c]==key else None


    def pairs(self):
        keys, payloads, occupied = self.keys, self.payloads, self.occupied
        return [(keys[i], payloads[i]) for i in range(self.capacity) if occupied[i]]


    def collect(self, start:int, count:int):
        '''Up to ``count`` records with key ``>= start``, in order.'''
        keys, payloads, occupied = self.keys, self.payloads, self.occupied
        c = self.search(start)
        i = c if c>=0 and keys[c]==start else c+1
        out = []
        while i < self.capacity and len(out) < count:
            if occupied[i]: out.append((keys[i], payloads[i]))
            i += 1
        return out


    # -----------------------------------------------
    # updates, node lock held
    # -----------------------------------------------
    def insert(self, key:int, payload, c:int):
        '''Insert an absent key given ``c = search(key)``; the node must have a gap.

        Returns:
            int: Number of records shifted.
        '''
        keys, payloads, occupied, cap = self.keys, self.payloads, self.occupied, self.capacity
        u = c + 1 # first slot with a key > key

        # gap run at u: take the predicted slot if it falls inside
        if u < cap and not occupied[u]:
            end = u
            while end+1 < cap and not occupied[end+1]: end += 1
            pos = min(max(self.model.slot(key, cap), u), end)
            keys[pos], payloads[pos], occupied[pos] = key, payload, 1
            for j in range(u, pos): keys[j] = key
            self.num_keys += 1
            return 0

        # shift towards the nearest gap
        right = u
        while right < cap and occupied[right]: right += 1
        left = c
        while left >= 0 and occupied[left]: left -= 1
        use_right = right < cap and (left < 0 or right-u <= c-left)

        if use_right:
            keys[u+1:right+1] = keys[u:right]
            payloads[u+1:right+1] = payloads[u:right]
            occupied[right] = 1
            keys[u], payloads[u] = key, payload
            shifted = right - u
        else:
            keys[left:c] = keys[left+1:c+1]
            payloads[left:c] = payloads[left+1:c+1]
            occupied[left] = 1
            keys[c], payloads[c] = key, payload
            shifted = c - left

        self.num_keys += 1
        return shifted


    def erase(self, pos:int):
        '''Free an occupied slot; gaps on its left take over the next key on the right.'''
        keys, occupied = self.keys, self.occupied
        key = keys[pos]
        nxt = keys[pos+1] if pos+1 < self.capacity else KEY_SENTINEL
        occupied[pos] = 0
        self.payloads[pos] = None
        keys[pos] = nxt
        j = pos - 1
        while j >= 0 and not occupied[j] and keys[j]==key:
            keys[j] = nxt
            j -= 1
        self.num_keys -= 1


    def reclaim(self):
        '''Poison a retired node: any later access fails loudly.'''
        self.keys = self.payloads = self.occupied = None


    # -----------------------------------------------
    # checks
    # -----------------------------------------------
    def check(self):
        '''Whether records are in key order, every gap holds the next key on its right and
        the record count is right.'''
        nxt, count, prev = KEY_SENTINEL, 0, None
        for i in range(self.capacity-1, -1, -1):
            if self.occupied[i]:
                if prev is not None and self.keys[i] >= prev: return False
                prev = nxt = self.keys[i]
                count += 1
            elif self.keys[i]!=nxt:
                return False
        return count==self.num_keys
