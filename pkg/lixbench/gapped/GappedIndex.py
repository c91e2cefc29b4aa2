'''Updatable learned index with gapped data nodes (ALEX design, ALEX+ concurrency).

Structure:

* Inner nodes route a key by model computation only, see :py:class:`~lixbench.gapped.InnerNode.InnerNode`.
* Data nodes are gapped arrays searched exponentially around the predicted slot, see
  :py:class:`~lixbench.gapped.DataNode.DataNode`; they are doubly linked in key order.

Structure modification operations (SMO) run when an insert would push a node past the
maximum density:

* expand: rebuild the node at the average density;
* split: two nodes sharing the node's slot range in the parent ("split sideways"); if
  the keys share one parent slot, the parent's child array is doubled first, up to the
  fanout limit, after which a new two-way inner node takes the node's place ("split down");
* contract (optional): rebuild a node that drops below the minimum density after removes.

A node is split instead of expanded when the expanded node would exceed the data-node
byte cap or when inserts shifted more records on average than a threshold since the last
SMO. Every SMO is out-of-place: replacement nodes are built aside and published by slot
stores in the parent.

``nodes_traversed`` counts the inner nodes a lookup or insert passes through (1 when the
root is a data node), so a tree of one inner level reports 1 per operation.

Concurrency:

* traversal takes no lock;
* readers validate the data node's versioned lock and restart on conflict or on an
  obsolete (replaced) node, falling back to locking after a bounded number of retries;
* writers lock the data node; an SMO additionally locks the left neighbour (to relink
  the leaf chain) and then the parent exclusively, i.e. locks are taken right to left
  among leaves, then upwards; the replacement is built under the parent lock, which
  also guards the slot ranges of the parent's children;
* replaced nodes are retired into the epoch manager and poisoned once unreachable.

Bulk loading partitions keys along the boundaries of an optimal PLA, snapped to the
slots of each inner node model. ALEX's fanout-tree cost model is not reproduced.
'''

import math
from bisect import bisect_left, bisect_right, insort
from ..common.BaseIndex import (BaseIndex, IndexException)
from ..common.LinearModel import LinearModel
from ..common.share import (check_key, is_sorted_unique)
from ..common.constants import (KB, MB, RECORD_BYTES, INNER_NODE_HEADER, POINTER_BYTES)
from ..pla.Segmentation import segment_starts
from ..sync.VersionedLock import Backoff
from ..sync.SharedLock import SharedLock
from ..sync.EpochManager import EpochManager
from .DataNode import (DataNode, capacity_for, node_bytes)
from .InnerNode import InnerNode


class GappedIndex(BaseIndex):
    '''Gapped-array learned index.'''

    name = 'gapped'
    family = 'learned'

    def __init__(self, **settings):
        super().__init__(**settings)
        s = self.settings
        if not 0 < s['min_density'] <= s['avg_density'] <= s['max_density'] < 1:
            raise ValueError('Expect 0 < min_density <= avg_density <= max_density < 1.')
        self._root = DataNode.build([], capacity_for(0, s['avg_density']))
        self._root_lock = SharedLock()
        self._epochs = EpochManager()


    @property
    def default_settings(self):
        '''Default index parameters.'''
        return {
            'min_density'          : 0.6,       # contract a data node below this fill factor
            'avg_density'          : 0.7,       # fill factor of built and rebuilt data nodes
            'max_density'          : 0.8,       # expand or split a data node above this fill factor
            'max_data_node_bytes'  : 512*KB,    # split instead of expand beyond this size
            'max_inner_node_bytes' : 16*MB,     # bounds the inner node fanout
            'max_fanout'           : 2**14,     # power-of-two bound of inner node fanout
            'split_shift_threshold': 32,        # split if mean keys shifted per insert exceeds this value
            'min_split_keys'       : 64,        # never split nodes smaller than this on the shift signal
            'retry_limit'          : 64,        # optimistic attempts before a reader locks
            'allow_contraction'    : True,      # contract sparse data nodes after removes
            'bulk_node_keys'       : 1024,      # target keys per bulk-loaded data node
        }


    @property
    def root(self): return self._root


    # -----------------------------------------------
    # bulk load
    # -----------------------------------------------
    def bulk_load(self, pairs:list):
        '''Build the index from sorted unique ``(key, payload)`` pairs.'''
        if not pairs:
            raise IndexException('Bulk load of an empty input.')
        pairs = list(pairs)
        if not is_sorted_unique(pairs):
            raise ValueError('Bulk load input must be sorted by key without duplicates.')
        for k, _ in (pairs[0], pairs[-1]): check_key(k)

        keys = [k for k, _ in pairs]
        epsilon = max(4, self.settings['bulk_node_keys'] // 16)
        starts = segment_starts(keys, epsilon)
        leaves = []
        root = self._build(pairs, keys, starts, 0, len(pairs), leaves)
        for left, right in zip(leaves, leaves[1:]):
            left.next, right.prev = right, left

        with self._root_lock.write():
            self._root = root
        return self


    def _max_node_keys(self):
        s = self.settings
        cap = (s['max_data_node_bytes'] - node_bytes(0)) * 8 // (8*RECORD_BYTES + 1)
        return max(int(cap * s['avg_density']), 1)


    def _fanout_limit(self):
        s = self.settings
        by_bytes = (s['max_inner_node_bytes'] - INNER_NODE_HEADER) // POINTER_BYTES
        return max(2, 1 << int(math.log2(max(2, min(s['max_fanout'], by_bytes)))))


    def _build(self, pairs:list, keys:list, starts:list, i0:int, i1:int, leaves:list):
        '''Subtree over ``pairs[i0:i1]``; ``starts`` are the PLA segment start ranks.
        Data nodes are appended to ``leaves`` in key order.'''
        s = self.settings
        n = i1 - i0
        target = min(s['bulk_node_keys'], self._max_node_keys())
        if n <= target:
            node = DataNode.build(pairs[i0:i1], capacity_for(n, s['avg_density']))
            leaves.append(node)
            return node

        # fanout: enough slots for every PLA segment and every target-sized node
        n_segments = bisect_left(starts, i1) - bisect_left(starts, i0)
        desired = max(n_segments, math.ceil(n / target)) * 2
        fanout = min(1 << max(1, math.ceil(math.log2(desired))), self._fanout_limit())
        model = LinearModel.spanning(keys[i0], keys[i1-1]+1, fanout)
        inner = InnerNode(model, [None]*fanout)

        # runs of keys sharing a slot, grouped into children cut at PLA boundaries
        groups, i = [], i0
        while i < i1:
            slot = model.slot(keys[i], fanout)
            j = i + 1
            while j < i1 and model.slot(keys[j], fanout)==slot: j += 1
            if groups:
                g = groups[-1]
                size = g[2] - g[1]
                new_segment = bisect_right(starts, i) - bisect_right(starts, g[1]) > 0
                if size + (j-i) <= target and not (new_segment and size >= target // 4):
                    g[2] = j
                    i = j
                    continue
            groups.append([slot, i, j])
            i = j

        for idx, (slot, g0, g1) in enumerate(groups):
            slot_hi = groups[idx+1][0]-1 if idx+1 < len(groups) else fanout-1
            child = self._build(pairs, keys, starts, g0, g1, leaves)
            if isinstance(child, DataNode):
                child.parent, child.slot_lo, child.slot_hi = inner, slot, slot_hi
            for k in range(slot, slot_hi+1): inner.children[k] = child

        return inner


    # -----------------------------------------------
    # traversal
    # -----------------------------------------------
    def _leaf(self, key:int):
        '''Data node routed to by ``key`` and the number of nodes traversed to reach it:
        the inner nodes on the path, or 1 when the root is a data node.'''
        node, hops = self._root, 0
        while isinstance(node, InnerNode):
            node = node.child(key)
            hops += 1
        return node, max(hops, 1)


    def _read(self, key:int, read):
        '''Run ``read(node)`` on the data node of ``key`` under optimistic validation.'''
        backoff = Backoff()
        for _ in range(self.settings['retry_limit']):
            node, depth = self._leaf(key)
            version = node.lock.read_begin()
            if version is None:
                backoff.pause()
                continue
            if node.obsolete: continue
            result = read(node)
            if node.lock.validate(version):
                self.stats.nodes_traversed += depth
                return result

        # pessimistic fallback
        while True:
            node, depth = self._leaf(key)
            with node.lock:
                if not node.obsolete:
                    self.stats.nodes_traversed += depth
                    return read(node)


    def _lock_leaf(self, key:int):
        '''Locked, current data node of ``key`` and the number of nodes visited.'''
        while True:
            node, depth = self._leaf(key)
            node.lock.lock()
            if not node.obsolete: return node, depth
            node.lock.unlock()


    # -----------------------------------------------
    # operations
    # -----------------------------------------------
    def lookup(self, key:int):
        self.stats.lookups += 1
        with self._epochs.pinned():
            return self._read(key, lambda node: node.get(key))


    def insert(self, key:int, payload:int):
        check_key(key)
        self.stats.inserts += 1
        with self._epochs.pinned():
            t0 = self._clock()
            node, depth = self._lock_leaf(key)
            self.stats.nodes_traversed += depth
            c = node.search(key)
            t1 = self._clock()
            self.stats.search_ns += t1 - t0

            if c>=0 and node.keys[c]==key:
                node.payloads[c] = payload
                node.lock.unlock()
                self.stats.write_ns += self._clock() - t1
                return False

            if node.num_keys+1 > self.settings['max_density']*node.capacity:
                self._smo(node, key, payload)
                self.stats.smo_ns += self._clock() - t1
                return True

            shifted = node.insert(key, payload, c)
            node.shifts_since_smo += shifted
            node.inserts_since_smo += 1
            self.stats.keys_shifted += shifted
            node.lock.unlock()
            self.stats.write_ns += self._clock() - t1
            return True


    def remove(self, key:int):
        self.stats.removes += 1
        with self._epochs.pinned():
            node, _ = self._lock_leaf(key)
            pos = node.find(key)
            if pos < 0:
                node.lock.unlock()
                return False

            node.erase(pos)
            s = self.settings
            if s['allow_contraction'] and node.num_keys < s['min_density']*node.capacity \
                and capacity_for(node.num_keys, s['avg_density']) < node.capacity:
                new = DataNode.build(node.pairs(), capacity_for(node.num_keys, s['avg_density']))
                self.stats.smo_count += 1
                self.stats.retrain_count += 1
                self._replace(node, lambda: [new])
            else:
                node.lock.unlock()
            return True


    def range_scan(self, start:int, count:int):
        self.stats.scans += 1
        out = []
        if count <= 0: return out
        with self._epochs.pinned():
            node, backoff = None, Backoff()
            while len(out) < count:
                if node is None or node.obsolete:
                    node, _ = self._leaf(start)
                version = node.lock.read_begin()
                if version is None:
                    backoff.pause()
                    continue
                if node.obsolete: continue
                batch = node.collect(start, count-len(out))
                nxt = node.next
                if not node.lock.validate(version): continue

                out.extend(batch)
                if batch: start = batch[-1][0] + 1
                if nxt is None: break
                node = nxt
        return out


    def size_in_bytes(self):
        with self._epochs.pinned():
            total, seen, stack = 0, set(), [self._root]
            while stack:
                node = stack.pop()
                if id(node) in seen: continue
                seen.add(id(node))
                total += node.size_in_bytes()
                if isinstance(node, InnerNode): stack.extend(node.children)
        return total


    # -----------------------------------------------
    # structure modification
    # -----------------------------------------------
    def _smo(self, node:DataNode, key:int, payload:int):
        '''Expand or split a full, locked node while inserting ``(key, payload)``.'''
        s = self.settings
        pairs = node.pairs()
        insort(pairs, (key, payload))
        n = len(pairs)
        cap = capacity_for(n, s['avg_density'])

        split = node_bytes(cap) > s['max_data_node_bytes'] or \
            (n >= s['min_split_keys'] and node.mean_shift() > s['split_shift_threshold'])
        self.stats.smo_count += 1

        if split:
            new = self._replace(node, lambda: self._split(node, pairs))
        else:
            new = self._replace(node, lambda: [DataNode.build(pairs, cap)])

        built = len(new) if isinstance(new, list) else 2
        self.stats.retrain_count += built
        self.stats.nodes_created += built


    def _split(self, node:DataNode, pairs:list):
        '''Two nodes sharing the node's slot range in the parent. While all keys fall into
        one parent slot, the parent's child array is doubled first; once the parent is at
        its fanout limit, a two-way inner node takes the node's place ("split down").

        Runs under the parent's exclusive lock.
        '''
        density = self.settings['avg_density']
        parent = node.parent
        if parent is not None:
            limit = self._fanout_limit()
            slots = [parent.slot(k) for k, _ in pairs]
            while slots[0]==slots[-1] and parent.fanout*2 <= limit:
                self._double(parent)
                slots = [parent.slot(k) for k, _ in pairs]

            if slots[0]!=slots[-1]:
                distinct = sorted(set(slots))
                half = len(pairs) / 2
                cut = min(distinct[1:], key=lambda b: abs(bisect_left(slots, b) - half))
                i = bisect_left(slots, cut)
                left = DataNode.build(pairs[:i], capacity_for(i, density))
                right = DataNode.build(pairs[i:], capacity_for(len(pairs)-i, density))
                left.parent = right.parent = parent
                left.slot_lo, left.slot_hi = node.slot_lo, cut-1
                right.slot_lo, right.slot_hi = cut, node.slot_hi
                return [left, right]

        # split down
        model = LinearModel.spanning(pairs[0][0], pairs[-1][0]+1, 2)
        i = sum(1 for k, _ in pairs if model.slot(k, 2)==0)
        left = DataNode.build(pairs[:i], capacity_for(i, density))
        right = DataNode.build(pairs[i:], capacity_for(len(pairs)-i, density))
        inner = InnerNode(model, [left, right])
        left.parent = right.parent = inner
        left.slot_lo = left.slot_hi = 0
        right.slot_lo = right.slot_hi = 1
        return inner


    def _double(self, inner:InnerNode):
        '''Double the child array of a locked inner node; data node children keep their keys
        over twice as many slots.'''
        for child in {id(c): c for c in inner.children if isinstance(c, DataNode)}.values():
            child.slot_lo, child.slot_hi = 2*child.slot_lo, 2*child.slot_hi + 1
        inner.doubled()
        self.stats.smo_count += 1


    def _replace(self, node:DataNode, build):
        '''Publish the replacement of a locked node, retire the node and release its lock.

        ``build()`` returns replacement leaves (a list) or a subtree (an inner node). It runs
        under the parent's exclusive lock, where the slot ranges of the parent's children
        are stable.

        Returns:
            The replacement.
        '''
        # left neighbour guards the links to this node
        while True:
            left = node.prev
            if left is None: break
            left.lock.lock()
            if not left.obsolete and node.prev is left: break
            left.lock.unlock()

        parent = node.parent
        parent_lock = parent.lock if parent is not None else self._root_lock
        with parent_lock.write():
            new = build()
            leaves = new if isinstance(new, list) else new.children
            if isinstance(new, list) and len(new)==1:
                new[0].parent, new[0].slot_lo, new[0].slot_hi = parent, node.slot_lo, node.slot_hi
            first, last = leaves[0], leaves[-1]
            for a, b in zip(leaves, leaves[1:]): a.next, b.prev = b, a

            first.prev, last.next = left, node.next
            if node.next is not None: node.next.prev = last
            if left is not None: left.next = first

            if parent is None:
                self._root = new if isinstance(new, InnerNode) else first
            elif isinstance(new, InnerNode):
                for k in range(node.slot_lo, node.slot_hi+1): parent.children[k] = new
            else:
                for leaf in leaves:
                    for k in range(leaf.slot_lo, leaf.slot_hi+1): parent.children[k] = leaf
            node.obsolete = True

        if left is not None: left.lock.unlock()
        node.lock.unlock()
        self._epochs.retire(node, DataNode.reclaim)
        return new


    # -----------------------------------------------
    # checks
    # -----------------------------------------------
    def leaves(self):
        '''Data nodes in key order, following the leaf links.'''
        node = self._root
        while isinstance(node, InnerNode): node = node.children[0]
        out = []
        while node is not None:
            out.append(node)
            node = node.next
        return out


    def check(self):
        '''Whether every data node is consistent and keys increase along the leaf chain.
        Single-threaded use only.'''
        prev = None
        for leaf in self.leaves():
            if not leaf.check(): return False
            for k, _ in leaf.pairs():
                if prev is not None and k <= prev: return False
                prev = k
        return True
