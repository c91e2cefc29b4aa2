'''Collision-driven learned index with unified nodes (LIPP design, LIPP+ concurrency).

A lookup computes one entry per node and never searches: an empty entry means absent, a
record entry is compared once, a child entry continues one level down. An insert that
collides with a record replaces it by exactly one new child holding both keys.

Each insert bumps the statistics of every node on its path. When a node has absorbed
at least ``rebuild_insert_ratio`` times its build size in inserts and at least a
``rebuild_conflict_ratio`` share of them collided, the topmost such node's subtree is
rebuilt by the inserting thread.

Concurrency:

* every entry carries a versioned lock word; readers validate the entry they read and
  never lock, writers lock only the entry they modify (no lock coupling);
* a rebuild locks the parent entry pointing to the subtree (or the root lock), then
  every entry of the subtree top-down, swaps in the new subtree and retires the old nodes;
* readers restart from the root when they meet a retired (obsolete) node.
'''

from ..common.BaseIndex import (BaseIndex, IndexException)
from ..common.share import (check_key, is_sorted_unique)
from ..common.constants import (MB, CHAIN_NODE_HEADER, RECORD_BYTES, LOCK_WORD_BYTES)
from ..sync.VersionedLock import Backoff
from ..sync.SharedLock import SharedLock
from ..sync.EpochManager import EpochManager
from .ChainNode import (ChainNode, EMPTY, DATA, CHILD)


class ChainIndex(BaseIndex):
    '''Collision-chain learned index.'''

    name = 'chain'
    family = 'learned'

    def __init__(self, **settings):
        super().__init__(**settings)
        if not 0 < self.settings['density'] <= 1:
            raise ValueError('Expect 0 < density <= 1.')
        self._root = ChainNode.build([], self.settings['density'])
        self._root_lock = SharedLock()
        self._epochs = EpochManager()


    @property
    def default_settings(self):
        '''Default index parameters.'''
        return {
            'density'               : 0.5,     # fill factor of built node arrays
            'rebuild_insert_ratio'  : 2,       # rebuild once inserts reach this multiple of the build size
            'rebuild_conflict_ratio': 0.1,     # ... and this share of the inserts collided
            'rebuild_min_size'      : 64,      # build size floor of the insert condition
            'max_node_bytes'        : 16*MB,   # bounds the node array length
            'retry_limit'           : 64,      # optimistic attempts before a reader locks
        }


    @property
    def root(self): return self._root


    def _max_size(self):
        per_entry = RECORD_BYTES + LOCK_WORD_BYTES + 0.25
        return int((self.settings['max_node_bytes'] - CHAIN_NODE_HEADER) / per_entry)


    def _build(self, pairs:list):
        counter = [0]
        node = ChainNode.build(pairs, self.settings['density'], self._max_size(), counter)
        return node, counter[0]


    def bulk_load(self, pairs:list):
        '''Build the index from sorted unique ``(key, payload)`` pairs.'''
        if not pairs:
            raise IndexException('Bulk load of an empty input.')
        pairs = list(pairs)
        if not is_sorted_unique(pairs):
            raise ValueError('Bulk load input must be sorted by key without duplicates.')
        for k, _ in (pairs[0], pairs[-1]): check_key(k)

        root, _ = self._build(pairs)
        with self._root_lock.write():
            self._root = root
        return self


    # -----------------------------------------------
    # entry access
    # -----------------------------------------------
    @staticmethod
    def _read_entry(node:ChainNode, slot:int):
        '''Consistent ``(kind, key, value)`` of an entry, or ``None`` if the node is obsolete.'''
        backoff = Backoff()
        locks = node.locks
        while True:
            version = locks.read_begin(slot)
            if version is None:
                backoff.pause()
                continue
            if node.obsolete: return None
            entry = (node.kinds[slot], node.keys[slot], node.values[slot])
            if locks.validate(slot, version): return entry


    def _lock_entry(self, key:int, path:list):
        '''Descend to the entry of ``key`` that is not a child and lock it.

        Args:
            key (int): Target key.
            path (list): Filled with ``(node, slot)`` of every visited entry, the locked one last.

        Returns:
            tuple: Locked ``(node, slot)``.
        '''
        while True:
            path.clear()
            node = self._root
            while True:
                slot = node.slot(key)
                entry = self._read_entry(node, slot)
                if entry is None: break # obsolete: restart
                if entry[0]==CHILD:
                    path.append((node, slot))
                    node = entry[2]
                    continue

                node.locks.lock(slot)
                if node.obsolete:
                    node.locks.unlock(slot)
                    break
                if node.kinds[slot]==CHILD: # changed since read
                    node.locks.unlock(slot)
                    continue
                path.append((node, slot))
                return node, slot


    # -----------------------------------------------
    # operations
    # -----------------------------------------------
    def lookup(self, key:int):
        self.stats.lookups += 1
        with self._epochs.pinned():
            for _ in range(self.settings['retry_limit']):
                node, hops = self._root, 1
                while True:
                    slot = node.slot(key)
                    entry = self._read_entry(node, slot)
                    if entry is None: break
                    kind, k, value = entry
                    if kind==CHILD:
                        node = value
                        hops += 1
                        continue
                    self.stats.nodes_traversed += hops
                    if kind==EMPTY: return None
                    self.stats.key_comparisons += 1
                    return value if k==key else None

            # pessimistic fallback
            path = []
            node, slot = self._lock_entry(key, path)
            self.stats.nodes_traversed += len(path)
            kind, k, value = node.kinds[slot], node.keys[slot], node.values[slot]
            node.locks.unlock(slot)
            if kind==DATA: self.stats.key_comparisons += 1
            return value if kind==DATA and k==key else None


    def insert(self, key:int, payload:int):
        check_key(key)
        self.stats.inserts += 1
        with self._epochs.pinned():
            t0 = self._clock()
            path = []
            node, slot = self._lock_entry(key, path)
            self.stats.nodes_traversed += len(path)
            t1 = self._clock()
            self.stats.search_ns += t1 - t0

            kind = node.kinds[slot]
            if kind==DATA and node.keys[slot]==key:
                node.values[slot] = payload
                node.locks.unlock(slot)
                self.stats.write_ns += self._clock() - t1
                return False

            conflict = kind==DATA
            if conflict:
                pairs = sorted([(node.keys[slot], node.values[slot]), (key, payload)])
                child, _ = self._build(pairs)
                node.keys[slot], node.values[slot] = None, child
                node.kinds[slot] = CHILD
                self.stats.nodes_created += 1
            else:
                node.keys[slot], node.values[slot] = key, payload
                node.kinds[slot] = DATA
            node.locks.unlock(slot)

            # path statistics, relaxed
            for n, _ in path:
                n.node_inserts += 1
                n.node_size += 1
                if conflict: n.node_conflicts += 1
            t2 = self._clock()
            self.stats.write_ns += t2 - t1

            self._maybe_rebuild(path)
            self.stats.smo_ns += self._clock() - t2
            return True


    def remove(self, key:int):
        self.stats.removes += 1
        with self._epochs.pinned():
            path = []
            node, slot = self._lock_entry(key, path)
            found = node.kinds[slot]==DATA and node.keys[slot]==key
            if found:
                node.kinds[slot] = EMPTY
                node.keys[slot] = node.values[slot] = None
            node.locks.unlock(slot)
            return found


    def range_scan(self, start:int, count:int):
        self.stats.scans += 1
        out = []
        if count <= 0: return out
        with self._epochs.pinned():
            while len(out) < count:
                if self._scan(self._root, start, count, out): break
                if out: start = out[-1][0] + 1 # restart past the records already taken
        return out


    def _scan(self, node:ChainNode, start:int, count:int, out:list):
        '''In-order walk from the entry of ``start``; ``False`` if a retired node was met.'''
        for slot in range(node.slot(start), node.size):
            entry = self._read_entry(node, slot)
            if entry is None: return False
            kind, k, value = entry
            if kind==DATA and k >= start:
                out.append((k, value))
            elif kind==CHILD:
                if not self._scan(value, start, count, out): return False
            if len(out) >= count:
                del out[count:]
                return True
        return True


    def size_in_bytes(self):
        with self._epochs.pinned():
            total, stack = 0, [self._root]
            while stack:
                node = stack.pop()
                total += node.size_in_bytes()
                stack.extend(node.children())
        return total


    # -----------------------------------------------
    # subtree rebuild
    # -----------------------------------------------
    def _needs_rebuild(self, node:ChainNode):
        s = self.settings
        inserts = node.node_inserts
        return inserts >= s['rebuild_insert_ratio'] * max(node.build_size, s['rebuild_min_size']) and \
            node.node_conflicts >= s['rebuild_conflict_ratio'] * inserts


    def _maybe_rebuild(self, path:list):
        '''Rebuild the topmost subtree on the insert path meeting both thresholds.'''
        for i, (node, _) in enumerate(path):
            if not self._needs_rebuild(node): continue
            parent, parent_slot = path[i-1] if i > 0 else (None, None)
            self._rebuild(node, parent, parent_slot)
            return


    def _rebuild(self, node:ChainNode, parent:ChainNode, parent_slot:int):
        # the parent entry, or the root lock, guards the subtree reference
        if parent is None:
            self._root_lock.acquire_write()
            valid = self._root is node
        else:
            parent.locks.lock(parent_slot)
            valid = not parent.obsolete and parent.kinds[parent_slot]==CHILD and \
                parent.values[parent_slot] is node

        try:
            if not valid or node.obsolete: return

            # lock the whole subtree top-down
            locked, stack = [], [node]
            while stack:
                n = stack.pop()
                for i in range(n.size):
                    n.locks.lock(i)
                    if n.kinds[i]==CHILD: stack.append(n.values[i])
                locked.append(n)

            pairs = node.walk([])
            new, built = self._build(pairs)
            if parent is None:
                self._root = new
            else:
                parent.values[parent_slot] = new

            for n in locked:
                n.obsolete = True
                for i in range(n.size): n.locks.unlock(i)
            for n in locked:
                self._epochs.retire(n, ChainNode.reclaim)

            self.stats.smo_count += 1
            self.stats.retrain_count += built

        finally:
            if parent is None:
                self._root_lock.release_write()
            else:
                parent.locks.unlock(parent_slot)


    # -----------------------------------------------
    # checks
    # -----------------------------------------------
    def nodes(self):
        '''All nodes, parents before children. Single-threaded use only.'''
        out, stack = [], [self._root]
        while stack:
            node = stack.pop()
            out.append(node)
            stack.extend(reversed(node.children()))
        return out


    def check(self):
        '''Whether the in-order walk is strictly increasing and every record sits in the
        entry its node model computes. Single-threaded use only.'''
        for node in self.nodes():
            for i in range(node.size):
                if node.kinds[i]==DATA and node.slot(node.keys[i])!=i: return False
        items = self._root.walk([])
        return all(a[0] < b[0] for a, b in zip(items, items[1:]))


    def depth(self):
        '''Height of the node tree.'''
        height, stack = 0, [(self._root, 1)]
        while stack:
            node, d = stack.pop()
            height = max(height, d)
            stack.extend((c, d+1) for c in node.children())
        return height
