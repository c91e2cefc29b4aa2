'''Textbook B+-tree: the traditional index baseline and a second reference map.

Binary search inside nodes, side-linked leaves for scans, and a single shared-exclusive
lock over the whole tree: thread-safe, not scalable.
'''

from bisect import bisect_left, bisect_right
from ..common.BaseIndex import (BaseIndex, IndexException)
from ..common.share import (check_key, is_sorted_unique, ceil_div)
from ..common.constants import (BTREE_NODE_HEADER, KEY_BYTES, PAYLOAD_BYTES, POINTER_BYTES)
from ..sync.SharedLock import SharedLock


class Leaf:
    __slots__ = ('keys', 'values', 'next', 'prev')

    def __init__(self, keys=None, values=None):
        self.keys = keys or []
        self.values = values or []
        self.next = None
        self.prev = None


class Inner:
    '''``children[i]`` holds the keys in ``[keys[i-1], keys[i])``.'''
    __slots__ = ('keys', 'children')

    def __init__(self, keys=None, children=None):
        self.keys = keys or []
        self.children = children or []


def _chunks(items:list, max_size:int):
    '''Split ``items`` into the fewest chunks of at most ``max_size``, sizes differing by at most one.'''
    n = len(items)
    count = max(ceil_div(n, max_size), 1)
    q, r = divmod(n, count)
    out, i = [], 0
    for c in range(count):
        j = i + q + (1 if c < r else 0)
        out.append(items[i:j])
        i = j
    return out


class BPlusTree(BaseIndex):
    '''B+-tree with configurable fanout.'''

    name = 'btree'
    family = 'traditional'

    def __init__(self, **settings):
        super().__init__(**settings)
        if self.settings['fanout'] < 4:
            raise ValueError('Expect fanout >= 4.')
        self._root = Leaf()
        self._lock = SharedLock()
        self._t_phase, self._t_split = 0, None # insert phase clocks, guarded by the write lock


    @property
    def default_settings(self):
        '''Default tree parameters.'''
        return {
            'fanout': 64    # max keys per leaf, max children per inner node
        }

    @property
    def fanout(self): return self.settings['fanout']

    @property
    def root(self): return self._root


    # -----------------------------------------------
    # bulk load
    # -----------------------------------------------
    def bulk_load(self, pairs:list):
        '''Build the tree bottom-up from sorted unique ``(key, payload)`` pairs.'''
        if not pairs:
            raise IndexException('Bulk load of an empty input.')
        pairs = list(pairs)
        if not is_sorted_unique(pairs):
            raise ValueError('Bulk load input must be sorted by key without duplicates.')
        for k, _ in (pairs[0], pairs[-1]): check_key(k)

        level = [Leaf([k for k, _ in c], [v for _, v in c]) for c in _chunks(pairs, self.fanout)]
        for a, b in zip(level, level[1:]): a.next, b.prev = b, a
        firsts = [leaf.keys[0] for leaf in level]

        while len(level) > 1:
            groups = _chunks(list(zip(firsts, level)), self.fanout)
            level = [Inner([k for k, _ in g[1:]], [n for _, n in g]) for g in groups]
            firsts = [g[0][0] for g in groups]

        with self._lock.write():
            self._root = level[0]
        return self


    # -----------------------------------------------
    # operations
    # -----------------------------------------------
    def _leaf(self, key:int):
        node, depth = self._root, 1
        while isinstance(node, Inner):
            node = node.children[bisect_right(node.keys, key)]
            depth += 1
        return node, depth


    def lookup(self, key:int):
        self.stats.lookups += 1
        with self._lock.read():
            leaf, depth = self._leaf(key)
            self.stats.nodes_traversed += depth
            i = bisect_left(leaf.keys, key)
            return leaf.values[i] if i < len(leaf.keys) and leaf.keys[i]==key else None


    def insert(self, key:int, payload:int):
        check_key(key)
        self.stats.inserts += 1
        with self._lock.write():
            self._t_phase = self._clock()
            self._t_split = None # start of node splits
            new, split = self._insert(self._root, key, payload, 1)
            if split:
                sep, right = split
                self._root = Inner([sep], [self._root, right])
                self.stats.nodes_created += 1
            if self._t_split is not None: self.stats.smo_ns += self._clock() - self._t_split
            return new


    def _insert(self, node, key:int, payload:int, depth:int):
        '''Insert below ``node``; returns ``(new, split)``, ``split`` being ``(separator, right)``
        when ``node`` overflowed.'''
        if isinstance(node, Leaf):
            self.stats.nodes_traversed += depth
            i = bisect_left(node.keys, key)
            t1 = self._clock()
            self.stats.search_ns += t1 - self._t_phase
            if i < len(node.keys) and node.keys[i]==key:
                node.values[i] = payload
                self.stats.write_ns += self._clock() - t1
                return False, None
            node.keys.insert(i, key)
            node.values.insert(i, payload)
            self.stats.keys_shifted += len(node.keys) - 1 - i
            t2 = self._clock()
            self.stats.write_ns += t2 - t1
            if len(node.keys) <= self.fanout: return True, None

            self._t_split = t2
            mid = len(node.keys) // 2
            right = Leaf(node.keys[mid:], node.values[mid:])
            del node.keys[mid:], node.values[mid:]
            right.next, right.prev = node.next, node
            if node.next is not None: node.next.prev = right
            node.next = right
            self.stats.smo_count += 1
            self.stats.nodes_created += 1
            return True, (right.keys[0], right)

        i = bisect_right(node.keys, key)
        new, split = self._insert(node.children[i], key, payload, depth+1)
        if split:
            sep, child = split
            node.keys.insert(i, sep)
            node.children.insert(i+1, child)
            if len(node.children) > self.fanout:
                mid = len(node.children) // 2
                up = node.keys[mid-1]
                right = Inner(node.keys[mid:], node.children[mid:])
                del node.keys[mid-1:], node.children[mid:]
                self.stats.smo_count += 1
                self.stats.nodes_created += 1
                return new, (up, right)
        return new, None


    def remove(self, key:int):
        self.stats.removes += 1
        with self._lock.write():
            found = self._remove(self._root, key)
            root = self._root
            if isinstance(root, Inner) and len(root.children)==1:
                self._root = root.children[0]
            return found


    def _remove(self, node, key:int):
        if isinstance(node, Leaf):
            i = bisect_left(node.keys, key)
            if i==len(node.keys) or node.keys[i]!=key: return False
            del node.keys[i], node.values[i]
            return True

        i = bisect_right(node.keys, key)
        child = node.children[i]
        found = self._remove(child, key)
        if found and self._underflow(child): self._rebalance(node, i)
        return found


    def _underflow(self, node):
        if isinstance(node, Leaf): return len(node.keys) < self.fanout // 2
        return len(node.children) < ceil_div(self.fanout, 2)


    def _rebalance(self, parent:Inner, i:int):
        '''Refill the underflowing child ``i`` from a sibling, or merge it with one.'''
        child = parent.children[i]
        left = parent.children[i-1] if i > 0 else None
        right = parent.children[i+1] if i+1 < len(parent.children) else None
        self.stats.smo_count += 1

        if isinstance(child, Leaf):
            if left is not None and len(left.keys) > self.fanout // 2:
                child.keys.insert(0, left.keys.pop())
                child.values.insert(0, left.values.pop())
                parent.keys[i-1] = child.keys[0]
            elif right is not None and len(right.keys) > self.fanout // 2:
                child.keys.append(right.keys.pop(0))
                child.values.append(right.values.pop(0))
                parent.keys[i] = right.keys[0]
            else:
                a, b, k = (left, child, i-1) if left is not None else (child, right, i)
                a.keys.extend(b.keys)
                a.values.extend(b.values)
                a.next = b.next
                if b.next is not None: b.next.prev = a
                del parent.keys[k], parent.children[k+1]
            return

        half = ceil_div(self.fanout, 2)
        if left is not None and len(left.children) > half:
            child.keys.insert(0, parent.keys[i-1])
            child.children.insert(0, left.children.pop())
            parent.keys[i-1] = left.keys.pop()
        elif right is not None and len(right.children) > half:
            child.keys.append(parent.keys[i])
            child.children.append(right.children.pop(0))
            parent.keys[i] = right.keys.pop(0)
        else:
            a, b, k = (left, child, i-1) if left is not None else (child, right, i)
            a.keys.append(parent.keys[k])
            a.keys.extend(b.keys)
            a.children.extend(b.children)
            del parent.keys[k], parent.children[k+1]


    def range_scan(self, start:int, count:int):
        self.stats.scans += 1
        out = []
        if count <= 0: return out
        with self._lock.read():
            leaf, _ = self._leaf(start)
            i = bisect_left(leaf.keys, start)
            while leaf is not None and len(out) < count:
                take = leaf.keys[i:i+count-len(out)]
                out.extend(zip(take, leaf.values[i:i+len(take)]))
                leaf, i = leaf.next, 0
        return out


    def size_in_bytes(self):
        '''Nodes allocated at full fanout, like fixed-size node arrays.'''
        f = self.fanout
        leaf_bytes = BTREE_NODE_HEADER + f*(KEY_BYTES+PAYLOAD_BYTES) + 2*POINTER_BYTES
        inner_bytes = BTREE_NODE_HEADER + f*KEY_BYTES + (f+1)*POINTER_BYTES
        total = 0
        with self._lock.read():
            stack = [self._root]
            while stack:
                node = stack.pop()
                if isinstance(node, Leaf):
                    total += leaf_bytes
                else:
                    total += inner_bytes
                    stack.extend(node.children)
        return total


    # -----------------------------------------------
    # checks
    # -----------------------------------------------
    def check(self):
        '''Whether ordering, separator and occupancy invariants hold. Single-threaded use only.'''
        def visit(node, lo, hi, is_root):
            keys = node.keys
            if any(a >= b for a, b in zip(keys, keys[1:])): return False
            if keys and ((lo is not None and keys[0] < lo) or (hi is not None and keys[-1] >= hi)): return False
            if isinstance(node, Leaf):
                return is_root or len(keys) >= self.fanout // 2
            if len(node.children)!=len(keys)+1: return False
            if not is_root and len(node.children) < ceil_div(self.fanout, 2): return False
            bounds = [lo] + keys + [hi]
            return all(visit(c, bounds[j], bounds[j+1], False) for j, c in enumerate(node.children))
        return visit(self._root, None, None, True)
