'''Epoch-based reclamation of unlinked index nodes.

A thread pins the current global epoch while it may hold references into the index.
Unlinked nodes are retired into the list of the epoch current at retirement; a list is
reclaimed once every pinned thread has observed a later epoch, so no pinned reader can
still reach its nodes. The global epoch advances only when every pinned thread has
caught up with it.

Python frees memory by reference counting, so "reclaiming" runs the retire callback,
which poisons the node: a reader touching a reclaimed node fails loudly instead of
reading stale data.

Every pin and unpin takes one manager-wide mutex, so all threads of an index serialize
on it twice per operation. This bounds multi-thread scaling of the indexes, together with
the interpreter lock.
'''

import threading
from collections import defaultdict
from contextlib import contextmanager
from ..common.constants import RECLAIM_INTERVAL


class EpochManager:
    '''Global epoch, per-thread pinned epochs and per-epoch retire lists.'''

    def __init__(self, reclaim_interval:int=RECLAIM_INTERVAL):
        self.reclaim_interval = reclaim_interval
        self.global_epoch = 0
        self.reclaimed = 0
        self._mutex = threading.Lock()
        self._locals = {}                 # thread ident -> [pinned epoch, nesting depth]
        self._retired = defaultdict(list) # epoch -> [(object, callback)]
        self._retire_count = 0


    @property
    def pending(self):
        '''Number of retired objects not reclaimed yet.'''
        with self._mutex:
            return sum(len(v) for v in self._retired.values())


    def enter(self):
        '''Pin the current epoch for the calling thread; nested calls keep the outer pin.'''
        tid = threading.get_ident()
        with self._mutex:
            slot = self._locals.get(tid)
            if slot:
                slot[1] += 1
            else:
                self._locals[tid] = [self.global_epoch, 1]


    def exit(self):
        tid = threading.get_ident()
        with self._mutex:
            slot = self._locals[tid]
            slot[1] -= 1
            if slot[1]==0: del self._locals[tid]


    @contextmanager
    def pinned(self):
        self.enter()
        try:
            yield self
        finally:
            self.exit()


    def retire(self, obj, reclaim=None):
        '''Defer reclaiming an object unlinked from every shared structure.

        Args:
            obj (object): Retired object.
            reclaim (callable, optional): Called with ``obj`` once no pinned thread can reach it.
        '''
        with self._mutex:
            self._retired[self.global_epoch].append((obj, reclaim))
            self._retire_count += 1
            due = self._retire_count % self.reclaim_interval == 0
        if due: self.try_reclaim()


    def try_reclaim(self):
        '''Advance the global epoch if possible and reclaim every safe retire list.

        Returns:
            int: Number of objects reclaimed.
        '''
        with self._mutex:
            active = [slot[0] for slot in self._locals.values()]
            if all(e==self.global_epoch for e in active):
                self.global_epoch += 1
            safe = min(active, default=self.global_epoch)
            freed = []
            for epoch in [e for e in self._retired if e < safe]:
                freed.extend(self._retired.pop(epoch))
            self.reclaimed += len(freed)

        for obj, reclaim in freed:
            if reclaim: reclaim(obj)
        return len(freed)


    def drain(self):
        '''Reclaim everything; stops early while any thread is pinned.'''
        while True:
            with self._mutex:
                if self._locals or not any(self._retired.values()): return
            self.try_reclaim()
