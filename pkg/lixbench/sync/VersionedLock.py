'''Versioned optimistic locks.

The lock word holds the lock flag in bit 0 and the version in the remaining bits::

    unlocked, version v  ->  2v
    locked               ->  2v + 1
    unlock               ->  2v + 2

Readers take the word with :py:meth:`VersionedLock.read_begin` and check it is unchanged
with :py:meth:`VersionedLock.validate` after reading; writers set the flag with a
compare-and-swap and bump the version on unlock. Compare-and-swap is emulated with a
guard mutex held only for the compare and the store; plain reads of the word need no
mutex.
'''

import threading
import time
from ..common.constants import (SPIN_LIMIT, MAX_BACKOFF)


class Backoff:
    '''Spin with exponentially growing busy waits, then yield to the scheduler.'''

    __slots__ = ('_spins', '_delay')

    def __init__(self):
        self._spins = 0
        self._delay = 1

    def pause(self):
        if self._spins < SPIN_LIMIT:
            self._spins += 1
            for _ in range(self._delay): pass
            self._delay = min(self._delay*2, MAX_BACKOFF)
        else:
            time.sleep(0)


class VersionedLock:
    '''Single optimistic lock word.'''

    __slots__ = ('_word', '_cas')

    def __init__(self, word:int=0):
        self._word = word
        self._cas = threading.Lock()


    @property
    def word(self): return self._word

    @property
    def version(self): return self._word >> 1

    @property
    def locked(self): return bool(self._word & 1)


    def read_begin(self):
        '''Current word if unlocked, ``None`` if a writer holds the lock.'''
        word = self._word
        return None if word & 1 else word


    def validate(self, version:int):
        '''Whether the word still equals ``version`` from :py:meth:`read_begin`.'''
        return self._word==version


    def try_lock(self):
        with self._cas:
            word = self._word
            if word & 1: return False
            self._word = word | 1
            return True


    def lock(self):
        backoff = Backoff()
        while not self.try_lock():
            backoff.pause()


    def unlock(self):
        word = self._word
        if not word & 1:
            raise LockException('Unlock of a lock not held.')
        self._word = word + 1


    def __enter__(self):
        self.lock()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.unlock()


class VersionedLockTable:
    '''Array of lock words sharing one compare-and-swap guard, one word per array entry.'''

    __slots__ = ('_words', '_cas')

    def __init__(self, size:int):
        self._words = [0] * size
        self._cas = threading.Lock()

    def __len__(self): return len(self._words)

    def word(self, i:int): return self._words[i]


    def read_begin(self, i:int):
        word = self._words[i]
        return None if word & 1 else word


    def validate(self, i:int, version:int): return self._words[i]==version


    def try_lock(self, i:int):
        with self._cas:
            word = self._words[i]
            if word & 1: return False
            self._words[i] = word | 1
            return True


    def lock(self, i:int):
        backoff = Backoff()
        while not self.try_lock(i):
            backoff.pause()


    def unlock(self, i:int):
        word = self._words[i]
        if not word & 1:
            raise LockException(f'Unlock of entry {i} not held.')
        self._words[i] = word + 1


class LockException(Exception):
    pass
