'''Common enums and methods.'''

from enum import Enum
from .constants import MAX_KEY


class OpKind(Enum):
    '''Operation kinds understood by every index and by the oracle.'''
    LOOKUP = 0
    INSERT = 1
    REMOVE = 2
    SCAN   = 3
    UPDATE = 4 # insert of a present key, i.e. payload overwrite


class OpResult(Enum):
    '''Outcome tags returned by :py:func:`~lixbench.common.Oracle.oracle_apply`.'''
    OK        = 0  # insert of a new key
    UPDATED   = 1  # insert of a present key
    FOUND     = 2
    NOT_FOUND = 3
    REMOVED   = 4
    ABSENT    = 5  # remove of a missing key
    SCANNED   = 6


class lazyproperty:
    '''Calculate only once and cache property value.'''
    def __init__(self, func):
        self.func = func

    def __get__(self, instance, cls):
        if instance is None:
            return self
        else:
            value = self.func(instance)
            setattr(instance, self.func.__name__, value)
            return value


# -------------------------
# methods
# -------------------------
def check_key(key:int):
    '''Raise ``ValueError`` if ``key`` is not an unsigned 64-bit integer.'''
    if not 0 <= key <= MAX_KEY:
        raise ValueError(f'Key {key} out of the unsigned 64-bit range.')


def checksum_payload(key:int):
    '''Payload derived from the key, so a reader can detect a torn (key, payload) pair.'''
    x = (key ^ (key >> 31)) * 0x7FB5D329728EA185 & MAX_KEY
    return (x ^ (x >> 27)) & MAX_KEY


def is_sorted_unique(items):
    '''Whether the sequence of ``(key, payload)`` pairs or keys is strictly increasing.'''
    prev = None
    for item in items:
        key = item[0] if isinstance(item, tuple) else item
        if prev is not None and key <= prev: return False
        prev = key
    return True


def ceil_div(a:int, b:int):
    '''Integer ceiling division for non-negative ``b``.'''
    return -(-a // b)


def color_output(msg): return f'\033[1;36m{msg}\033[0m'
