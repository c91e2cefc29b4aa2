'''Inner node: a linear model computes the child slot, no search.'''

from ..common.LinearModel import LinearModel
from ..common.constants import (INNER_NODE_HEADER, POINTER_BYTES)
from ..sync.SharedLock import SharedLock


class InnerNode:
    '''Model over a power-of-two child array; adjacent slots may repeat one child.

    The model and the child array are published together as one ``route`` tuple, so a
    lock-free traversal never pairs a model with an array of another size. The array is
    changed only under the exclusive side of ``lock``: single slot stores, or a new route
    when the array is doubled.
    '''

    __slots__ = ('route', 'lock')

    def __init__(self, model:LinearModel, children:list):
        self.route = (model, children)
        self.lock = SharedLock()

    @property
    def model(self): return self.route[0]

    @property
    def children(self): return self.route[1]

    @property
    def fanout(self): return len(self.route[1])

    def child(self, key:int):
        model, children = self.route
        return children[model.slot(key, len(children))]

    def slot(self, key:int):
        model, children = self.route
        return model.slot(key, len(children))


    def doubled(self):
        '''Double the child array: slot ``i`` becomes slots ``2i`` and ``2i+1``.

        Scaling the model by two is exact in floating point, so every key keeps its child.
        Caller holds the exclusive lock.
        '''
        model, children = self.route
        self.route = (model.scaled(2), [c for c in children for _ in (0, 1)])


    def size_in_bytes(self):
        return INNER_NODE_HEADER + self.fanout*POINTER_BYTES
