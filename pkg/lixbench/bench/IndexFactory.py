'''
Create :py:class:`~lixbench.common.BaseIndex.BaseIndex` instances by name, e.g. ``gapped``,
``chain``, ``btree``. ``gapped-m`` is the gapped index preset with low densities, trading
space for fewer shifts.
'''

from functools import partial
from ..gapped.GappedIndex import GappedIndex
from ..chain.ChainIndex import ChainIndex
from ..btree.BPlusTree import BPlusTree


class IndexFactory:

    MAP = {
        'GAPPED'  : GappedIndex,
        'GAPPED-M': partial(GappedIndex, min_density=0.2, avg_density=0.25, max_density=0.3),
        'CHAIN'   : ChainIndex,
        'BTREE'   : BPlusTree
    }

    @classmethod
    def names(cls): return [name.lower() for name in cls.MAP]


    @classmethod
    def create(cls, name:str, **settings):
        '''Create an empty index with specified name and settings.'''
        klass = cls.MAP.get(name.upper(), None)
        if not klass:
            raise TypeError(f'Index "{name}" is not implemented yet.')
        else:
            return klass(**settings)


    @classmethod
    def builder(cls, name:str, **settings):
        '''Callable creating a fresh index per call, e.g. one per benchmark repetition.'''
        cls.create(name, **settings) # fail early on bad name or settings
        return partial(cls.create, name, **settings)
