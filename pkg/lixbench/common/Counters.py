'''Per-index operation counters.

Indexes bump the fields with plain ``+=`` from any worker thread. An increment is a
single attribute store, so concurrent runs may lose a few counts; exact values are only
guaranteed for single-threaded runs.

The ``*_ns`` fields split insert time into phases. They stay zero unless the index runs
with ``timed`` set, see :py:attr:`~lixbench.common.BaseIndex.BaseIndex.timed`.
'''

from dataclasses import dataclass, asdict, fields, replace


@dataclass
class Counters:
    '''Operation and structure-modification statistics.'''
    lookups: int = 0
    inserts: int = 0          # insert calls, including updates of present keys
    removes: int = 0
    scans: int = 0
    nodes_traversed: int = 0  # nodes visited by lookups and inserts
    keys_shifted: int = 0     # slots moved to make room for inserts
    smo_count: int = 0        # expands, splits, contractions, subtree rebuilds
    retrain_count: int = 0    # models trained after bulk load
    nodes_created: int = 0    # nodes allocated by inserts, rebuilds excluded
    key_comparisons: int = 0  # key comparisons made by lookups
    search_ns: int = 0        # inserts: locating the target slot
    write_ns: int = 0         # inserts: writing in place, shifting, collision nodes
    smo_ns: int = 0           # inserts: structure modifications and rebuilds


    def snapshot(self):
        '''Copy of the current values.'''
        return replace(self)


    def delta(self, before:'Counters'):
        '''Counters accumulated since the ``before`` snapshot.'''
        return Counters(**{f.name: getattr(self, f.name)-getattr(before, f.name) for f in fields(self)})


    def per_insert(self):
        '''Means per insert: nodes traversed, keys shifted, nodes created and the time of
        each insert phase. Meant for insert-only runs, since lookups count traversed nodes
        too.'''
        n = max(self.inserts, 1)
        return {
            'nodes_traversed': self.nodes_traversed / n,
            'keys_shifted'   : self.keys_shifted / n,
            'nodes_created'  : self.nodes_created / n,
            'search_ns'      : self.search_ns / n,
            'write_ns'       : self.write_ns / n,
            'smo_ns'         : self.smo_ns / n
        }


    def store(self): return asdict(self)
