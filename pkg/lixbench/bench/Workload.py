'''Operation streams of the benchmark workloads.

A workload bulk loads a random ``bulk_fraction`` of the dataset keys and then issues
``op_count`` operations. Reads are lookups of loaded keys (scans starting at loaded keys
for ``range_scan``); the other operations depend on the kind:

============== ============== =================================================
kind           read fraction  other operations
============== ============== =================================================
read_only      1.0            none
read_intensive 0.8            inserts of the keys held back from the bulk load
balanced       0.5            inserts
write_heavy    0.2            inserts
write_only     0.0            inserts
delete_mix     0.5            removes of loaded keys, each key once
range_scan     1.0            inserts
data_shift     0.5            inserts of keys drawn from another dataset
zipfian_mix    0.5            inserts; lookups skewed by a Zipf distribution
ycsb_a         0.5            updates of loaded keys; both skewed
ycsb_b         0.95           updates
ycsb_c         1.0            none
============== ============== =================================================

Operation kinds are shuffled so they interleave at the given ratio, and the stream is
cut into one contiguous chunk per worker thread. Every mutated key is mutated by one
operation only (updates of a key always write the same payload), so the final mapping
does not depend on how threads interleave.
'''

import logging
from dataclasses import dataclass, field
import numpy as np
from ..common.Dataset import Dataset
from ..common.share import (OpKind, checksum_payload)


READ_FRACTION = {
    'read_only'     : 1.0,
    'read_intensive': 0.8,
    'balanced'      : 0.5,
    'write_heavy'   : 0.2,
    'write_only'    : 0.0,
    'delete_mix'    : 0.5,
    'range_scan'    : 1.0,
    'data_shift'    : 0.5,
    'zipfian_mix'   : 0.5,
    'ycsb_a'        : 0.5,
    'ycsb_b'        : 0.95,
    'ycsb_c'        : 1.0
}

YCSB_KINDS = ('ycsb_a', 'ycsb_b', 'ycsb_c')
ZIPF_KINDS = ('zipfian_mix',) + YCSB_KINDS


@dataclass
class WorkloadSpec:
    '''Workload parameters.'''
    kind: str = 'read_intensive'
    op_count: int = 100_000
    read_fraction: float = None      # defaults to the kind's fraction
    scan_size: int = 100
    zipf_theta: float = 0.99         # YCSB default Zipf constant
    bulk_fraction: float = 0.5
    thread_count: int = 1
    latency_sample_rate: float = 0.01
    repetitions: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.read_fraction is None:
            self.read_fraction = READ_FRACTION.get(self.kind, 0.5)


    def validate(self):
        if self.kind not in READ_FRACTION:
            raise WorkloadException(f'Unknown workload kind "{self.kind}".')
        for name in ('read_fraction', 'bulk_fraction', 'latency_sample_rate'):
            if not 0 <= getattr(self, name) <= 1:
                raise WorkloadException(f'Expect 0 <= {name} <= 1: {getattr(self, name)}.')
        if self.op_count <= 0:
            raise WorkloadException(f'Expect op_count > 0: {self.op_count}.')
        if self.thread_count < 1 or self.repetitions < 1:
            raise WorkloadException('Expect at least one thread and one repetition.')
        if self.scan_size < 1:
            raise WorkloadException(f'Expect scan_size >= 1: {self.scan_size}.')
        if self.kind in ZIPF_KINDS and not 0 < self.zipf_theta < 1:
            raise WorkloadException(f'Expect 0 < zipf_theta < 1: {self.zipf_theta}.')


    @property
    def reads(self):
        '''Number of read operations, the rest are writes.'''
        return int(round(self.op_count * self.read_fraction))

    @property
    def writes(self): return self.op_count - self.reads


    def store(self):
        return {
            'kind'               : self.kind,
            'op_count'           : self.op_count,
            'read_fraction'      : self.read_fraction,
            'scan_size'          : self.scan_size,
            'zipf_theta'         : self.zipf_theta,
            'bulk_fraction'      : self.bulk_fraction,
            'thread_count'       : self.thread_count,
            'latency_sample_rate': self.latency_sample_rate,
            'repetitions'        : self.repetitions,
            'seed'               : self.seed
        }


@dataclass
class Workload:
    '''Bulk-load pairs and one operation list per worker thread.'''
    spec: WorkloadSpec
    bulk: list
    streams: list = field(default_factory=list)

    @property
    def ops(self):
        '''All operations, thread after thread.'''
        return [op for stream in self.streams for op in stream]


    def counts(self):
        '''Number of operations per kind.'''
        out = {kind: 0 for kind in OpKind}
        for stream in self.streams:
            for kind, _, _ in stream: out[kind] += 1
        return out


# -------------------------------------
# zipf
# -------------------------------------
def zipf_ranks(n:int, theta:float, size:int, rng:np.random.Generator):
    '''Ranks in ``[0, n)`` drawn from a Zipf distribution with constant ``theta < 1``.

    Inverse-CDF construction of the YCSB zipfian generator (Gray et al.): rank 0 is the
    most popular item.
    '''
    zetan = float(np.sum(1.0 / np.arange(1, n+1, dtype=np.float64)**theta))
    zeta2 = 1.0 + 0.5**theta
    u = rng.random(size)
    uz = u * zetan
    if n <= 2: return np.where(uz < 1.0, 0, n-1).astype(np.int64)

    alpha = 1.0 / (1.0 - theta)
    eta = (1.0 - (2.0/n)**(1.0-theta)) / (1.0 - zeta2/zetan)
    ranks = (n * (eta*u - eta + 1.0)**alpha).astype(np.int64)
    ranks = np.where(uz < zeta2, 1, ranks)
    ranks = np.where(uz < 1.0, 0, ranks)
    return np.clip(ranks, 0, n-1)


# -------------------------------------
# workload
# -------------------------------------
def build_workload(spec:WorkloadSpec, dataset:Dataset, insert_keys=None):
    '''Operation streams of a workload over a dataset.

    Args:
        spec (WorkloadSpec): Workload parameters.
        dataset (Dataset): Keys to bulk load and to insert.
        insert_keys (iterable, optional): Keys inserted instead of the held back dataset keys,
            e.g. keys of another distribution for ``data_shift``. Keys already loaded are skipped.

    Raises:
        WorkloadException: Invalid spec, or too few keys for the requested operations.

    Returns:
        Workload: Deterministic for a given seed.
    '''
    spec.validate()
    n = len(dataset)
    n_bulk = int(round(n * spec.bulk_fraction))
    if n_bulk < 1:
        raise WorkloadException(f'Nothing to bulk load: {n} keys, bulk fraction {spec.bulk_fraction}.')

    rng = np.random.Generator(np.random.PCG64(spec.seed))
    perm = rng.permutation(n)
    keys = dataset.keys
    bulk_keys = [int(k) for k in np.sort(keys[perm[:n_bulk]]).tolist()]

    if insert_keys is None:
        pool = [int(k) for k in keys[perm[n_bulk:]].tolist()]
    else:
        loaded = set(bulk_keys)
        pool = [int(k) for k in insert_keys if int(k) not in loaded]
        pool = [pool[i] for i in rng.permutation(len(pool)).tolist()]

    reads, writes = spec.reads, spec.writes
    kind = spec.kind
    if kind=='delete_mix':
        if writes > n_bulk:
            raise WorkloadException(f'Cannot remove {writes} keys out of {n_bulk} loaded.')
    elif kind not in YCSB_KINDS and writes > len(pool):
        raise WorkloadException(f'Cannot insert {writes} new keys: {len(pool)} available.')

    # interleave reads and writes
    is_write = np.zeros(spec.op_count, dtype=bool)
    is_write[:writes] = True
    is_write = rng.permutation(is_write)

    # keys of reads and of writes
    if kind in ZIPF_KINDS:
        scramble = rng.permutation(n_bulk)
        read_idx = scramble[zipf_ranks(n_bulk, spec.zipf_theta, reads, rng)].tolist()
    else:
        read_idx = rng.integers(0, n_bulk, size=reads).tolist()

    if kind=='delete_mix':
        write_keys = [bulk_keys[i] for i in rng.permutation(n_bulk)[:writes].tolist()]
    elif kind in YCSB_KINDS:
        write_keys = [bulk_keys[i] for i in scramble[zipf_ranks(n_bulk, spec.zipf_theta, writes, rng)].tolist()]
    else:
        write_keys = pool[:writes]

    read_kind = OpKind.SCAN if kind=='range_scan' else OpKind.LOOKUP
    ops, r, w = [], 0, 0
    for write in is_write.tolist():
        if write:
            key = write_keys[w]
            w += 1
            if kind=='delete_mix':
                ops.append((OpKind.REMOVE, key, None))
            elif kind in YCSB_KINDS:
                ops.append((OpKind.UPDATE, key, checksum_payload(key)))
            else:
                ops.append((OpKind.INSERT, key, key))
        else:
            key = bulk_keys[read_idx[r]]
            r += 1
            ops.append((read_kind, key, spec.scan_size if read_kind==OpKind.SCAN else None))

    # one contiguous chunk per thread
    bounds = np.linspace(0, len(ops), spec.thread_count+1).round().astype(int).tolist()
    streams = [ops[a:b] for a, b in zip(bounds, bounds[1:])]

    logging.info('Workload %s: %d bulk keys, %d reads, %d writes, %d threads.',
                 kind, n_bulk, reads, writes, spec.thread_count)
    return Workload(spec, [(k, k) for k in bulk_keys], streams)


class BenchmarkException(Exception):
    pass

class WorkloadException(BenchmarkException):
    pass
