'''Benchmark runs: throughput, sampled tail latency, counters and memory of an index
under a workload.

Each repetition bulk loads a fresh index (untimed), starts one worker thread per
operation stream and times the streams together. Every ``1/latency_sample_rate``-th
operation of a worker is timed alone with ``perf_counter_ns``; sampled latencies include
the overhead of reading the clock. After the run the index content is checked against the
reference map replaying the workload.
'''

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from threading import Barrier
from time import perf_counter, perf_counter_ns
import numpy as np
from ..common.Dataset import Dataset
from ..common.Counters import Counters
from ..common.Oracle import SortedOracle
from ..common.share import (OpKind, color_output)
from .Workload import (WorkloadSpec, Workload, build_workload, BenchmarkException)

# logging
logging.basicConfig(
    level=logging.INFO,
    format="[%(levelname)s] %(message)s")


PERCENTILES = (0.5, 0.99, 0.999)


def percentile(sorted_samples, q:float):
    '''Nearest-rank percentile of ascending samples: the ``ceil(q*N)``-th smallest.'''
    n = len(sorted_samples)
    if n==0: return 0
    rank = min(max(math.ceil(q * n), 1), n)
    return int(sorted_samples[rank-1])


@dataclass
class BenchReport:
    '''Aggregated result of the repetitions of one run.'''
    index: str
    workload: dict
    threads: int
    throughput_ops_s: float = 0.0
    p50_ns: int = 0
    p99_ns: int = 0
    p999_ns: int = 0
    latency_variance: float = 0.0
    latency_samples: int = 0
    counters: Counters = field(default_factory=Counters)
    memory_bytes_end: int = 0
    throughputs: list = field(default_factory=list)   # ops/s per repetition
    extra: dict = field(default_factory=dict)         # workload specific values

    def store(self):
        '''Report in json format.'''
        return {
            'index'           : self.index,
            'workload'        : self.workload,
            'threads'         : self.threads,
            'throughput_ops_s': self.throughput_ops_s,
            'latency_ns'      : {
                'p50'     : self.p50_ns,
                'p99'     : self.p99_ns,
                'p999'    : self.p999_ns,
                'variance': self.latency_variance,
                'samples' : self.latency_samples
            },
            'counters'        : self.counters.store(),
            'memory_bytes_end': self.memory_bytes_end,
            'repetitions'     : {'throughput_ops_s': self.throughputs},
            'extra'           : self.extra
        }


class Benchmark:
    '''Run workloads against indexes.

    Indexes are given as factories, i.e. callables returning a fresh empty index, see
    :py:meth:`~lixbench.bench.IndexFactory.IndexFactory.builder`.
    '''

    @property
    def default_settings(self):
        '''Default benchmark parameters.'''
        return {
            'verify'          : True,                     # compare final index content with the reference map
            'scan_count'      : 10000,                    # scans per size in a range sweep
            'scan_sizes'      : (10, 100, 1000, 10000),   # range sweep sizes
            'scan_verify_rate': 0.01,                     # share of sweep scans compared with the reference map
            'probe_count'     : 10000                     # lookups timed before and after deletions
        }


    # -----------------------------------------------------------------------
    # workload run
    # -----------------------------------------------------------------------
    def run(self, index_factory, spec:WorkloadSpec, dataset:Dataset, insert_keys=None, **kwargs):
        '''Run a workload ``spec.repetitions`` times on fresh indexes.

        Args:
            index_factory (callable): Returns a fresh empty index.
            spec (WorkloadSpec): Workload parameters.
            dataset (Dataset): Keys of the workload.
            insert_keys (iterable, optional): Keys to insert instead of dataset keys.
            kwargs (dict, optional): Settings updating :py:attr:`default_settings`.

        Raises:
            BenchmarkException: An index operation failed.
            VerificationException: Index content differs from the reference map.

        Returns:
            BenchReport: Mean throughput over repetitions; latency percentiles over the
            samples of all repetitions; counters and memory of the last repetition.
        '''
        t0 = perf_counter()
        settings = self.default_settings
        settings.update(kwargs)

        logging.info(color_output('[1/3] Building workload...'))
        workload = build_workload(spec, dataset, insert_keys)

        logging.info(color_output('[2/3] Running workload...'))
        name = None
        throughputs, samples, extra = [], [], {}
        for rep in range(spec.repetitions):
            index = index_factory()
            name = index.name
            index.bulk_load(workload.bulk)

            if spec.kind=='delete_mix':
                probes = self._probes(workload, settings['probe_count'], spec.seed)
                before = self._probe_throughput(index, probes)

            stats0 = index.op_stats()
            elapsed, latencies = self._execute(index, workload)
            counters = index.stats.delta(stats0)

            throughputs.append(spec.op_count / max(elapsed, 1e-9))
            samples.extend(latencies)
            logging.info('(%d/%d) %s: %.0f ops/s', rep+1, spec.repetitions, name, throughputs[-1])

            if spec.kind=='delete_mix':
                after = self._probe_throughput(index, probes)
                extra.setdefault('lookup_throughput_before', []).append(before)
                extra.setdefault('lookup_throughput_after', []).append(after)

            if settings['verify']: self.verify(index, workload)

        logging.info(color_output('[3/3] Aggregating results...'))
        report = BenchReport(name, spec.store(), spec.thread_count)
        report.throughputs = throughputs
        report.throughput_ops_s = float(np.mean(throughputs))
        report.counters = counters
        report.memory_bytes_end = index.size_in_bytes()
        report.extra = {k: float(np.mean(v)) for k, v in extra.items()}

        arr = np.sort(np.array(samples, dtype=np.int64))
        report.latency_samples = int(arr.size)
        report.p50_ns, report.p99_ns, report.p999_ns = (percentile(arr, q) for q in PERCENTILES)
        report.latency_variance = float(np.var(arr)) if arr.size else 0.0

        logging.info('Terminated in %.2fs.', perf_counter()-t0)
        return report


    @staticmethod
    def _execute(index, workload:Workload):
        '''Run the streams on one thread each; returns elapsed seconds and sampled latencies.'''
        spec = workload.spec
        rate = spec.latency_sample_rate
        every = max(int(round(1/rate)), 1) if rate > 0 else 0
        streams = workload.streams
        barrier = Barrier(len(streams)+1)

        def worker(stream):
            out = []
            barrier.wait()
            for i, op in enumerate(stream):
                if every and i % every==0:
                    t = perf_counter_ns()
                    index.apply(op)
                    out.append(perf_counter_ns()-t)
                else:
                    index.apply(op)
            return out

        with ThreadPoolExecutor(max_workers=len(streams)) as pool:
            futures = [pool.submit(worker, stream) for stream in streams]
            barrier.wait()
            t0 = perf_counter()
            errors, latencies = [], []
            for f in futures:
                try:
                    latencies.extend(f.result())
                except Exception as e:
                    errors.append(e)
            elapsed = perf_counter() - t0

        if errors:
            raise BenchmarkException(f'{len(errors)} worker(s) of {index.name} failed: {errors[0]!r}') from errors[0]
        return elapsed, latencies


    @staticmethod
    def _probes(workload:Workload, count:int, seed:int):
        '''Lookups of bulk keys surviving a delete workload.'''
        removed = {key for kind, key, _ in workload.ops if kind==OpKind.REMOVE}
        survivors = [k for k, _ in workload.bulk if k not in removed]
        if not survivors: return []
        rng = np.random.Generator(np.random.PCG64(seed+1))
        idx = rng.integers(0, len(survivors), size=count).tolist()
        return [survivors[i] for i in idx]


    @staticmethod
    def _probe_throughput(index, keys:list):
        if not keys: return 0.0
        t0 = perf_counter()
        for key in keys: index.lookup(key)
        return len(keys) / max(perf_counter()-t0, 1e-9)


    @staticmethod
    def verify(index, workload:Workload):
        '''Compare index content with the reference map replaying the mutations of ``workload``.

        Raises:
            VerificationException: Content differs.
        '''
        oracle = SortedOracle(workload.bulk)
        for op in workload.ops:
            if op[0] in (OpKind.INSERT, OpKind.UPDATE, OpKind.REMOVE): oracle.apply(op)

        expected, actual = oracle.items(), index.items()
        if actual==expected: return
        for i, (a, b) in enumerate(zip(actual, expected)):
            if a!=b:
                raise VerificationException(f'{index.name} differs at position {i}: {a} != {b}.')
        raise VerificationException(f'{index.name} holds {len(actual)} records, expected {len(expected)}.')


    # -----------------------------------------------------------------------
    # experiments
    # -----------------------------------------------------------------------
    def run_data_shift(self, index_factory, bulk_ds:Dataset, insert_ds:Dataset, spec:WorkloadSpec=None, **kwargs):
        '''Balanced workload inserting keys of another distribution.

        ``insert_ds`` is scaled into the key domain of ``bulk_ds`` with :py:func:`scale_keys`.
        The baseline inserts held back keys of ``bulk_ds`` instead.

        Returns:
            tuple: ``(baseline, shifted, change)``, ``change`` the relative throughput change.
        '''
        spec = spec or WorkloadSpec(kind='balanced')
        if len(bulk_ds) < 2 or len(insert_ds) < 2:
            raise BenchmarkException('Data shift needs at least two keys in both datasets.')

        scaled = scale_keys(insert_ds, bulk_ds.min_key, bulk_ds.max_key)
        base_spec = WorkloadSpec(**{**spec.store(), 'kind': 'balanced', 'read_fraction': spec.read_fraction})
        shift_spec = WorkloadSpec(**{**spec.store(), 'kind': 'data_shift', 'read_fraction': spec.read_fraction})

        logging.info(color_output('Baseline without shift'))
        baseline = self.run(index_factory, base_spec, bulk_ds, **kwargs)
        logging.info(color_output('Shifted inserts'))
        shifted = self.run(index_factory, shift_spec, bulk_ds, insert_keys=scaled, **kwargs)

        change = shifted.throughput_ops_s / baseline.throughput_ops_s - 1.0
        logging.info('Throughput change under data shift: %+.1f%%', 100*change)
        return baseline, shifted, change


    def run_range_sweep(self, index_factory, dataset:Dataset, sizes=None, seed:int=0, **kwargs):
        '''Keys scanned per second for each scan size, on an index bulk loaded with ``dataset``.

        Raises:
            VerificationException: A scan is unsorted, or differs from the reference map.

        Returns:
            list: ``{'scan_size', 'scans', 'keys', 'keys_per_s'}`` per size.
        '''
        settings = self.default_settings
        settings.update(kwargs)
        sizes = sizes or settings['scan_sizes']
        count = settings['scan_count']
        check_every = max(int(round(1/settings['scan_verify_rate'])), 1) if settings['scan_verify_rate'] else 0

        pairs = dataset.pairs()
        index = index_factory().bulk_load(pairs)
        oracle = SortedOracle(pairs)
        keys = dataset.key_list
        rng = np.random.Generator(np.random.PCG64(seed))

        out = []
        for i, size in enumerate(sizes, start=1):
            starts = [keys[j] for j in rng.integers(0, len(keys), size=count).tolist()]
            results, total = [], 0
            t0 = perf_counter()
            for start in starts:
                res = index.range_scan(start, size)
                total += len(res)
                results.append(res)
            elapsed = perf_counter() - t0

            for j, (start, res) in enumerate(zip(starts, results)):
                if any(a[0] >= b[0] for a, b in zip(res, res[1:])):
                    raise VerificationException(f'Unsorted scan of {index.name} from {start}.')
                if check_every and j % check_every==0 and res!=oracle.range_scan(start, size):
                    raise VerificationException(f'Scan of {index.name} from {start} differs from reference.')

            out.append({'scan_size': size, 'scans': count, 'keys': total,
                        'keys_per_s': total / max(elapsed, 1e-9)})
            logging.info('(%d/%d) scan size %d: %.0f keys/s', i, len(sizes), size, out[-1]['keys_per_s'])
        return out


    def insert_stats(self, index_factory, dataset:Dataset, op_count:int=None, seed:int=0):
        '''Mean nodes traversed, keys shifted and nodes created per insert, single-threaded,
        and the time breakdown of an insert: ``search_ns`` locating the target slot,
        ``write_ns`` writing in place (shifts, collision nodes), ``smo_ns`` structure
        modifications and subtree rebuilds.

        The index is bulk loaded with half of the keys and receives ``op_count`` inserts of
        the other half (all of them by default).
        '''
        def timed_factory():
            index = index_factory()
            index.timed = True
            return index

        op_count = op_count or len(dataset) - int(round(len(dataset)*0.5))
        spec = WorkloadSpec(kind='write_only', op_count=op_count, repetitions=1,
                            latency_sample_rate=0.0, seed=seed)
        report = self.run(timed_factory, spec, dataset, verify=False)
        return report.counters.per_insert()


# -----------------------------------------------------------------------
# helpers
# -----------------------------------------------------------------------
def scale_keys(d:Dataset, lo:int, hi:int):
    '''Integer affine min-max map of the keys of ``d`` onto ``[lo, hi]``.

    Keys colliding after scaling are dropped.

    Returns:
        list: Sorted unique scaled keys.
    '''
    if len(d) < 2 or hi <= lo:
        raise BenchmarkException('Degenerate key domain for scaling.')
    a, b = d.min_key, d.max_key
    scaled = [lo + (k-a)*(hi-lo)//(b-a) for k in d.key_list]
    out = [scaled[0]]
    for k in scaled[1:]:
        if k!=out[-1]: out.append(k)
    return out


class VerificationException(BenchmarkException):
    pass
