'''
Workloads, benchmark runs, heatmap and the command line.

- pytest -vs --no-header test_bench.py::TestBenchmark
'''

import csv
import json
import os
import numpy as np
import pytest

from lixbench import Dataset, BPlusTree, load_dataset, save_dataset
from lixbench.common.share import (OpKind, checksum_payload)
from lixbench.bench.IndexFactory import IndexFactory
from lixbench.bench.Workload import (WorkloadSpec, build_workload, zipf_ranks,
                                     WorkloadException, BenchmarkException)
from lixbench.bench.Benchmark import (Benchmark, percentile, scale_keys, VerificationException)
from lixbench.bench.Heatmap import (HeatmapCell, emit_heatmap, run_plan, load_plan, COLUMNS, HeatmapException)
from lixbench.main import (LIXBENCH, Bench)


def dataset(n=10000, step=7):
    return Dataset.from_keys(range(0, n*step, step))


class LossyTree(BPlusTree):
    '''Drops every insert of a multiple of 7.'''
    def insert(self, key, payload):
        if key % 7==0: return True
        return super().insert(key, payload)


class BrokenTree(BPlusTree):
    '''Fails on every lookup.'''
    def lookup(self, key):
        raise RuntimeError('broken lookup')


class TestWorkload:
    '''Operation streams.'''

    def setup_method(self):
        self.dataset = dataset()

    def test_read_intensive_counts(self):
        '''10k operations at 0.8: 8000 lookups of loaded keys, 2000 inserts of held back keys.'''
        w = build_workload(WorkloadSpec(kind='read_intensive', op_count=10000), self.dataset)
        counts = w.counts()
        assert counts[OpKind.LOOKUP]==8000 and counts[OpKind.INSERT]==2000
        loaded = {k for k, _ in w.bulk}
        assert len(loaded)==5000
        inserts = [k for kind, k, _ in w.ops if kind==OpKind.INSERT]
        assert len(set(inserts))==2000 and not loaded & set(inserts)
        assert all(k in loaded for kind, k, _ in w.ops if kind==OpKind.LOOKUP)

    def test_read_only(self):
        '''no mutations.'''
        w = build_workload(WorkloadSpec(kind='read_only', op_count=1000), self.dataset)
        assert w.counts()[OpKind.LOOKUP]==1000

    def test_deterministic_across_threads(self):
        '''same seed, same operations; threads only cut the stream.'''
        one = build_workload(WorkloadSpec(kind='balanced', op_count=3001, seed=4), self.dataset)
        three = build_workload(WorkloadSpec(kind='balanced', op_count=3001, seed=4, thread_count=3), self.dataset)
        assert one.ops==three.ops and one.bulk==three.bulk
        sizes = [len(s) for s in three.streams]
        assert sum(sizes)==3001 and max(sizes)-min(sizes) <= 1
        other = build_workload(WorkloadSpec(kind='balanced', op_count=3001, seed=5), self.dataset)
        assert other.ops!=one.ops

    def test_delete_mix(self):
        '''removes hit loaded keys, each at most once.'''
        w = build_workload(WorkloadSpec(kind='delete_mix', op_count=4000), self.dataset)
        removed = [k for kind, k, _ in w.ops if kind==OpKind.REMOVE]
        assert len(removed)==2000 and len(set(removed))==2000
        assert set(removed) <= {k for k, _ in w.bulk}

    def test_range_scan(self):
        '''reads are scans of the configured size.'''
        w = build_workload(WorkloadSpec(kind='range_scan', op_count=500, scan_size=17), self.dataset)
        assert all(kind==OpKind.SCAN and arg==17 for kind, _, arg in w.ops)

    def test_ycsb(self):
        '''ycsb_a updates loaded keys with checksum payloads, ycsb_c only reads.'''
        w = build_workload(WorkloadSpec(kind='ycsb_a', op_count=4000), self.dataset)
        loaded = {k for k, _ in w.bulk}
        updates = [(k, p) for kind, k, p in w.ops if kind==OpKind.UPDATE]
        assert len(updates)==2000
        assert all(k in loaded and p==checksum_payload(k) for k, p in updates)
        c = build_workload(WorkloadSpec(kind='ycsb_c', op_count=1000), self.dataset)
        assert c.counts()[OpKind.LOOKUP]==1000

    def test_zipf_skew(self):
        '''rank 0 is the most popular, popularity decreases with rank.'''
        rng = np.random.Generator(np.random.PCG64(0))
        ranks = zipf_ranks(1000, 0.99, 100000, rng)
        assert ranks.min() >= 0 and ranks.max() < 1000
        counts = np.bincount(ranks, minlength=1000)
        assert counts[0] > counts[1] > counts[100] > 0
        assert counts[0] > 100000 / 20
        assert set(zipf_ranks(1, 0.99, 100, rng).tolist())=={0}
        assert set(zipf_ranks(2, 0.99, 1000, rng).tolist())=={0, 1}

    def test_zipfian_lookups_skewed(self):
        '''the hottest key takes a large share of lookups.'''
        w = build_workload(WorkloadSpec(kind='zipfian_mix', op_count=8000), self.dataset)
        lookups = [k for kind, k, _ in w.ops if kind==OpKind.LOOKUP]
        _, counts = np.unique(lookups, return_counts=True)
        assert counts.max() > len(lookups) / 50

    def test_insert_keys_of_another_dataset(self):
        '''keys already loaded are skipped.'''
        loaded = build_workload(WorkloadSpec(kind='read_only', op_count=10), self.dataset).bulk
        extra = list(range(1, 70000, 7)) + [k for k, _ in loaded[:100]]
        w = build_workload(WorkloadSpec(kind='data_shift', op_count=1000), self.dataset, insert_keys=extra)
        inserts = [k for kind, k, _ in w.ops if kind==OpKind.INSERT]
        assert len(inserts)==500 and all(k % 7==1 for k in inserts)

    @pytest.mark.parametrize('kwargs', [
        dict(kind='sorting'),
        dict(kind='balanced', op_count=0),
        dict(kind='balanced', read_fraction=1.5),
        dict(kind='balanced', thread_count=0),
        dict(kind='ycsb_a', zipf_theta=1.0),
        dict(kind='write_only', op_count=6000),
        dict(kind='delete_mix', op_count=12000)])
    def test_invalid(self, kwargs):
        '''bad parameters or too few keys.'''
        with pytest.raises(WorkloadException):
            build_workload(WorkloadSpec(**kwargs), self.dataset)
        assert issubclass(WorkloadException, BenchmarkException)


class TestPercentile:
    '''Nearest-rank percentiles.'''

    def test_samples_one_to_thousand(self):
        '''p50=500, p99=990, p999=999 of 1..1000.'''
        samples = np.arange(1, 1001)
        assert [percentile(samples, q) for q in (0.5, 0.99, 0.999)] == [500, 990, 999]
        assert percentile(samples, 1.0)==1000

    def test_small_and_empty(self):
        '''few samples give the maximum for high quantiles; no samples give 0.'''
        assert percentile([3, 8, 9], 0.999)==9
        assert percentile([3, 8, 9], 0.5)==8
        assert percentile([], 0.5)==0


class TestBenchmark:
    '''Benchmark runs.'''

    def setup_method(self):
        self.dataset = dataset(4000)
        self.bench = Benchmark()

    @pytest.mark.parametrize('name', ['gapped', 'chain', 'btree'])
    def test_report(self, name):
        '''positive throughput, ordered percentiles, exact counters single-threaded.'''
        spec = WorkloadSpec(kind='balanced', op_count=1000, repetitions=2, latency_sample_rate=0.1)
        report = self.bench.run(IndexFactory.builder(name), spec, self.dataset)
        assert report.index==name and report.threads==1
        assert report.throughput_ops_s > 0 and len(report.throughputs)==2
        assert report.p50_ns <= report.p99_ns <= report.p999_ns
        assert report.latency_samples==200
        assert report.counters.inserts==500 and report.counters.lookups==500
        assert report.memory_bytes_end > 0

        data = report.store()
        assert set(data)=={'index', 'workload', 'threads', 'throughput_ops_s', 'latency_ns',
                           'counters', 'memory_bytes_end', 'repetitions', 'extra'}
        assert data['workload']['kind']=='balanced'
        json.dumps(data)

    def test_threads(self):
        '''several workers, verified content.'''
        spec = WorkloadSpec(kind='write_heavy', op_count=2000, thread_count=4, repetitions=1)
        report = self.bench.run(IndexFactory.builder('gapped', bulk_node_keys=64), spec, self.dataset)
        assert report.threads==4 and report.throughput_ops_s > 0

    def test_delete_mix(self):
        '''lookup throughput before and after deleting.'''
        spec = WorkloadSpec(kind='delete_mix', op_count=1000, repetitions=1)
        report = self.bench.run(IndexFactory.builder('gapped'), spec, self.dataset, probe_count=500)
        assert report.counters.removes==500
        assert report.extra['lookup_throughput_before'] > 0
        assert report.extra['lookup_throughput_after'] > 0

    def test_ycsb(self):
        '''updates keep the content verifiable.'''
        spec = WorkloadSpec(kind='ycsb_a', op_count=1000, thread_count=2, repetitions=1)
        report = self.bench.run(IndexFactory.builder('chain'), spec, self.dataset)
        assert report.throughput_ops_s > 0

    def test_verification_failure(self):
        '''an index losing records is caught.'''
        spec = WorkloadSpec(kind='write_only', op_count=1000, repetitions=1)
        with pytest.raises(VerificationException):
            self.bench.run(LossyTree, spec, self.dataset)
        report = self.bench.run(LossyTree, spec, self.dataset, verify=False)
        assert report.throughput_ops_s > 0

    def test_worker_failure(self):
        '''an exception in a worker aborts the run.'''
        spec = WorkloadSpec(kind='read_only', op_count=100, thread_count=2, repetitions=1)
        with pytest.raises(BenchmarkException, match='broken lookup'):
            self.bench.run(BrokenTree, spec, self.dataset)

    def test_data_shift(self):
        '''baseline inserts held back keys, the shifted run inserts scaled foreign keys.'''
        insert_ds = Dataset.from_keys(k*k for k in range(1, 3000))
        spec = WorkloadSpec(kind='balanced', op_count=600, repetitions=1)
        baseline, shifted, change = self.bench.run_data_shift(
            IndexFactory.builder('gapped'), self.dataset, insert_ds, spec)
        assert baseline.workload['kind']=='balanced'
        assert shifted.workload['kind']=='data_shift'
        assert change == pytest.approx(shifted.throughput_ops_s / baseline.throughput_ops_s - 1)
        with pytest.raises(BenchmarkException):
            self.bench.run_data_shift(IndexFactory.builder('gapped'), self.dataset, Dataset.from_keys([5]), spec)

    def test_range_sweep(self):
        '''every scan checked against the reference map.'''
        res = self.bench.run_range_sweep(IndexFactory.builder('chain'), self.dataset, [10, 100],
                                         scan_count=50, scan_verify_rate=1.0)
        assert [r['scan_size'] for r in res]==[10, 100]
        assert all(0 < r['keys'] <= r['scans']*r['scan_size'] and r['keys_per_s'] > 0 for r in res)

    def test_insert_stats(self):
        '''per-insert means of every index.'''
        for name in ('gapped', 'chain', 'btree'):
            stats = self.bench.insert_stats(IndexFactory.builder(name), self.dataset, op_count=500)
            assert set(stats)=={'nodes_traversed', 'keys_shifted', 'nodes_created',
                                'search_ns', 'write_ns', 'smo_ns'}
            assert stats['nodes_traversed'] >= 1
            assert stats['nodes_created'] <= 1
            assert stats['search_ns'] > 0 and stats['write_ns'] > 0 and stats['smo_ns'] >= 0

    def test_insert_phases_untimed(self):
        '''regular runs leave the phase timers at zero.'''
        report = self.bench.run(IndexFactory.builder('btree', fanout=4),
                                WorkloadSpec(kind='write_only', op_count=500, repetitions=1), self.dataset)
        c = report.counters
        assert c.smo_count > 0
        assert c.search_ns == c.write_ns == c.smo_ns == 0

    def test_scale_keys(self):
        '''affine map onto a domain, collisions dropped.'''
        assert scale_keys(Dataset.from_keys([0, 10, 20]), 100, 300)==[100, 200, 300]
        assert scale_keys(Dataset.from_keys([0, 1, 1000]), 0, 10)==[0, 10]
        with pytest.raises(BenchmarkException):
            scale_keys(Dataset.from_keys([4]), 0, 10)
        with pytest.raises(BenchmarkException):
            scale_keys(Dataset.from_keys([1, 2]), 10, 10)


class TestIndexFactory:
    '''Indexes by name.'''

    def test_names(self):
        '''every registered index.'''
        assert IndexFactory.names()==['gapped', 'gapped-m', 'chain', 'btree']

    def test_builder(self):
        '''fresh index per call, errors raised early.'''
        build = IndexFactory.builder('btree', fanout=8)
        a, b = build(), build()
        assert a is not b and a.fanout==8
        with pytest.raises(TypeError):
            IndexFactory.builder('trie')
        with pytest.raises(ValueError):
            IndexFactory.builder('chain', fanout=8)

    def test_families(self):
        '''learned and traditional families.'''
        assert {IndexFactory.create(n).family for n in ('gapped', 'gapped-m', 'chain')}=={'learned'}
        assert IndexFactory.create('btree').family=='traditional'


class TestHeatmap:
    '''Winner ratio and CSV output.'''

    @pytest.fixture(autouse=True)
    def setup_dir(self, tmp_path):
        self.dir = tmp_path

    def cell(self, **throughputs):
        c = HeatmapCell(2, 16, 'balanced')
        for name, t in throughputs.items():
            c.add(name, 'traditional' if name=='btree' else 'learned', t)
        return c

    def test_ratio_sign(self):
        '''positive when learned wins, negative when traditional wins, 1.0 on a tie.'''
        assert self.cell(gapped=300.0, chain=100.0, btree=150.0).ratio == pytest.approx(2.0)
        assert self.cell(gapped=100.0, btree=250.0).ratio == pytest.approx(-2.5)
        assert self.cell(gapped=100.0, btree=100.0).ratio == 1.0

    def test_incomplete(self):
        '''a family without results.'''
        with pytest.raises(HeatmapException):
            self.cell(gapped=1.0).ratio
        with pytest.raises(HeatmapException):
            self.cell(gapped=0.0, btree=1.0).ratio

    def test_csv(self):
        '''header, winners and formatted values.'''
        filename = os.path.join(self.dir, 'heatmap.csv')
        emit_heatmap([self.cell(gapped=300.0, chain=100.0, btree=150.0)], filename)
        with open(filename, newline='') as f:
            rows = list(csv.reader(f))
        assert rows[0]==COLUMNS + ['btree_ops_s', 'chain_ops_s', 'gapped_ops_s']
        assert rows[1]==['2', '16', 'balanced', 'gapped', 'btree', '2.0000', '150.0', '100.0', '300.0']

    def test_run_plan(self):
        '''one cell per dataset and workload, every index measured.'''
        path = os.path.join(self.dir, 'keys.bin')
        save_dataset(dataset(2000), path)
        plan = {'data'    : {'files': [path]},
                'workload': {'kinds': ['read_only', 'write_only'], 'op_count': 200},
                'indexes' : {'names': ['gapped', 'btree']}}
        cells = run_plan(plan)
        assert [c.workload for c in cells]==['read_only', 'write_only']
        assert all(set(c.throughputs)=={'gapped', 'btree'} for c in cells)
        assert all(c.global_h >= 1 and c.local_h >= c.global_h for c in cells)
        emit_heatmap(cells, os.path.join(self.dir, 'out.csv'))


class TestCommandLine:
    '''Command entries called directly.'''

    @pytest.fixture(autouse=True)
    def setup_dir(self, tmp_path):
        self.dir = tmp_path

    def test_generate_and_hardness(self):
        '''generated key file, then its segment counts.'''
        keys = os.path.join(self.dir, 'keys.bin')
        LIXBENCH.generate(n=2000, seed=1, out=keys, **{'global': 1, 'local': 2})
        assert len(load_dataset(keys))==2000

        table = os.path.join(self.dir, 'hardness.csv')
        LIXBENCH.hardness(keys, epsilon=[4, 32], out=table)
        with open(table, newline='') as f:
            rows = list(csv.reader(f))
        assert rows[0]==['epsilon', 'segments'] and [r[0] for r in rows[1:]]==['4', '32']
        assert int(rows[1][1]) >= int(rows[2][1]) >= 1

        LIXBENCH.hardness(keys, epsilon=4096, out=table)
        with open(table, newline='') as f:
            assert list(csv.reader(f))[1:]==[['4096', '1']]

    def test_generate_needs_targets(self):
        '''missing or unknown options are logged, nothing is written.'''
        keys = os.path.join(self.dir, 'keys.bin')
        LIXBENCH.generate(n=2000, out=keys, **{'global': 1})
        LIXBENCH.generate(n=2000, out=keys, **{'global': 1, 'local': 2, 'locale': 3})
        LIXBENCH.generate(n=2000, **{'global': 1, 'local': 2})
        assert not os.path.exists(keys)

    def test_bench_run(self):
        '''json report of a run on a generated dataset.'''
        out = os.path.join(self.dir, 'report.json')
        Bench.run(index='btree', workload='balanced', gen='1,2,2000', ops=200, repetitions=1, out=out)
        with open(out) as f:
            report = json.load(f)
        assert report['index']=='btree' and report['throughput_ops_s'] > 0

    def test_bench_run_error(self):
        '''errors are logged, nothing is written.'''
        out = os.path.join(self.dir, 'report.json')
        Bench.run(index='trie', gen='1,2,2000', ops=200, repetitions=1, out=out)
        Bench.run(index='btree', ops=200, repetitions=1, out=out) # no dataset
        assert not os.path.exists(out)

    def test_heatmap(self):
        '''plan file in, heatmap CSV out.'''
        keys = os.path.join(self.dir, 'keys.bin')
        save_dataset(dataset(2000), keys)
        plan = os.path.join(self.dir, 'plan.json')
        with open(plan, 'w') as f:
            json.dump({'data'    : {'files': [keys]},
                       'workload': {'kinds': ['balanced'], 'op_count': 200},
                       'indexes' : {'names': ['chain', 'btree']}}, f)
        out = os.path.join(self.dir, 'heatmap.csv')
        Bench.heatmap(plan, out)
        with open(out, newline='') as f:
            rows = list(csv.reader(f))
        assert len(rows)==2 and rows[1][2]=='balanced'
        assert rows[1][3]=='chain' and rows[1][4]=='btree'

    def test_heatmap_toml_plan(self):
        '''TOML plans are read by their extension.'''
        keys = os.path.join(self.dir, 'keys.bin')
        save_dataset(dataset(2000), keys)
        plan = os.path.join(self.dir, 'plan.toml')
        with open(plan, 'w') as f:
            f.write('[data]\n'
                    f"files = ['{keys}']\n"
                    '[workload]\n'
                    'kinds = ["read_only"]\n'
                    'op_count = 200\n'
                    '[indexes]\n'
                    'names = ["gapped", "btree"]\n')
        assert load_plan(plan)['workload']['kinds']==['read_only']

        out = os.path.join(self.dir, 'heatmap.csv')
        Bench.heatmap(plan=plan, out=out)
        with open(out, newline='') as f:
            rows = list(csv.reader(f))
        assert len(rows)==2 and rows[1][2]=='read_only'
        assert rows[1][3]=='gapped' and rows[1][4]=='btree'
