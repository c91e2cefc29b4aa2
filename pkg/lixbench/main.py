'''Entry for ``lixbench`` command line.'''
import csv
import json
import logging
import sys
from .common.Dataset import (load_dataset, save_dataset)
from .datagen.Generator import (GenSpec, generate)
from .pla.hardness import (hardness_profile, hardness_table, mse_hardness)
from .common.constants import (GLOBAL_EPSILON, LOCAL_EPSILON)
from .bench.Benchmark import Benchmark
from .bench.IndexFactory import IndexFactory
from .bench.Workload import WorkloadSpec
from .bench.Heatmap import (load_plan, run_plan, emit_heatmap)


def _dataset(keys:str=None, gen=None, seed:int=0):
    '''Dataset from a key file, or generated from ``G,L,N`` hardness targets and key count.'''
    if keys: return load_dataset(keys)
    if not gen:
        raise ValueError('Either a key file (--keys) or generation targets (--gen=G,L,N) must be given.')
    if isinstance(gen, str): gen = gen.split(',')
    g, l, n = map(int, gen)
    return generate(GenSpec(n_keys=n, target_global=g, target_local=l, seed=seed))


def _write_json(data, filename:str=None):
    text = json.dumps(data, indent=4)
    if not filename:
        print(text)
    else:
        with open(filename, 'w', encoding='utf-8') as f:
            f.write(text)
        logging.info('Results written to %s', filename)


class Bench:
    '''Benchmark commands.'''

    @staticmethod
    def run(index:str='gapped',
            workload:str='read_intensive',
            keys:str=None,
            gen=None,
            threads:int=1,
            ops:int=100000,
            seed:int=0,
            repetitions:int=3,
            out:str=None,
            **kwargs):
        '''Run a workload on an index and report throughput, latency, counters and memory.

        Args:
            index (str): Index name, ``gapped``, ``gapped-m``, ``chain`` or ``btree``.
            workload (str): Workload kind, e.g. ``read_only``, ``balanced``, ``delete_mix``, ``ycsb_a``.
            keys (str, optional): Key file to read from.
            gen (str, optional): Generate the dataset instead, e.g. --gen=2,8,100000.
            threads (int, optional): Worker threads. Defaults to 1.
            ops (int, optional): Operations per repetition.
            seed (int, optional): Seed of data generation and workload.
            repetitions (int, optional): Runs averaged. Defaults to 3.
            out (str, optional): JSON report file. Print the report if omitted.
            kwargs (dict): Index settings, e.g. --avg_density=0.5.
        '''
        try:
            dataset = _dataset(keys, gen, seed)
            spec = WorkloadSpec(kind=workload, op_count=ops, thread_count=threads,
                                repetitions=repetitions, seed=seed)
            report = Benchmark().run(IndexFactory.builder(index, **kwargs), spec, dataset)
        except Exception as e:
            logging.error(e)
        else:
            _write_json(report.store(), out)


    @staticmethod
    def heatmap(plan:str, out:str='heatmap.csv'):
        '''Run a benchmark plan and write the hardness heatmap.

        Args:
            plan (str): Plan file, TOML (``.toml``) or JSON, e.g. --plan plan.toml.
            out (str, optional): CSV file to write. Defaults to ``heatmap.csv``.
        '''
        try:
            cells = run_plan(load_plan(plan))
            emit_heatmap(cells, out)
        except Exception as e:
            logging.error(e)
        else:
            logging.info('Heatmap written to %s', out)


    @staticmethod
    def shift(index:str='gapped',
              keys:str=None,
              gen=None,
              insert_keys:str=None,
              insert_gen=None,
              threads:int=1,
              ops:int=100000,
              seed:int=0,
              repetitions:int=3,
              out:str=None):
        '''Balanced workload whose inserts come from another dataset scaled to the same domain.

        Args:
            index (str): Index name.
            keys (str, optional): Key file to bulk load from.
            gen (str, optional): Generation targets of the bulk dataset, e.g. --gen=1,8,100000.
            insert_keys (str, optional): Key file of the inserted keys.
            insert_gen (str, optional): Generation targets of the inserted keys.
            out (str, optional): JSON file with both reports and the relative change.
        '''
        try:
            bulk_ds = _dataset(keys, gen, seed)
            insert_ds = _dataset(insert_keys, insert_gen, seed+1)
            spec = WorkloadSpec(kind='balanced', op_count=ops, thread_count=threads,
                                repetitions=repetitions, seed=seed)
            baseline, shifted, change = Benchmark().run_data_shift(
                IndexFactory.builder(index), bulk_ds, insert_ds, spec)
        except Exception as e:
            logging.error(e)
        else:
            _write_json({'baseline': baseline.store(), 'shifted': shifted.store(), 'change': change}, out)


    @staticmethod
    def scan(index:str='gapped', keys:str=None, gen=None, sizes:list=None, count:int=10000,
             seed:int=0, out:str=None):
        '''Keys scanned per second for range scans of increasing size.

        Args:
            index (str): Index name.
            keys (str, optional): Key file.
            gen (str, optional): Generation targets, e.g. --gen=1,8,100000.
            sizes (list, optional): Scan sizes, e.g. --sizes=10,100. Defaults to 10, 100, 1000, 10000.
            count (int, optional): Scans per size.
        '''
        if isinstance(sizes, int): sizes = [sizes] # in case --sizes=10
        try:
            dataset = _dataset(keys, gen, seed)
            res = Benchmark().run_range_sweep(IndexFactory.builder(index), dataset, sizes, seed,
                                              scan_count=count)
        except Exception as e:
            logging.error(e)
        else:
            _write_json(res, out)


    @staticmethod
    def stats(keys:str=None, gen=None, indexes:list=None, ops:int=None, seed:int=0, out:str=None):
        '''Mean nodes traversed, keys shifted, nodes created and time per insert phase of each index.

        Args:
            keys (str, optional): Key file.
            gen (str, optional): Generation targets, e.g. --gen=1,8,100000.
            indexes (list, optional): Index names. Defaults to all.
            ops (int, optional): Inserts after bulk loading half of the keys. Defaults to the other half.
        '''
        if isinstance(indexes, str): indexes = [indexes] # in case --indexes=chain
        try:
            dataset = _dataset(keys, gen, seed)
            bench = Benchmark()
            res = {name: bench.insert_stats(IndexFactory.builder(name), dataset, ops, seed)
                   for name in (indexes or IndexFactory.names())}
        except Exception as e:
            logging.error(e)
        else:
            _write_json(res, out)


class LIXBENCH:
    '''Command line interface for ``lixbench``.'''

    bench = Bench

    @staticmethod
    def hardness(keys:str, epsilon=None, out:str=None):
        '''Optimal PLA segment counts of a key file, plus its hardness profile and MSE.

        Args:
            keys (str): Key file to read from.
            epsilon (int|list, optional): Error bounds, e.g. --epsilon=32 or --epsilon=32,4096.
                Defaults to 32 and 4096.
            out (str, optional): CSV file with columns ``epsilon,segments``. Print if omitted.
        '''
        epsilons = [epsilon] if isinstance(epsilon, int) else epsilon
        try:
            d = load_dataset(keys)
            table = hardness_table(d, epsilons or [LOCAL_EPSILON, GLOBAL_EPSILON])
            profile = hardness_profile(d)
            mse = mse_hardness(d)
        except Exception as e:
            logging.error(e)
            return

        f = open(out, 'w', newline='', encoding='utf-8') if out else sys.stdout
        try:
            writer = csv.writer(f)
            writer.writerow(['epsilon', 'segments'])
            writer.writerows(table)
        finally:
            if out: f.close()
        logging.info('Hardness (global, local): (%d, %d), MSE of one line: %.4g',
                     profile.global_h, profile.local_h, mse)


    @staticmethod
    def generate(out:str=None, n:int=1000000, seed:int=0,
                 epsilon_global:int=GLOBAL_EPSILON, epsilon_local:int=LOCAL_EPSILON, **targets):
        '''Generate a key file with target global and local hardness, e.g.
        ``lixbench generate --n 100000 --global 2 --local 64 --seed 1 --out keys.bin``.

        Args:
            out (str): Key file to write.
            n (int, optional): Number of keys. Defaults to 1M.
            seed (int, optional): Random seed.
            targets (dict): ``--global G`` and ``--local L``, target segment counts at the
                global and local error bounds.
        '''
        try:
            unknown = set(targets) - {'global', 'local'}
            if unknown:
                raise ValueError(f'Unknown options: {", ".join(sorted(unknown))}.')
            if not out or 'global' not in targets or 'local' not in targets:
                raise ValueError('Expect --out, --global and --local.')
            spec = GenSpec(n_keys=n, target_global=int(targets['global']),
                           target_local=int(targets['local']),
                           epsilon_global=epsilon_global, epsilon_local=epsilon_local, seed=seed)
            d = generate(spec)
            save_dataset(d, out)
            profile = hardness_profile(d, epsilon_global, epsilon_local)
        except Exception as e:
            logging.error(e)
        else:
            logging.info('%d keys written to %s, hardness (global, local): (%d, %d)',
                         len(d), out, profile.global_h, profile.local_h)


def main():
    '''Command line entry.'''
    import fire
    fire.Fire(LIXBENCH)


if __name__ == '__main__':
    main()
