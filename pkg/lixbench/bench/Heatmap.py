'''Hardness heatmap: which index family wins for each (global, local) hardness and workload.

A plan file (TOML, or JSON with the same layout) lists the datasets, the workloads and
the indexes::

    [data]
    n_keys = 100000
    grid = [[1, 8], [2, 16], [4, 64]]
    files = []
    seed = 0

    [workload]
    kinds = ["read_only", "balanced", "write_only"]
    op_count = 20000
    threads = 1
    repetitions = 1

    [indexes]
    names = ["gapped", "chain", "btree"]

``grid`` holds generated (global, local) hardness targets of ``n_keys`` keys each;
``files`` are key files used as they are.

Every cell reports the measured hardness of its dataset, the throughput of every index and
the signed winner ratio: ``+r`` when the best learned index is ``r`` times faster than the
best traditional one, ``-r`` when the traditional one wins by ``r``.
'''

import csv
import json
import logging
import os
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError: # python < 3.11
    import tomli as tomllib

from ..common.Dataset import load_dataset
from ..common.share import color_output
from ..datagen.Generator import (GenSpec, generate)
from ..pla.hardness import hardness_profile
from .IndexFactory import IndexFactory
from .Workload import WorkloadSpec
from .Benchmark import (Benchmark, BenchmarkException)


COLUMNS = ['global_h', 'local_h', 'workload', 'best_learned', 'best_traditional', 'ratio']


@dataclass
class HeatmapCell:
    '''Results of all indexes on one dataset under one workload.'''
    global_h: int
    local_h: int
    workload: str
    throughputs: dict = field(default_factory=dict) # index name -> ops/s
    families: dict = field(default_factory=dict)    # index name -> 'learned' | 'traditional'

    def add(self, name:str, family:str, throughput:float):
        self.throughputs[name] = throughput
        self.families[name] = family


    def best(self, family:str):
        '''Name of the fastest index of a family, or ``None``.'''
        names = [n for n, f in self.families.items() if f==family]
        return max(names, key=self.throughputs.get) if names else None


    @property
    def ratio(self):
        '''Signed winner ratio, positive when the learned family wins.'''
        learned, traditional = self.best('learned'), self.best('traditional')
        if learned is None or traditional is None:
            raise HeatmapException(
                f'Incomplete cell ({self.global_h}, {self.local_h}, {self.workload}): ' \
                'expect at least one learned and one traditional index.')
        a, b = self.throughputs[learned], self.throughputs[traditional]
        if a <= 0 or b <= 0:
            raise HeatmapException('Throughputs must be positive.')
        return a / b if a >= b else -(b / a)


def emit_heatmap(cells:list, filename:str):
    '''Write one CSV row per cell: hardness, workload, winners, signed ratio, then one
    ``<index>_ops_s`` column per index name in alphabetical order.'''
    names = sorted({name for cell in cells for name in cell.throughputs})
    with open(filename, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(COLUMNS + [f'{name}_ops_s' for name in names])
        for cell in cells:
            ratio = cell.ratio
            writer.writerow(
                [cell.global_h, cell.local_h, cell.workload,
                 cell.best('learned'), cell.best('traditional'), f'{ratio:.4f}'] + \
                [f'{cell.throughputs[n]:.1f}' if n in cell.throughputs else '' for n in names])


# -------------------------------------
# plan
# -------------------------------------
def load_plan(filename:str):
    '''Load a benchmark plan from specified TOML file, or JSON file for any other extension.'''
    if os.path.splitext(filename)[1].lower()=='.toml':
        with open(filename, 'rb') as f:
            return tomllib.load(f)
    with open(filename, 'r', encoding='utf-8') as f:
        return json.load(f)


def _plan_datasets(plan:dict):
    data = plan.get('data', {})
    for path in data.get('files', []):
        yield path, load_dataset(path)
    for g, l in data.get('grid', []):
        spec = GenSpec(n_keys=data.get('n_keys', 100000), target_global=g, target_local=l,
                       seed=data.get('seed', 0))
        yield f'gen({g},{l})', generate(spec)


def run_plan(plan:dict, **kwargs):
    '''Run every workload of the plan with every index on every dataset.

    Args:
        plan (dict): Parsed plan, see the module documentation.
        kwargs (dict, optional): Benchmark settings.

    Returns:
        list: One :py:class:`HeatmapCell` per dataset and workload.
    '''
    wl = plan.get('workload', {})
    kinds = wl.get('kinds', ['read_only', 'balanced', 'write_only'])
    names = plan.get('indexes', {}).get('names', ['gapped', 'chain', 'btree'])
    factories = {name: IndexFactory.builder(name) for name in names}
    bench = Benchmark()

    cells = []
    for label, dataset in _plan_datasets(plan):
        profile = hardness_profile(dataset)
        logging.info(color_output('Dataset %s: %d keys, hardness (%d, %d)'),
                     label, len(dataset), profile.global_h, profile.local_h)
        for kind in kinds:
            cell = HeatmapCell(profile.global_h, profile.local_h, kind)
            spec = WorkloadSpec(kind=kind,
                                op_count=wl.get('op_count', 20000),
                                thread_count=wl.get('threads', 1),
                                repetitions=wl.get('repetitions', 1),
                                seed=wl.get('seed', 0))
            for name, factory in factories.items():
                try:
                    report = bench.run(factory, spec, dataset, **kwargs)
                except BenchmarkException as e:
                    logging.error('Ignore %s on %s (%s): %s', name, label, kind, e)
                    continue
                family = IndexFactory.create(name).family
                cell.add(name, family, report.throughput_ops_s)
            cells.append(cell)
    return cells


class HeatmapException(Exception):
    pass
