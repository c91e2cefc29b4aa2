'''Optimal ε-approximate piecewise linear approximation (PLA) of a dataset's CDF.

Feasibility is prefix-monotone (any sub-run of a feasible run is feasible), so the
greedy segmentation extending each segment as far as possible is minimal. With the
streaming hull of :py:class:`~lixbench.pla.SegmentHull.SegmentHull` the whole
segmentation runs in ``O(n log n)`` on exact integers.
'''

from dataclasses import dataclass, field
from ..common.LinearModel import LinearModel
from ..common.Dataset import Dataset
from ..common.constants import FEASIBILITY_SLACK
from .SegmentHull import SegmentHull


@dataclass
class PlaSegment:
    '''Ranks ``[start_rank, start_rank+count)`` approximated by ``model``.'''
    start_rank: int
    count: int
    model: LinearModel

    @property
    def end_rank(self): return self.start_rank + self.count

    def store(self):
        return {
            'start_rank': self.start_rank,
            'count'     : self.count,
            'model'     : self.model.store()
        }


@dataclass
class PlaSegmentation:
    '''Minimal list of ε-approximate segments covering ranks ``0..n-1``.'''
    epsilon: int
    segments: list = field(default_factory=list)

    def __len__(self): return len(self.segments)

    def __iter__(self): return iter(self.segments)

    def __getitem__(self, idx): return self.segments[idx]


    def max_error(self, d:Dataset):
        '''Largest ``|model(k) - r|`` over all points of ``d``.'''
        keys = d.key_list
        err = 0.0
        for seg in self.segments:
            for r in range(seg.start_rank, seg.end_rank):
                err = max(err, abs(seg.model.predict(keys[r]) - r))
        return err


    def check(self, d:Dataset):
        '''Whether segments cover ``d`` contiguously and every point is within ε
        (plus float slack) of its segment model.'''
        rank = 0
        for seg in self.segments:
            if seg.start_rank!=rank or seg.count<1: return False
            rank = seg.end_rank
        return rank==len(d) and self.max_error(d) <= self.epsilon + FEASIBILITY_SLACK


    def store(self):
        return {
            'epsilon' : self.epsilon,
            'segments': [seg.store() for seg in self.segments]
        }


# -------------------------------------
# operations
# -------------------------------------
def segment_feasible(points, epsilon:int):
    '''Whether one line fits all points within vertical distance ``epsilon``.

    Args:
        points (iterable): ``(key, rank)`` pairs sorted by key, at least one.
        epsilon (int): Allowed vertical residual.

    Returns:
        bool: ``True`` iff an ε-approximate line exists; runs of one or two points always fit.
    '''
    hull = SegmentHull(epsilon)
    for key, rank in points:
        if not hull.add(key, rank): return False
    return True


def optimal_pla(d:Dataset, epsilon:int):
    '''Minimal ε-approximate segmentation of the CDF of ``d``.

    Args:
        d (Dataset): Non-empty dataset.
        epsilon (int): Maximum rank error of every segment model.

    Returns:
        PlaSegmentation: Contiguous segments over all ranks.
    '''
    if len(d)==0:
        raise ValueError('PLA of an empty dataset.')

    segments = []
    hull = SegmentHull(epsilon, 0)
    for rank, key in enumerate(d.key_list):
        if hull.add(key, rank): continue
        segments.append(PlaSegment(hull.start_rank, hull.count, hull.model()))
        hull = SegmentHull(epsilon, rank)
        hull.add(key, rank)
    segments.append(PlaSegment(hull.start_rank, hull.count, hull.model()))

    return PlaSegmentation(epsilon, segments)


def segment_count(d:Dataset, epsilon:int):
    '''Number of segments of :py:func:`optimal_pla`, without building the models.'''
    if len(d)==0:
        raise ValueError('PLA of an empty dataset.')
    return len(segment_starts(d.key_list, epsilon))


def max_segments(n_keys:int, epsilon:int):
    '''Largest possible optimal segment count of ``n_keys`` keys: any run of ``2*epsilon+1``
    keys fits the flat line through its middle rank.'''
    return -(-n_keys // (2*epsilon + 1))


def segment_starts(keys:list, epsilon:int):
    '''Start ranks of the optimal segments of sorted ``keys``.'''
    starts, hull = [0], SegmentHull(epsilon, 0)
    for rank, key in enumerate(keys):
        if hull.add(key, rank): continue
        starts.append(rank)
        hull = SegmentHull(epsilon, rank)
        hull.add(key, rank)
    return starts
