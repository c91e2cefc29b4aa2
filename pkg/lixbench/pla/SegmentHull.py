'''Streaming ε-feasibility test of a run of CDF points.

A run of points ``(x_i, y_i)`` (key, rank) admits a line within vertical distance ``ε``
of every point iff the slope range::

    s_max = max_{a<b} (y_b - ε - (y_a + ε)) / (x_b - x_a)
    s_min = min_{a<b} (y_b + ε - (y_a - ε)) / (x_b - x_a)

is not empty, i.e. ``s_max <= s_min``. For a fixed slope ``s`` the feasible intercepts
are ``[max(y_i - ε - s x_i), min(y_i + ε - s x_i)]``, which is non-empty for every
``s`` in that range.

Only two convex chains are needed to extend both bounds with a new point on the right:

* the lower hull of the upper points ``U_i = (x_i, y_i + ε)``: the new ``s_max``
  candidate is the tangent from the new lower point to this chain;
* the upper hull of the lower points ``L_i = (x_i, y_i - ε)``: the new ``s_min``
  candidate is the tangent from the new upper point to this chain.

Both tangents are found by binary search. All arithmetic runs on Python integers
(slopes are kept as ``(dy, dx)`` pairs and compared by cross multiplication), so
64-bit keys never lose precision and ties at exactly ``2ε`` count as feasible.
'''

from fractions import Fraction
from ..common.LinearModel import LinearModel


def _cross(o, a, b):
    '''Cross product of ``o->a`` and ``o->b``: positive if ``b`` lies left of ``o->a``.'''
    return (a[0]-o[0])*(b[1]-o[1]) - (a[1]-o[1])*(b[0]-o[0])


def _le(s1, s2):
    '''``s1 <= s2`` for slopes given as ``(dy, dx)`` with ``dx > 0``.'''
    return s1[0]*s2[1] <= s2[0]*s1[1]


def _tangent(chain:list, p:tuple, lower:bool):
    '''Vertex of ``chain`` touched by the tangent from ``p``, which lies right of every vertex.

    For a lower chain this vertex maximizes the slope to ``p``, for an upper chain it
    minimizes it: the first edge whose supporting line passes on or above (lower chain)
    or on or below (upper chain) the point.
    '''
    lo, hi = 0, len(chain)-1 # search over edges [lo, hi)
    while lo < hi:
        mid = (lo+hi) // 2
        c = _cross(chain[mid], chain[mid+1], p)
        if (c<=0) if lower else (c>=0):
            hi = mid
        else:
            lo = mid + 1
    return chain[lo]


class SegmentHull:
    '''Points of one candidate segment, added in increasing key order.'''

    def __init__(self, epsilon:int, start_rank:int=0):
        '''Empty segment.

        Args:
            epsilon (int): Maximum vertical distance of any point to the segment model.
            start_rank (int, optional): Rank of the first point. Defaults to 0.
        '''
        if epsilon < 0:
            raise ValueError(f'Epsilon must be non-negative: {epsilon}.')
        self.epsilon = int(epsilon)
        self.start_rank = start_rank
        self.count = 0
        self.origin = None      # first key, x coordinates are relative to it
        self.last_key = None
        self.last_rank = None
        self._upper = []        # lower hull of (x, y+ε)
        self._lower = []        # upper hull of (x, y-ε)
        self._smax = None       # (dy, dx), None for -inf
        self._smin = None       # (dy, dx), None for +inf


    def __len__(self): return self.count


    @property
    def bounded(self):
        '''Whether every feasible line has a positive slope, i.e. the feasible keys for a
        next rank are bounded on the right.'''
        return self._smax is not None and self._smax[0] > 0


    def _probe(self, key:int, rank:int):
        '''Slope bounds after adding ``(key, rank)``, or ``None`` if infeasible.'''
        if key <= self.last_key:
            raise ValueError(f'Keys must be strictly increasing: {key} after {self.last_key}.')
        x = key - self.origin
        up, low = (x, rank+self.epsilon), (x, rank-self.epsilon)

        a = _tangent(self._upper, low, lower=True)
        b = _tangent(self._lower, up, lower=False)
        smax = (low[1]-a[1], low[0]-a[0])
        smin = (up[1]-b[1], up[0]-b[0])
        if self._smax is not None and _le(smax, self._smax): smax = self._smax
        if self._smin is not None and _le(self._smin, smin): smin = self._smin

        return (smax, smin) if _le(smax, smin) else None


    def can_add(self, key:int, rank:int):
        '''Whether ``(key, rank)`` keeps the segment feasible, without changing it.'''
        if self.count==0: return True
        return self._probe(key, rank) is not None


    def add(self, key:int, rank:int=None):
        '''Extend the segment with ``(key, rank)`` if it stays feasible.

        Args:
            key (int): Key larger than every key added so far.
            rank (int, optional): Rank of the key. Defaults to the rank following the last point.

        Returns:
            bool: ``True`` if added; ``False`` leaves the segment unchanged.
        '''
        if rank is None:
            rank = self.start_rank if self.count==0 else self.last_rank + 1

        if self.count==0:
            self.origin = key
        else:
            bounds = self._probe(key, rank)
            if bounds is None: return False
            self._smax, self._smin = bounds

        x = key - self.origin
        up, low = (x, rank+self.epsilon), (x, rank-self.epsilon)
        while len(self._upper)>=2 and _cross(self._upper[-2], self._upper[-1], up)<=0:
            self._upper.pop()
        self._upper.append(up)
        while len(self._lower)>=2 and _cross(self._lower[-2], self._lower[-1], low)>=0:
            self._lower.pop()
        self._lower.append(low)

        self.count += 1
        self.last_key = key
        self.last_rank = rank
        return True


    # -----------------------------------------------
    # segment model
    # -----------------------------------------------
    def exact_model(self):
        '''Exact ``(slope, intercept)`` as fractions, relative to :py:attr:`origin`.

        Slope is the mean of the extreme feasible slopes (lower one clamped at zero),
        intercept the middle of the feasible intercept range for that slope.
        '''
        if self.count==0:
            raise ValueError('Model of an empty segment.')
        if self.count==1:
            return Fraction(0), Fraction(self.last_rank)

        s_hi = Fraction(*self._smin)
        s_lo = max(Fraction(*self._smax), Fraction(0))
        s = (s_lo + s_hi) / 2
        b_lo = max(y - s*x for x, y in self._lower)
        b_hi = min(y - s*x for x, y in self._upper)
        return s, (b_lo + b_hi) / 2


    def model(self):
        '''Segment model with float parameters.'''
        s, b = self.exact_model()
        return LinearModel(float(s), float(b), self.origin)
