'''Linear model mapping a key to a (fractional) position.

The model is anchored at an integer ``origin`` key::

    predict(k) = slope * (k - origin) + intercept

``k - origin`` is computed on Python integers before any conversion, so keys close to
``2^64`` do not cancel out the intercept. ``slope`` and ``intercept`` are floats for the
index hot paths, or ``fractions.Fraction`` when exact arithmetic is required, e.g. by the
data generator.
'''

import numpy as np


class LinearModel:
    '''Slope/intercept pair relative to an origin key.'''

    __slots__ = ('slope', 'intercept', 'origin')

    def __init__(self, slope=0.0, intercept=0.0, origin:int=0):
        self.slope = slope
        self.intercept = intercept
        self.origin = origin


    def __repr__(self):
        return f'LinearModel(slope={self.slope!r}, intercept={self.intercept!r}, origin={self.origin})'


    def __eq__(self, other):
        return isinstance(other, LinearModel) and \
            (self.slope, self.intercept, self.origin)==(other.slope, other.intercept, other.origin)


    def predict(self, key:int):
        '''Predicted position of ``key``.'''
        return self.slope * (key - self.origin) + self.intercept


    def slot(self, key:int, size:int):
        '''Predicted slot of ``key`` in an array of ``size`` slots, clamped to the array.'''
        p = self.slope * (key - self.origin) + self.intercept
        if p <= 0: return 0
        if p >= size: return size - 1
        return int(p)


    def scaled(self, factor):
        '''New model whose predictions are multiplied by ``factor``.'''
        return LinearModel(self.slope*factor, self.intercept*factor, self.origin)


    def store(self):
        '''Store attributes in json format.'''
        return {
            'slope'    : float(self.slope),
            'intercept': float(self.intercept),
            'origin'   : int(self.origin)
        }


    # -----------------------------------------------
    # construction
    # -----------------------------------------------
    @classmethod
    def fit(cls, keys, positions=None):
        '''Least-squares fit of ``positions`` (ranks ``0..n-1`` by default) against ``keys``.

        Args:
            keys (list): Sorted integer keys.
            positions (list, optional): Target positions. Defaults to ranks.

        Returns:
            LinearModel: Model anchored at the first key.
        '''
        n = len(keys)
        if n==0: return cls()
        origin = int(keys[0])
        if n==1: return cls(0.0, 0.0 if positions is None else float(positions[0]), origin)

        x = np.array([int(k) - origin for k in keys], dtype=np.float64)
        y = np.arange(n, dtype=np.float64) if positions is None else np.asarray(positions, dtype=np.float64)
        if x[-1]==x[0]: return cls(0.0, float(y.mean()), origin)
        slope, intercept = np.polyfit(x, y, 1)
        return cls(float(slope), float(intercept), origin)


    @classmethod
    def through(cls, first_key:int, last_key:int, size:int):
        '''Model spreading ``[first_key, last_key]`` evenly over ``size`` slots, such that
        ``first_key`` lands in slot 0 and ``last_key`` in the last slot.'''
        if last_key <= first_key: return cls(0.0, 0.0, first_key)
        slope = (size - 1) / (last_key - first_key)
        return cls(slope, 0.0, first_key)


    @classmethod
    def spanning(cls, first_key:int, end_key:int, size:int):
        '''Model mapping the half-open key range ``[first_key, end_key)`` onto ``size`` slots.'''
        width = max(end_key - first_key, 1)
        return cls(size / width, 0.0, first_key)

