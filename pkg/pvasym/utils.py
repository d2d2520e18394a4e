import inspect

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from . import config


def parallel(func, items, *args, **kwargs):
    """
    Applies `func` to every element of `items` in parallel using
    `joblib.Parallel`; results keep the order of `items`.

    You can pass any argument to `joblib.Parallel` by using keyword
    arguments; all the others are forwarded to `func`.

    Arguments
    ---------
    func : callable
        the function that will be called; it must accept the item as first
        argument. Then, it can accept all `args` and `kwargs` that are passed
        to this function:

        >>>  def myfunc(x, p, theta, correction=False):
        ...     return evaluate(x, p, theta)
        ... parallel(myfunc, samples, p, theta, n_jobs=4, correction=True)

    Returns
    -------
    list:
        The list of objects returned by each `func`
    """
    joblib_args = [k for k, v in inspect.signature(Parallel).parameters.items()]
    joblib_dict = {
        k: kwargs.pop(k)
        for k in dict(kwargs) if k in joblib_args
    }
    joblib_dict.setdefault('n_jobs', config.get('output', 'n_jobs'))
    disable = kwargs.pop('progress', True) is False

    return Parallel(**joblib_dict)(delayed(func)(item, *args, **kwargs)
                                   for item in tqdm(items, disable=disable))


def real_coordinates(z, e1, e2):
    """
    Solves ``z = a*e1 + b*e2`` for real `a` and `b`, with `e1` and `e2`
    linearly independent over the reals.

    Returns a tuple of two floats!
    """
    mat = np.array([[e1.real, e2.real], [e1.imag, e2.imag]])
    a, b = np.linalg.solve(mat, np.array([z.real, z.imag]))
    return float(a), float(b)


def complex_pair(z):
    """
    Returns ``[re, im]`` of `z` as plain floats (JSON encoding of a complex)
    """
    z = complex(z)
    return [z.real, z.imag]


def parse_complex(text):
    """
    Parses ``"re,im"`` or ``"re"`` into a complex number; used by the
    command line flags.
    """
    parts = [p.strip() for p in str(text).split(',')]
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ValueError("Cannot parse a complex number from " + repr(text))


class Segment(object):
    """
    Unit-speed segment from `a` to `b` in the complex plane; `at` returns
    the point and the unit tangent.
    """

    def __init__(self, a, b):
        self.a, self.b = complex(a), complex(b)
        self.length = abs(self.b - self.a)
        self.direction = ((self.b - self.a) / self.length
                          if self.length > 0 else 1.0 + 0j)

    def at(self, s):
        return self.a + self.direction * s, self.direction


class Arc(object):
    """
    Unit-speed arc ``centre + r e^{i th}`` with th running from `th0` to `th1`
    """

    def __init__(self, centre, radius, th0, th1):
        self.centre, self.radius = complex(centre), radius
        self.th0, self.th1 = th0, th1
        self.length = radius * abs(th1 - th0)
        self.sign = np.sign(th1 - th0)

    def at(self, s):
        th = self.th0 + self.sign * s / self.radius
        e = np.exp(1j * th)
        return self.centre + self.radius * e, 1j * self.sign * e

    def s_at(self, th):
        return self.radius * abs(th - self.th0)
