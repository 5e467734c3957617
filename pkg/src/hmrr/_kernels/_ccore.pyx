# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled correlation kernel."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


def correlate_sorted(const double[::1] times, const unsigned char[::1] channels,
                     double window, double bin_width, Py_ssize_t n_bins):
    """Histogram of signed delays t_B - t_A over all cross-channel pairs.

    ``times`` must be sorted ascending.  Pairs with ``|t_B - t_A| <= window``
    land in bin ``floor((tau + window) / bin_width)``, the top edge folded into
    the last bin.
    """
    cdef Py_ssize_t n = times.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double ti, tau
    cdef unsigned char ci
    counts_arr = np.zeros(n_bins, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    with nogil:
        for i in range(n):
            ti = times[i]
            ci = channels[i]
            j = i + 1
            while j < n and times[j] - ti <= window:
                if channels[j] != ci:
                    if ci == 0:
                        tau = times[j] - ti
                    else:
                        tau = ti - times[j]
                    k = <Py_ssize_t>floor((tau + window) / bin_width)
                    if k >= n_bins:
                        k = n_bins - 1
                    elif k < 0:
                        k = 0
                    counts[k] += 1
                j += 1
    return counts_arr
