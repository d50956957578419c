# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Monte-Carlo core.

Every trial owns a keyed Philox4x32-10 counter stream addressed by
(seed, purpose tag, trial index, block index), so draws depend only on
those coordinates: results are identical for any thread count, chunking,
or call order.  One 128-bit block yields two 53-bit uniforms, which feed
a fixed-consumption Box-Muller step; per-element channel moduli need the
radius and cosine component only, since the modulus law of a complex
Gaussian depends on its mean only through the magnitude.

Block layout per trial (symbol-error mode): block 0 symbol selector,
blocks 1 .. 2L the two hop coefficients of each element, block 2L+1 the
direct path, block 2L+2 the noise.  Cascade-draw mode uses blocks
0 .. 2L-1 for the two hops only.
"""

from cython.parallel cimport parallel, prange
from libc.math cimport cos, fmax, log, sqrt
from libc.stdint cimport int64_t, uint32_t, uint64_t
from libc.stdlib cimport free, malloc

import numpy as np

cdef double TWO_PI = 6.283185307179586476925287
cdef double INV53 = 1.0 / 9007199254740992.0

cdef uint64_t MUL_A = 0xD2511F53u
cdef uint64_t MUL_B = 0xCD9E8D57u
cdef uint32_t KEY_W0 = 0x9E3779B9u
cdef uint32_t KEY_W1 = 0xBB67AE85u

DEF N_ROUNDS = 10


cdef inline void _fill_blocks(uint64_t seed, uint64_t trial, uint32_t tag, int nb,
                              uint32_t *x0, uint32_t *x1, uint32_t *x2, uint32_t *x3,
                              double *r2, double *rr, double *ua, double *cs) noexcept nogil:
    """Generate nb blocks of one trial and transform them to the radial /
    angular quantities used by every sampler below."""
    cdef uint32_t k0 = <uint32_t>(seed & 0xFFFFFFFFu)
    cdef uint32_t k1 = <uint32_t>(seed >> 32)
    cdef uint32_t tlo = <uint32_t>(trial & 0xFFFFFFFFu)
    cdef uint32_t thi = <uint32_t>(trial >> 32)
    cdef int i, r
    cdef uint64_t p0, p1, v1, v2
    cdef uint32_t t0, t1, t2, t3

    for i in range(nb):
        x0[i] = <uint32_t>i
        x1[i] = tag
        x2[i] = tlo
        x3[i] = thi
    for r in range(N_ROUNDS):
        for i in range(nb):
            p0 = MUL_A * x0[i]
            p1 = MUL_B * x2[i]
            t0 = (<uint32_t>(p1 >> 32)) ^ x1[i] ^ k0
            t1 = <uint32_t>p1
            t2 = (<uint32_t>(p0 >> 32)) ^ x3[i] ^ k1
            t3 = <uint32_t>p0
            x0[i] = t0
            x1[i] = t1
            x2[i] = t2
            x3[i] = t3
        k0 = k0 + KEY_W0
        k1 = k1 + KEY_W1
    for i in range(nb):
        v1 = ((<uint64_t>x0[i] << 32) | x1[i]) >> 11
        v2 = ((<uint64_t>x2[i] << 32) | x3[i]) >> 11
        r2[i] = -2.0 * log(1.0 - <double>v1 * INV53)
        ua[i] = <double>v2 * INV53
    for i in range(nb):
        rr[i] = sqrt(r2[i])
    for i in range(nb):
        cs[i] = cos(TWO_PI * ua[i])


cdef inline double _cascade_sum(int num_el, int first_block,
                                double m1, double m2, double sd,
                                double *r2, double *rr, double *cs) noexcept nogil:
    """Sum over elements of |h1| |h2| from the prepared block transforms."""
    cdef double m1sq = m1 * m1
    cdef double m2sq = m2 * m2
    cdef double a1 = 2.0 * m1 * sd
    cdef double a2 = 2.0 * m2 * sd
    cdef double vv = sd * sd
    cdef double g = 0.0
    cdef double h1sq, h2sq
    cdef int l, b1, b2
    for l in range(num_el):
        b1 = first_block + 2 * l
        b2 = b1 + 1
        h1sq = m1sq + vv * r2[b1] + a1 * rr[b1] * cs[b1]
        h2sq = m2sq + vv * r2[b2] + a2 * rr[b2] * cs[b2]
        g += sqrt(fmax(h1sq * h2sq, 0.0))
    return g


def sep_trials(int64_t trials, int64_t start, uint64_t seed,
               double[::1] amps, double[::1] inv_b, double[::1] half_log_b,
               double mu_f, int num_el, double mu1_abs, double mu2_abs,
               double sigma_h2, bint unblocked, double direct_sd, double noise_sd,
               int force_symbol, int rival_symbol, int num_threads):
    """Count symbol decision errors over ``trials`` independent trials.

    ``force_symbol < 0`` runs the full detector and counts decisions that
    differ from the transmitted symbol; otherwise the given symbol is
    always transmitted and an error is counted whenever the rival symbol's
    metric beats the transmitted one's (conditional pairwise mode, which
    uses its own stream tag so it never shares draws with full runs).
    """
    cdef int n_sym = amps.shape[0]
    cdef int nb = 2 * num_el + 3
    cdef double sd = sqrt(sigma_h2 / 2.0)
    cdef uint32_t tag = 2 if force_symbol >= 0 else 0
    cdef int64_t errors = 0
    cdef int64_t i
    cdef int sym, best, k
    cdef double g, r, diff, score, best_score, m_tx, m_rv
    cdef uint32_t *bx0
    cdef uint32_t *bx1
    cdef uint32_t *bx2
    cdef uint32_t *bx3
    cdef double *br2
    cdef double *brr
    cdef double *bua
    cdef double *bcs

    if num_threads < 1:
        num_threads = 1
    with nogil, parallel(num_threads=num_threads):
        bx0 = <uint32_t *>malloc(nb * sizeof(uint32_t))
        bx1 = <uint32_t *>malloc(nb * sizeof(uint32_t))
        bx2 = <uint32_t *>malloc(nb * sizeof(uint32_t))
        bx3 = <uint32_t *>malloc(nb * sizeof(uint32_t))
        br2 = <double *>malloc(nb * sizeof(double))
        brr = <double *>malloc(nb * sizeof(double))
        bua = <double *>malloc(nb * sizeof(double))
        bcs = <double *>malloc(nb * sizeof(double))
        for i in prange(trials, schedule="static"):
            _fill_blocks(seed, <uint64_t>(start + i), tag, nb,
                         bx0, bx1, bx2, bx3, br2, brr, bua, bcs)
            if force_symbol >= 0:
                sym = force_symbol
            else:
                sym = <int>(bua[0] * n_sym)
            g = _cascade_sum(num_el, 1, mu1_abs, mu2_abs, sd, br2, brr, bcs)
            if unblocked:
                g = g + direct_sd * (brr[2 * num_el + 1] * bcs[2 * num_el + 1])
            r = g * amps[sym] + noise_sd * (brr[2 * num_el + 2] * bcs[2 * num_el + 2])
            if force_symbol >= 0:
                diff = r - mu_f * amps[sym]
                m_tx = diff * diff * inv_b[sym] + half_log_b[sym]
                diff = r - mu_f * amps[rival_symbol]
                m_rv = diff * diff * inv_b[rival_symbol] + half_log_b[rival_symbol]
                if m_rv < m_tx:
                    errors += 1
            else:
                best = 0
                diff = r - mu_f * amps[0]
                best_score = diff * diff * inv_b[0] + half_log_b[0]
                for k in range(1, n_sym):
                    diff = r - mu_f * amps[k]
                    score = diff * diff * inv_b[k] + half_log_b[k]
                    if score < best_score:
                        best_score = score
                        best = k
                if best != sym:
                    errors += 1
        free(bx0)
        free(bx1)
        free(bx2)
        free(bx3)
        free(br2)
        free(brr)
        free(bua)
        free(bcs)
    return errors


def cascade_gains(int64_t ndraws, int64_t start, uint64_t seed,
                  int num_el, double sigma_h2,
                  double[::1] mu1_abs, double[::1] mu2_abs, int num_threads):
    """Exact cascade-gain draws, one row per (mu1, mu2) cell.

    All cells share the same underlying standard draws (they differ only
    in the hop means), so a multi-cell call costs little more than a
    single-cell one.  Returns an array of shape (ncells, ndraws).
    """
    cdef int ncells = mu1_abs.shape[0]
    cdef int nb = 2 * num_el
    cdef double sd = sqrt(sigma_h2 / 2.0)
    out = np.empty((ncells, ndraws), dtype=np.float64)
    cdef double[:, ::1] om = out
    cdef int64_t i
    cdef int c
    cdef uint32_t *bx0
    cdef uint32_t *bx1
    cdef uint32_t *bx2
    cdef uint32_t *bx3
    cdef double *br2
    cdef double *brr
    cdef double *bua
    cdef double *bcs

    if num_threads < 1:
        num_threads = 1
    with nogil, parallel(num_threads=num_threads):
        bx0 = <uint32_t *>malloc(nb * sizeof(uint32_t))
        bx1 = <uint32_t *>malloc(nb * sizeof(uint32_t))
        bx2 = <uint32_t *>malloc(nb * sizeof(uint32_t))
        bx3 = <uint32_t *>malloc(nb * sizeof(uint32_t))
        br2 = <double *>malloc(nb * sizeof(double))
        brr = <double *>malloc(nb * sizeof(double))
        bua = <double *>malloc(nb * sizeof(double))
        bcs = <double *>malloc(nb * sizeof(double))
        for i in prange(ndraws, schedule="static"):
            _fill_blocks(seed, <uint64_t>(start + i), 1u, nb,
                         bx0, bx1, bx2, bx3, br2, brr, bua, bcs)
            for c in range(ncells):
                om[c, i] = _cascade_sum(num_el, 0, mu1_abs[c], mu2_abs[c], sd,
                                        br2, brr, bcs)
        free(bx0)
        free(bx1)
        free(bx2)
        free(bx3)
        free(br2)
        free(brr)
        free(bua)
        free(bcs)
    return out


def philox_words(int64_t ntrials, int64_t start, uint64_t seed, uint32_t tag, int nb):
    """Raw Philox words for cross-backend equivalence tests."""
    out = np.empty((ntrials, nb, 4), dtype=np.uint32)
    cdef uint32_t[:, :, ::1] om = out
    cdef uint32_t *bx0 = <uint32_t *>malloc(nb * sizeof(uint32_t))
    cdef uint32_t *bx1 = <uint32_t *>malloc(nb * sizeof(uint32_t))
    cdef uint32_t *bx2 = <uint32_t *>malloc(nb * sizeof(uint32_t))
    cdef uint32_t *bx3 = <uint32_t *>malloc(nb * sizeof(uint32_t))
    cdef double *br2 = <double *>malloc(nb * sizeof(double))
    cdef double *brr = <double *>malloc(nb * sizeof(double))
    cdef double *bua = <double *>malloc(nb * sizeof(double))
    cdef double *bcs = <double *>malloc(nb * sizeof(double))
    cdef int64_t i
    cdef int b
    for i in range(ntrials):
        _fill_blocks(seed, <uint64_t>(start + i), tag, nb,
                     bx0, bx1, bx2, bx3, br2, brr, bua, bcs)
        for b in range(nb):
            om[i, b, 0] = bx0[b]
            om[i, b, 1] = bx1[b]
            om[i, b, 2] = bx2[b]
            om[i, b, 3] = bx3[b]
    free(bx0)
    free(bx1)
    free(bx2)
    free(bx3)
    free(br2)
    free(brr)
    free(bua)
    free(bcs)
    return out
