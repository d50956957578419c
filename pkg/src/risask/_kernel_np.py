"""Pure-numpy fallback for the compiled Monte-Carlo core.

Implements the identical counter-based stream layout and sampling
pipeline as the extension module, vectorized over trials in chunks.
Within one backend results are fully deterministic; across backends the
integer stream matches bit-for-bit and the sampled values agree up to
last-bit differences of the transcendental libraries.
"""

from __future__ import annotations

import math

import numpy as np

_MUL_A = np.uint64(0xD2511F53)
_MUL_B = np.uint64(0xCD9E8D57)
_KEY_W0 = 0x9E3779B9
_KEY_W1 = 0xBB67AE85
_MASK32 = 0xFFFFFFFF
_INV53 = 1.0 / 9007199254740992.0
_N_ROUNDS = 10
_CHUNK = 8192


def _philox_state(seed, tag, trial_ids, nb):
    """Final Philox4x32 words (x0..x3) for all (trial, block) pairs."""
    t = np.asarray(trial_ids, dtype=np.uint64)
    shape = (t.size, nb)
    x0 = np.broadcast_to(np.arange(nb, dtype=np.uint32), shape).copy()
    x1 = np.full(shape, np.uint32(tag), dtype=np.uint32)
    x2 = np.broadcast_to((t & np.uint64(_MASK32)).astype(np.uint32)[:, None], shape).copy()
    x3 = np.broadcast_to((t >> np.uint64(32)).astype(np.uint32)[:, None], shape).copy()
    k0 = _MASK32 & int(seed)
    k1 = _MASK32 & (int(seed) >> 32)
    for _ in range(_N_ROUNDS):
        p0 = _MUL_A * x0.astype(np.uint64)
        p1 = _MUL_B * x2.astype(np.uint64)
        n0 = (p1 >> np.uint64(32)).astype(np.uint32) ^ x1 ^ np.uint32(k0)
        n1 = p1.astype(np.uint32)
        n2 = (p0 >> np.uint64(32)).astype(np.uint32) ^ x3 ^ np.uint32(k1)
        n3 = p0.astype(np.uint32)
        x0, x1, x2, x3 = n0, n1, n2, n3
        k0 = _MASK32 & (k0 + _KEY_W0)
        k1 = _MASK32 & (k1 + _KEY_W1)
    return x0, x1, x2, x3


def _block_transforms(seed, tag, trial_ids, nb):
    """Radial/angular transforms (r2, rr, ua, cs) per (trial, block)."""
    x0, x1, x2, x3 = _philox_state(seed, tag, trial_ids, nb)
    v1 = ((x0.astype(np.uint64) << np.uint64(32)) | x1) >> np.uint64(11)
    v2 = ((x2.astype(np.uint64) << np.uint64(32)) | x3) >> np.uint64(11)
    r2 = -2.0 * np.log(1.0 - v1 * _INV53)
    ua = v2 * _INV53
    return r2, np.sqrt(r2), ua, np.cos(2.0 * np.pi * ua)


def _cascade_sum(num_el, first_block, m1, m2, sd, r2, rr, cs):
    lo = first_block
    hi = first_block + 2 * num_el
    s1 = slice(lo, hi, 2)
    s2 = slice(lo + 1, hi, 2)
    rc1 = rr[:, s1] * cs[:, s1]
    rc2 = rr[:, s2] * cs[:, s2]
    vv = sd * sd
    h1sq = m1 * m1 + vv * r2[:, s1] + (2.0 * m1 * sd) * rc1
    h2sq = m2 * m2 + vv * r2[:, s2] + (2.0 * m2 * sd) * rc2
    return np.sqrt(np.maximum(h1sq * h2sq, 0.0)).sum(axis=1)


def sep_trials(trials, start, seed, amps, inv_b, half_log_b, mu_f, num_el,
               mu1_abs, mu2_abs, sigma_h2, unblocked, direct_sd, noise_sd,
               force_symbol, rival_symbol, num_threads):
    """Error count over ``trials`` trials; see the extension docstring.

    ``num_threads`` is accepted for API parity; the vectorized path runs
    in-process and its result is the same for any value.
    """
    amps = np.ascontiguousarray(amps, dtype=float)
    inv_b = np.ascontiguousarray(inv_b, dtype=float)
    half_log_b = np.ascontiguousarray(half_log_b, dtype=float)
    n_sym = amps.size
    nb = 2 * num_el + 3
    sd = math.sqrt(sigma_h2 / 2.0)
    tag = 2 if force_symbol >= 0 else 0
    errors = 0
    for lo in range(0, int(trials), _CHUNK):
        n = min(_CHUNK, int(trials) - lo)
        ids = np.arange(int(start) + lo, int(start) + lo + n, dtype=np.uint64)
        r2, rr, ua, cs = _block_transforms(seed, tag, ids, nb)
        g = _cascade_sum(num_el, 1, mu1_abs, mu2_abs, sd, r2, rr, cs)
        if unblocked:
            g = g + direct_sd * (rr[:, 2 * num_el + 1] * cs[:, 2 * num_el + 1])
        noise = noise_sd * (rr[:, 2 * num_el + 2] * cs[:, 2 * num_el + 2])
        if force_symbol >= 0:
            sym = np.full(n, int(force_symbol))
        else:
            sym = (ua[:, 0] * n_sym).astype(np.int64)
        r = g * amps[sym] + noise
        if force_symbol >= 0:
            d_tx = r - mu_f * amps[force_symbol]
            d_rv = r - mu_f * amps[rival_symbol]
            m_tx = d_tx * d_tx * inv_b[force_symbol] + half_log_b[force_symbol]
            m_rv = d_rv * d_rv * inv_b[rival_symbol] + half_log_b[rival_symbol]
            errors += int(np.count_nonzero(m_rv < m_tx))
        else:
            d = r[:, None] - mu_f * amps[None, :]
            scores = d * d * inv_b + half_log_b
            best = np.argmin(scores, axis=1)
            errors += int(np.count_nonzero(best != sym))
    return errors


def cascade_gains(ndraws, start, seed, num_el, sigma_h2, mu1_abs, mu2_abs, num_threads):
    """Exact cascade-gain draws, one row per (mu1, mu2) cell."""
    mu1_abs = np.ascontiguousarray(mu1_abs, dtype=float)
    mu2_abs = np.ascontiguousarray(mu2_abs, dtype=float)
    ncells = mu1_abs.size
    nb = 2 * num_el
    sd = math.sqrt(sigma_h2 / 2.0)
    out = np.empty((ncells, int(ndraws)))
    for lo in range(0, int(ndraws), _CHUNK):
        n = min(_CHUNK, int(ndraws) - lo)
        ids = np.arange(int(start) + lo, int(start) + lo + n, dtype=np.uint64)
        r2, rr, _, cs = _block_transforms(seed, 1, ids, nb)
        for c in range(ncells):
            out[c, lo:lo + n] = _cascade_sum(num_el, 0, mu1_abs[c], mu2_abs[c], sd, r2, rr, cs)
    return out


def philox_words(ntrials, start, seed, tag, nb):
    """Raw Philox words for cross-backend equivalence tests."""
    ids = np.arange(int(start), int(start) + int(ntrials), dtype=np.uint64)
    x0, x1, x2, x3 = _philox_state(seed, tag, ids, nb)
    return np.stack([x0, x1, x2, x3], axis=-1)
