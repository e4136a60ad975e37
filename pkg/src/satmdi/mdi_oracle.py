"""Monte-Carlo ground truth for the MDI-QKD gain and error closed forms.

Each trial draws the two parties' bits and the relative optical phase of
their phase-randomised coherent pulses, propagates the (loss-attenuated)
mode amplitudes through the beam splitter and polarising splitters, and
draws threshold clicks with dark counts on the four detectors. Given the
phase, photon numbers in each output mode are Poisson, so a detector
clicks with probability ``1 - (1 - y0) exp(-mean)``. This keeps the
two-pulse interference that independent photon routing would miss.

The single-photon oracle instead propagates exactly one photon per side
and samples the two-photon output distribution from the permanent-based
amplitudes, so it arbitrates the infinite-decoy Y11 and e11 expressions.

Trials run in a fixed number of batches with seeds spawned from one
:class:`numpy.random.SeedSequence`, so output is reproducible per seed.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .mdi_rate import IntensitySetting, ProtocolParams

_BATCH = 1 << 20
# detector order: (c,H), (c,V), (d,H), (d,V)
_MODES = 4


@dataclass(frozen=True)
class OracleEstimate:
    value: float
    stderr: float
    count: int


def _pol(basis: str, bits):
    """Polarisation amplitudes (H, V) for bit arrays in the given basis."""
    bits = np.asarray(bits)
    if basis == "Z":
        return np.stack([(bits == 0).astype(float), (bits == 1).astype(float)], axis=-1)
    s = np.sqrt(0.5)
    return np.stack([np.full(bits.shape, s), np.where(bits == 0, s, -s)], axis=-1)


def _success_and_error(clicks, bit_a, bit_b, basis, flip):
    """Bell-state announcement and sifted-bit error from a (n, 4) click array."""
    cH, cV, dH, dV = clicks.T
    n_clicks = clicks.sum(axis=1)
    one_h = (cH ^ dH)
    one_v = (cV ^ dV)
    success = (n_clicks == 2) & one_h & one_v
    psi_minus = (cH & dV) | (cV & dH)
    same = bit_a == bit_b
    if basis == "Z":
        error = same
    else:
        error = np.where(psi_minus, same, ~same)
    error = error ^ flip
    return success, success & error


def _coherent_batch(rng, n, basis, la, lb, y0, ed):
    bit_a = rng.integers(0, 2, n)
    bit_b = rng.integers(0, 2, n)
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    amp_a = np.sqrt(la) * _pol(basis, bit_a)
    amp_b = np.sqrt(lb) * _pol(basis, bit_b) * np.exp(1j * theta)[:, None]
    c = (amp_a + amp_b) / np.sqrt(2.0)
    d = (amp_a - amp_b) / np.sqrt(2.0)
    means = np.abs(np.stack([c[:, 0], c[:, 1], d[:, 0], d[:, 1]], axis=-1)) ** 2
    p_click = -np.expm1(np.log1p(-y0) - means)
    clicks = rng.random((n, _MODES)) < p_click
    flip = rng.random(n) < ed
    return _success_and_error(clicks, bit_a, bit_b, basis, flip)


def _run(trials: int, seed: int, batch_fn):
    n_batches = -(-trials // _BATCH)
    children = np.random.SeedSequence(seed).spawn(n_batches)
    successes = errors = 0
    for i, child in enumerate(children):
        n = min(_BATCH, trials - i * _BATCH)
        s, e = batch_fn(np.random.default_rng(child), n)
        successes += int(s.sum())
        errors += int(e.sum())
    return successes, errors


def _estimates(trials, successes, errors):
    q = successes / trials
    e = errors / successes if successes else 0.0
    se_q = np.sqrt(q * (1 - q) / trials)
    se_e = np.sqrt(e * (1 - e) / successes) if successes else 0.0
    return OracleEstimate(q, float(se_q), successes), OracleEstimate(e, float(se_e), errors)


def _validate(eta_a, eta_b, trials):
    if trials < 100_000:
        raise DomainError("the oracle needs at least 1e5 trials")
    if not (0 <= eta_a <= 1 and 0 <= eta_b <= 1):
        raise DomainError("transmittance outside [0, 1]")


def mc_oracle_gains(setting: IntensitySetting, eta_a: float, eta_b: float,
                    protocol: ProtocolParams, trials: int = 10_000_000, seed: int = 0) -> dict:
    """Simulated (q_z, e_z, q_x, e_x) with binomial standard errors.

    ``trials`` pulse pairs are simulated in each basis.
    """
    _validate(eta_a, eta_b, trials)
    la, lb = setting.mu_a * eta_a, setting.mu_b * eta_b
    out = {}
    z_seed, x_seed = np.random.SeedSequence(seed).spawn(2)
    for basis, ss in (("Z", z_seed), ("X", x_seed)):
        s, e = _run(trials, ss.generate_state(1)[0],
                    lambda rng, n: _coherent_batch(rng, n, basis, la, lb, protocol.y_0, protocol.e_d))
        q_est, e_est = _estimates(trials, s, e)
        key = basis.lower()
        out[f"q_{key}"] = q_est
        out[f"e_{key}"] = e_est
    return out


def _two_photon_table(basis: str):
    """P(output mode pair | bit_a, bit_b) for one photon per input port."""
    table = {}
    for ba, bb in itertools.product((0, 1), repeat=2):
        pa = _pol(basis, ba)
        pb = _pol(basis, bb)
        # a† -> (c† + d†)/√2, b† -> (c† - d†)/√2, per polarisation
        va = np.array([pa[0], pa[1], pa[0], pa[1]]) / np.sqrt(2.0)
        vb = np.array([pb[0], pb[1], -pb[0], -pb[1]]) / np.sqrt(2.0)
        coef = np.outer(va, vb)
        probs = {}
        for m in range(_MODES):
            for k in range(m, _MODES):
                if m == k:
                    probs[(m, k)] = 2.0 * abs(coef[m, m]) ** 2
                else:
                    probs[(m, k)] = abs(coef[m, k] + coef[k, m]) ** 2
        table[(ba, bb)] = probs
    return table


def _single_photon_batch(rng, n, basis, table, eta_a, eta_b, y0, ed):
    bit_a = rng.integers(0, 2, n)
    bit_b = rng.integers(0, 2, n)
    surv_a = rng.random(n) < eta_a
    surv_b = rng.random(n) < eta_b
    clicks = np.zeros((n, _MODES), dtype=bool)

    both = surv_a & surv_b
    pairs = list(table[(0, 0)].keys())
    u = rng.random(n)
    for ba, bb in itertools.product((0, 1), repeat=2):
        sel = both & (bit_a == ba) & (bit_b == bb)
        cdf = np.cumsum([table[(ba, bb)][p] for p in pairs])
        idx = np.minimum(np.searchsorted(cdf, u[sel] * cdf[-1], side="right"), len(pairs) - 1)
        rows = np.flatnonzero(sel)
        pair_arr = np.array(pairs)[idx]
        clicks[rows, pair_arr[:, 0]] = True
        clicks[rows, pair_arr[:, 1]] = True

    # lone photon: random output port, polarisation projected at the PBS
    for surv, other, bits in ((surv_a, surv_b, bit_a), (surv_b, surv_a, bit_b)):
        alone = surv & ~other
        rows = np.flatnonzero(alone)
        pol = _pol(basis, bits[rows])
        is_v = rng.random(rows.size) < pol[:, 1] ** 2
        port_d = rng.random(rows.size) < 0.5
        clicks[rows, 2 * port_d + is_v] = True

    clicks |= rng.random((n, _MODES)) < y0
    flip = rng.random(n) < ed
    return _success_and_error(clicks, bit_a, bit_b, basis, flip)


def mc_oracle_single_photon(eta_a: float, eta_b: float, protocol: ProtocolParams,
                            trials: int = 10_000_000, seed: int = 0) -> dict:
    """Simulated Z-basis Y11 and X-basis e11 with exactly one photon per side."""
    _validate(eta_a, eta_b, trials)
    out = {}
    z_seed, x_seed = np.random.SeedSequence(seed).spawn(2)
    for basis, ss in (("Z", z_seed), ("X", x_seed)):
        table = _two_photon_table(basis)
        s, e = _run(trials, ss.generate_state(1)[0],
                    lambda rng, n: _single_photon_batch(rng, n, basis, table, eta_a, eta_b,
                                                        protocol.y_0, protocol.e_d))
        q_est, e_est = _estimates(trials, s, e)
        out[f"y_11_{basis.lower()}"] = q_est
        out[f"e_11_{basis.lower()}"] = e_est
    return out
