"""Shared generators for randomized test suites."""

import numpy as np

from angleguard import DiscreteSignal, LtiSystem


def random_complex_matrix(rng, n, kind=0):
    """Mixed matrix families: dense Ginibre, rotated near-identity, normal."""
    if kind % 3 == 0:
        return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if kind % 3 == 1:
        shift = np.exp(1j * rng.uniform(-1.5, 1.5)) * np.eye(n)
        return shift + 0.3 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    Q = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))[0]
    lams = rng.uniform(0.5, 2.0, n) * np.exp(1j * rng.uniform(-1.5, 1.5, n))
    return Q @ np.diag(lams) @ Q.conj().T


def random_hpd_matrix(rng, n):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return X @ X.conj().T + 0.1 * np.eye(n)


def random_signal(rng, dim=1, max_len=128, h=0.125):
    m = int(rng.integers(4, max_len))
    return DiscreteSignal(rng.standard_normal((m, dim)), h)


def random_stable_system(rng, n=1, states=4):
    """Random stable square system via eigenvalue placement."""
    m = int(states)
    A = rng.standard_normal((m, m))
    A = A - (np.max(np.linalg.eigvals(A).real) + rng.uniform(0.3, 1.5)) * np.eye(m)
    B = rng.standard_normal((m, n))
    C = rng.standard_normal((n, m))
    D = 0.2 * rng.standard_normal((n, n))
    return LtiSystem.from_state_space(A, B, C, D)


def bench_plant():
    """Third-order SISO plant with a mid-band phase dip near 2.6 rad/s."""
    num = np.polymul([1.0, 5.0], [1.0, 3.0, 102.3])
    den = np.polymul([1.0, 1.0], [1.0, 6.0, 109.0])
    return LtiSystem.from_transfer_function(num, den)
