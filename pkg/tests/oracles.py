"""Reference values computed without the package's own code paths.

* Hadamard mode change: dense truncated creation-operator matrices.
* Bob+Eve states: typed in from the printed state tables.
* Rates: hand enumeration of the branch tree.
"""
import math

import numpy as np

R2 = math.sqrt(2)
R3 = math.sqrt(3)
EPS0 = math.sqrt((3 - math.sqrt(3)) / 2)

# ---------------------------------------------------------------- creation ops
DIM = 6  # per-mode truncation; exact for up to DIM - 1 photons


def _adag(dim=DIM):
    m = np.zeros((dim, dim))
    for n in range(dim - 1):
        m[n + 1, n] = math.sqrt(n + 1)
    return m


def mode_ops(dim=DIM):
    """Creation operators of the |1> and |0> modes on (m1, m0) space."""
    a = _adag(dim)
    eye = np.eye(dim)
    return np.kron(a, eye), np.kron(eye, a)


def vacuum(dim=DIM):
    v = np.zeros(dim * dim)
    v[0] = 1.0
    return v


def fock_vector(op1, op0, n1, n0):
    v = vacuum()
    for _ in range(n1):
        v = op1 @ v
    for _ in range(n0):
        v = op0 @ v
    return v / math.sqrt(math.factorial(n1) * math.factorial(n0))


def hadamard_coefficients(m1, m0):
    """{(m-, m+): amplitude} of |m1, m0> expanded in the +/- modes."""
    a1, a0 = mode_ops()
    plus = (a0 + a1) / R2
    minus = (a0 - a1) / R2
    psi = fock_vector(a1, a0, m1, m0)
    n = m1 + m0
    out = {}
    for k in range(n + 1):
        basis = fock_vector(minus, plus, k, n - k)
        c = float(basis @ psi)
        if abs(c) > 1e-14:
            out[(k, n - k)] = c
    return out


# ---------------------------------------------------------------- table states
# keys are (b1, b0, e); |0,1> is one photon in the |0> mode.

def _plus_e(coef, b=(0, 0)):
    return {(*b, 0): coef / R2, (*b, 1): coef / R2}


def _merge(*parts):
    out = {}
    for p in parts:
        for k, v in p.items():
            out[k] = out.get(k, 0.0) + v
    return out


PLUS_B = {(0, 1, 0): 1 / R2, (1, 0, 0): 1 / R2}

# (op, alice detected) -> (probability, state)
TABLE_1 = {
    ("CTRL", False): (1.0, PLUS_B),
    ("SWAP-10", False): (0.5, {(0, 1, 0): 1.0}),
    ("SWAP-10", True): (0.5, {(0, 0, 0): 1.0}),
    ("SWAP-01", False): (0.5, {(1, 0, 0): 1.0}),
    ("SWAP-01", True): (0.5, {(0, 0, 0): 1.0}),
    ("SWAP-ALL", True): (1.0, {(0, 0, 0): 1.0}),
}
TABLE_2 = {k: v for k, v in TABLE_1.items() if k[0] != "SWAP-ALL"}

TABLE_3 = {
    ("CTRL", False): (1.0, {(0, 1, 1): 1 / R3, (1, 0, 1): 1 / R3, (0, 0, 0): 1 / R3}),
    ("SWAP-10", False): (2 / 3, {(0, 1, 1): 1 / R2, (0, 0, 0): 1 / R2}),
    ("SWAP-10", True): (1 / 3, {(0, 0, 1): 1.0}),
    ("SWAP-01", False): (2 / 3, {(1, 0, 1): 1 / R2, (0, 0, 0): 1 / R2}),
    ("SWAP-01", True): (1 / 3, {(0, 0, 1): 1.0}),
}

TABLE_4 = {
    ("CTRL", False): (1.0, _plus_e(1.0)),
    ("SWAP-10", False): (2 / 3, {(0, 1, 0): 1 / math.sqrt(6),
                                 (0, 0, 0): 3 / math.sqrt(12), (0, 0, 1): 1 / math.sqrt(12)}),
    ("SWAP-10", True): (1 / 3, {(0, 0, 2): 1.0}),
    ("SWAP-01", False): (2 / 3, {(1, 0, 1): 1 / math.sqrt(6),
                                 (0, 0, 0): 1 / math.sqrt(12), (0, 0, 1): 3 / math.sqrt(12)}),
    ("SWAP-01", True): (1 / 3, {(0, 0, 2): 1.0}),
}


def weaker_constants(eps):
    kappa = math.sqrt((1 - eps**2) / (3 - 2 * eps**2))
    b = math.sqrt(1 - 2 * kappa**2) / R2
    a = math.sqrt(1 - kappa**2 - eps**2) + b
    return kappa, a, b


def table_5(eps):
    k, a, b = weaker_constants(eps)
    ctrl = _merge(
        {(0, 1, 2): math.sqrt(2 * eps**2 / 3) / R2, (1, 0, 2): math.sqrt(2 * eps**2 / 3) / R2},
        _plus_e(math.sqrt(1 - 2 * eps**2 / 3)),
    )
    s10 = {(0, 1, 2): eps / R2, (0, 1, 0): k / R2, (0, 0, 0): a / R2, (0, 0, 1): b / R2}
    s01 = {(1, 0, 2): eps / R2, (1, 0, 1): k / R2, (0, 0, 0): b / R2, (0, 0, 1): a / R2}
    return {
        ("CTRL", False): (1.0, ctrl),
        ("SWAP-10", False): (2 / 3, s10),
        ("SWAP-10", True): (1 / 3, {(0, 0, 2): 1.0}),
        ("SWAP-01", False): (2 / 3, s01),
        ("SWAP-01", True): (1 / 3, {(0, 0, 2): 1.0}),
    }


# Two-decimal epsilon table: eps -> (p, R_CTRL, R_SWAPx)
TABLE_6 = {
    0.0: (1, 1, 0.83), 0.1: (0.97, 0.99, 0.83), 0.2: (0.89, 0.97, 0.82),
    0.3: (0.78, 0.94, 0.79), 0.4: (0.66, 0.89, 0.76), 0.5: (0.55, 0.83, 0.73),
    0.6: (0.44, 0.76, 0.68), 0.7: (0.34, 0.67, 0.63), 0.8: (0.25, 0.57, 0.58),
    0.9: (0.15, 0.46, 0.53), 1.0: (0, 0.33, 0.5),
}


# ---------------------------------------------------------- hand enumeration

def swapall_click_probability(kappa_sq):
    """P(Bob clicks | SWAP-ALL) against the intercept-resend attacks.

    SWAP-ALL moves the whole channel to Alice.  She sees nothing only on the
    |0,0>|0>_E term of the injected state (weight 1/3), after which V sends
    |0,0>|0> to kappa|0,1>|0> + kappa|1,0>|1> + ...|0,0>|+>: Bob clicks with
    probability 2 kappa^2.  When Alice clicks Eve holds |0,0>|1>, which V
    maps to the vacuum |0,0>|2>.
    """
    return (1 / 3) * 2 * kappa_sq


def honest_key_rate(n_ops=3):
    """Two SWAP ops out of n, Alice sees nothing half the time, Bob's basis matches half the time."""
    return (2 / n_ops) * 0.5 * 0.5
