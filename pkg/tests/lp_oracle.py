"""Independent brute-force reference for the constrained l1 program.

``l1_oracle`` finds the minimum of ||beta||_1 over ||a @ beta - b||_inf <= lam
by direct candidate enumeration in beta space, with no simplex machinery
shared with the package: at an optimum of the lifted LP (the usual split
beta = u - v), the number of residual rows pinned to a +/-lam face plus the
number of zero coordinates is at least d.  So it suffices to walk every
support set F, every |F|-subset of rows, and every sign assignment on those
rows, solving the resulting square linear system and keeping the best
feasible candidate.  Cost is exponential in d -- use for d <= 4 only.
"""

import itertools

import numpy as np

#: slack used when checking a candidate against the residual bound
FEAS_SLACK = 1e-9


def l1_oracle(a, b, lam):
    """Return ``(objective, beta)``; ``(None, None)`` if nothing is feasible."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    d = a.shape[0]
    best_obj = None
    best_beta = None

    def consider(beta):
        nonlocal best_obj, best_beta
        resid = np.max(np.abs(a @ beta - b)) if d else 0.0
        if resid > lam + FEAS_SLACK:
            return
        obj = float(np.sum(np.abs(beta)))
        if best_obj is None or obj < best_obj:
            best_obj = obj
            best_beta = beta.copy()

    consider(np.zeros(d))
    for size in range(1, d + 1):
        for support in itertools.combinations(range(d), size):
            cols = list(support)
            for rows in itertools.combinations(range(d), size):
                sub = a[np.ix_(rows, cols)]
                for signs in itertools.product((-1.0, 1.0), repeat=size):
                    rhs = b[list(rows)] + lam * np.asarray(signs)
                    try:
                        x = np.linalg.solve(sub, rhs)
                    except np.linalg.LinAlgError:
                        break  # sub does not depend on the signs
                    beta = np.zeros(d)
                    beta[cols] = x
                    consider(beta)
    return best_obj, best_beta


def random_instance(rng):
    """One random (a, b, lam) triple in the d <= 4 oracle regime."""
    d = int(rng.integers(1, 5))
    m = rng.standard_normal((d, d))
    a = m.T @ m + 0.1 * np.eye(d)
    b = rng.uniform(-1.0, 1.0, size=d)
    lam = float(rng.uniform(0.0, np.max(np.abs(b))))
    return a, b, lam
