import itertools

import numpy as np

from fsigsim.channel import ChannelGains

# one "PASS/FAIL <criterion>: <detail>" line per acceptance check, printed at session end
ACCEPTANCE_LINES = []


def verdict(label, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def make_gains(direct, cross=1.0):
    """Gains with given ``(N, K)`` direct powers and constant cross powers."""
    direct = np.asarray(direct, dtype=float)
    n, k = direct.shape
    power = np.full((n, n, k), float(cross))
    power[np.arange(n), np.arange(n), :] = direct
    return ChannelGains.from_power(power)


def random_gains(rng, n, k):
    return ChannelGains.from_power(rng.standard_exponential((n, n, k)) + 1e-3)


def brute_force_matching_size(n_res, sets):
    """Largest injective partial map user -> neighbour, by exhaustive search."""
    best = 0

    def go(i, used, size):
        nonlocal best
        if size + (len(sets) - i) <= best:
            return
        if i == len(sets):
            best = max(best, size)
            return
        for v in sets[i]:
            if v not in used:
                used.add(v)
                go(i + 1, used, size + 1)
                used.remove(v)
        go(i + 1, used, size)

    go(0, set(), 0)
    return best


def brute_force_assignment(values):
    """Best total over every injective map of rows to columns."""
    values = np.asarray(values)
    n, k = values.shape
    perms = np.array(list(itertools.permutations(range(k), n)), dtype=np.intp)
    return float(values[np.arange(n), perms].sum(axis=1).max())
