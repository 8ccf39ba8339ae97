def covered_marked_set(rng, n, m=None):
    """Random marked set hitting every residue class modulo 2^r."""
    size = 2**n
    if m is None:
        m = int(rng.integers(1, size))
    r = m.bit_length() - 1 if m > 1 else 0
    chosen = set()
    for residue in range(1 << r):
        while True:
            v = residue + (int(rng.integers(0, size >> r)) << r)
            if v not in chosen:
                chosen.add(v)
                break
    while len(chosen) < m:
        chosen.add(int(rng.integers(0, size)))
    return sorted(chosen)


def pick_source_outside(rng, n, marked):
    free = sorted(set(range(2**n)) - set(marked))
    return int(free[rng.integers(0, len(free))])
