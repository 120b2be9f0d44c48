"""Generate the (49,24) LDPC parity-check matrix shipped in crates/core/data.

Column weight 3, 25 checks, no length-4 cycles, full GF(2) rank.
Deterministic: the first seed that satisfies every constraint is used.
"""
import random
import sys

N, M, WC = 49, 25, 3


def rank_gf2(rows, n):
    rows = [sum(1 << j for j in r) for r in rows]
    rank = 0
    for col in range(n):
        pivot = next((i for i in range(rank, len(rows)) if rows[i] >> col & 1), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i] >> col & 1:
                rows[i] ^= rows[rank]
        rank += 1
    return rank


def build(seed):
    rng = random.Random(seed)
    checks = [set() for _ in range(M)]
    cols = []
    for j in range(N):
        chosen = []
        for _ in range(WC):
            # lowest-degree checks that do not close a 4-cycle with earlier choices
            options = []
            for c in range(M):
                if c in chosen:
                    continue
                ok = True
                for prev in chosen:
                    if checks[c] & checks[prev]:
                        ok = False
                        break
                if ok:
                    options.append(c)
            if not options:
                return None
            low = min(len(checks[c]) for c in options)
            options = [c for c in options if len(checks[c]) == low]
            chosen.append(rng.choice(options))
        for c in chosen:
            checks[c].add(j)
        cols.append(sorted(chosen))
    return checks, cols


def main():
    for seed in range(10000):
        res = build(seed)
        if res is None:
            continue
        checks, cols = res
        if rank_gf2([sorted(c) for c in checks], N) != M:
            continue
        out = sys.stdout
        row_deg = [len(c) for c in checks]
        out.write(f"{N} {M}\n")
        out.write(f"{WC} {max(row_deg)}\n")
        out.write(" ".join(str(WC) for _ in range(N)) + "\n")
        out.write(" ".join(str(d) for d in row_deg) + "\n")
        for c in cols:
            out.write(" ".join(str(x + 1) for x in c) + "\n")
        for c in checks:
            row = sorted(c)
            row += [0] * (max(row_deg) - len(row))
            out.write(" ".join(str(x + 1) if x or i < len(c) else "0" for i, x in enumerate(row)) + "\n")
        sys.stderr.write(f"seed {seed}\n")
        return
    raise SystemExit("no matrix found")


if __name__ == "__main__":
    main()
