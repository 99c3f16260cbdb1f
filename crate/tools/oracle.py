"""Independent exact reference values for the Rust test suite.

Everything here uses fractions.Fraction and brute force; nothing is shared
with the Rust implementation. Run `python3 tools/oracle.py` and compare with
the literals in crates/core/tests/oracles.rs.
"""
from fractions import Fraction as F
from itertools import product
import math


def l1(m):
    return sum(abs(v) for row in m for v in row)


def op_inf1(m):
    n = len(m)
    best = None
    for signs in product((1, -1), repeat=n):
        val = sum(abs(sum(m[i][j] * signs[j] for j in range(n))) for i in range(n))
        best = val if best is None or val > best else best
    return best


def hadamard(k):
    h = [[1]]
    for _ in range(k):
        h = [r + r for r in h] + [r + [-x for x in r] for r in h]
    return h


def m0(k):
    h = hadamard(2 * k)
    s = 2 ** k
    return [[h[i][j] + (s if i == j else 0) for j in range(len(h))] for i in range(len(h))]


def bump_pieces(eps):
    """(lo, hi, a, b) with value a + b x on [lo, hi]."""
    if eps is None:
        return [(F(0), F(1), F(1), F(0))]
    return [
        (-eps, eps, F(1, 2), 1 / (2 * eps)),
        (eps, 1 - eps, F(1), F(0)),
        (1 - eps, 1 + eps, F(1, 2) + 1 / (2 * eps), -1 / (2 * eps)),
    ]


def integrate_linear(a, b, lo, hi):
    return a * (hi - lo) + b * (hi * hi - lo * lo) / 2


def bump_integral(eps, lo=None, hi=None):
    total = F(0)
    for plo, phi, a, b in bump_pieces(eps):
        x0 = plo if lo is None else max(plo, lo)
        x1 = phi if hi is None else min(phi, hi)
        if x1 > x0:
            total += integrate_linear(a, b, x0, x1)
    return total


def moment(eps, shift, segments):
    """∫ b(y - shift) u(y) dy for u given as (lo, hi, value) segments."""
    return sum(v * bump_integral(eps, lo - shift, hi - shift) for lo, hi, v in segments)


def output_l1(m, eps, segments):
    n = len(m)
    ubar = [moment(eps, F(2 * k + 1), segments) for k in range(n)]
    z = [sum(m[h][k] * ubar[k] for k in range(n)) for h in range(n)]
    return sum(abs(v) for v in z) * bump_integral(eps), ubar


def cell_distance(eps):
    """∫∫ |g⊗g - g_ε⊗g_ε| by region: inside the unit square and outside."""
    inner = bump_integral(eps, F(0), F(1))
    total = bump_integral(eps)
    return (1 - inner * inner) + (total * total - inner * inner)


def search_exhaustive(m, eps, offset, resolution):
    """max over ±1 inputs constant on the resolution grid covering the support."""
    n = len(m)
    lo = offset + 1 - eps
    hi = offset + 2 * n - 1 + 1 + eps
    start = math.floor(lo / resolution) * resolution
    count = math.ceil((hi - start) / resolution)
    segs = [(start + i * resolution, start + (i + 1) * resolution) for i in range(count)]
    best = None
    for signs in product((1, -1), repeat=count):
        u = [(a, b, s) for (a, b), s in zip(segs, signs)]
        val, _ = output_l1(m, eps, [(a - offset, b - offset, s) for a, b, s in u])
        best = val if best is None or val > best else best
    return best, count


def offsets(hmax):
    out, t = [], 0
    for h in range(1, hmax + 1):
        out.append(t)
        m = max(1, math.ceil(math.log2(2 * h)))
        t += 2 * 4 ** m + 1
    return out


def main():
    print("l1/op [[2,1],[1,2]]", l1([[2, 1], [1, 2]]), op_inf1([[2, 1], [1, 2]]))
    fixed = [
        [[4, -2, 1], [-2, 5, 3], [1, 3, 6]],
        [[2, 1, 0, -1], [1, 3, 1, 0], [0, 1, 2, 1], [-1, 0, 1, 4]],
        [[5, 2, -3, 1, 0], [2, 4, 0, -2, 1], [-3, 0, 6, 1, 2], [1, -2, 1, 3, -1], [0, 1, 2, -1, 2]],
    ]
    for m in fixed:
        print("fixed", l1(m), op_inf1(m))
    a = m0(1)
    print("M0 n=4", l1(a), op_inf1(a))
    b = m0(2)
    print("M0 n=16", l1(b), op_inf1(b), "M2 op", F(op_inf1(b), 2 * l1(b)))
    for k in (3, 4, 5):
        print("M0 l1 n=%d" % 4 ** k, l1(m0(k)))
    for e in (F(1, 4), F(1, 8), F(1, 3), F(1, 10)):
        print("cell distance", e, cell_distance(e), "mass", bump_integral(e))
    m = [[2, -1], [-1, 3]]
    segs = [(F(0), F(5, 2), F(1)), (F(5, 2), F(5), F(-1, 2))]
    print("trap output l1", output_l1(m, F(1, 5), segs))
    print("pwc output l1", output_l1(m, None, segs))
    segs2 = [(F(1, 3), F(7, 4), F(-2, 3)), (F(7, 4), F(9, 2), F(1)), (F(9, 2), F(6), F(1, 5))]
    m3 = fixed[0]
    print("trap3 output l1", output_l1(m3, F(1, 7), segs2))
    print("pwc3 output l1", output_l1(m3, None, segs2))
    m1 = [[F(v, 20) for v in row] for row in a]
    print("block1 search r=1/2", search_exhaustive(m1, F(1, 3), F(0), F(1, 2)))
    print("[[1]] eps=1/10 search r=1/2", search_exhaustive([[F(1)]], F(1, 10), F(0), F(1, 2)))
    print("[[2,1],[1,2]] pwc-as-eps? r=1", op_inf1([[2, 1], [1, 2]]))
    h = [sum(F(1, k) for k in range(1, n + 1)) for n in (1, 2, 3, 4)]
    print("harmonic", h)
    print("op partial 4", sum(F(7, 3 * k * k) for k in range(1, 5)))
    H = 100
    hp = sum(F(1, k) for k in range(1, H + 1))
    op = sum(F(7, 3 * k * k) for k in range(1, H + 1))
    print("H=100 l1", float(hp), "ln101", math.log(101))
    print("H=100 op partial", float(op), "tail", F(7, 3 * H), "total", float(op + F(7, 3 * H)))
    print("7pi^2/18", 7 * math.pi ** 2 / 18)
    print("offsets", offsets(10))
    print("lipschitz eps=1/3", F(3, 2) * (1 + F(3, 2)))


if __name__ == "__main__":
    main()
