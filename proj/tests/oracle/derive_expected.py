"""Independent reference values frozen into the C++ unit tests.

Every number asserted as a derived expectation in tests/*.cpp comes from
this script. It uses plain Python floats (and mpmath where extra digits
help) and shares no code with the library.
"""
import math

import mpmath as mp

mp.mp.dps = 40


def kl(p, q):
    return sum(pi * mp.log(pi / qi) for pi, qi in zip(p, q) if pi > 0)


def main():
    print("KL((0.75,0.25)||(0.5,0.5)) =", mp.nstr(kl([mp.mpf("0.75"), mp.mpf("0.25")], [0.5, 0.5]), 20))
    h = -(mp.mpf("0.75") * mp.log(mp.mpf("0.75")) + mp.mpf("0.25") * mp.log(mp.mpf("0.25")))
    print("H(0.75,0.25) =", mp.nstr(h, 20))
    print("CE((0.75,0.25),(0.5,0.5)) =", mp.nstr(h + kl([mp.mpf("0.75"), mp.mpf("0.25")], [0.5, 0.5]), 20))
    print("D_Bern(0.9||0.5) =", mp.nstr(kl([mp.mpf("0.9"), mp.mpf("0.1")], [0.5, 0.5]), 20))
    print("chi((0.6,0.4)||(0.5,0.5)) =", mp.nstr(mp.sqrt(sum((a - b) ** 2 / b for a, b in [(mp.mpf("0.6"), mp.mpf("0.5")), (mp.mpf("0.4"), mp.mpf("0.5"))])), 20))

    e = mp.e
    print("log((1+e)/2) =", mp.nstr(mp.log((1 + e) / 2), 20))
    print("tilt uniform2 r=(0,1) =", mp.nstr(1 / (1 + e), 20), mp.nstr(e / (1 + e), 20))

    # Brute-force grid over two-state policies for max of E[r] - beta*KL(pi||ref).
    best = -1e9
    n = 200000
    for i in range(1, n):
        p1 = i / n
        val = p1 * 1.0 - (p1 * math.log(p1 / 0.5) + (1 - p1) * math.log((1 - p1) / 0.5))
        best = max(best, val)
    print("grid max objective (two-state, beta=1) =", best)

    # Bernoulli identity example: uniform n=2, r=(1,0), beta=1, lambda=0.3
    def tilt2(lam):
        a = mp.e ** lam
        return [a / (1 + a), 1 / (1 + a)]
    reas = tilt2(mp.mpf(1))
    cur = tilt2(mp.mpf("0.3"))
    print("KL(reas||pi_0.3) two-outcome =", mp.nstr(kl(reas, cur), 20))
    ra, rb = reas[0], cur[0]
    print("D_Bern(R*||R_0.3) =", mp.nstr(ra * mp.log(ra / rb) + (1 - ra) * mp.log((1 - ra) / (1 - rb)), 20))

    # Two-state Metropolis kernel with p_data = (2/3, 1/3), complete graph (deg 1 each).
    print("pi_pre(1|0) =", min(1.0, (1 / 3) / (2 / 3)), " pi_pre(0|1) =", min(1.0, (2 / 3) / (1 / 3)))

    # Hitting time two-state with T(1|0)=0.25: geometric mean.
    print("E_0[tau] =", 1 / 0.25)

    # Stationary from V = (0, log 2)
    w = [1.0, 0.5]
    print("pi from V=(0,log2) =", [x / sum(w) for x in w])


if __name__ == "__main__":
    main()
