"""Calibration study for the two oracle-calibrated RLVR thresholds.

1. Entropy-rule halving ratio: err(delta/2)/err(delta) for delta = 0.2, 0.1, 0.05
   on random mixed families (family-level weighted mean of per-prompt errors).
2. Entropy-accuracy trace: Pearson correlation between mean accuracy R_n and
   exp(mean entropy H_{n+1}) on high-accuracy families (per-prompt R* >= 0.99).

The generators mirror the library's family generators in distribution (not
bit-for-bit), which is what a threshold calibration needs.
"""
import numpy as np


def mixed_family(rng, n_prompts, n_resp):
    prompts = []
    for _ in range(n_prompts):
        inst = rng.dirichlet(np.ones(n_resp))
        while True:
            r = (rng.random(n_resp) < 0.5).astype(float)
            if 0 < r.sum() < n_resp:
                break
        prompts.append((inst, r))
    w = rng.dirichlet(np.ones(n_prompts))
    beta = float(np.exp(rng.uniform(np.log(0.25), np.log(4.0))))
    return prompts, w, beta


def high_acc_family(rng, n_prompts, n_resp, beta):
    prompts = []
    for _ in range(n_prompts):
        n_correct = int(rng.integers(1, max(2, n_resp // 2) + 1))
        r = np.zeros(n_resp)
        r[:n_correct] = 1.0
        rstar = rng.uniform(0.99, 0.999)
        odds0 = rstar / (1 - rstar) * np.exp(-1.0 / beta)
        r0 = odds0 / (1 + odds0)
        inst = np.empty(n_resp)
        inst[:n_correct] = r0 * rng.dirichlet(np.ones(n_correct))
        inst[n_correct:] = (1 - r0) * rng.dirichlet(np.ones(n_resp - n_correct))
        prompts.append((inst, r))
    w = rng.dirichlet(np.ones(n_prompts))
    return prompts, w


def tilt(inst, r, lam):
    lw = np.log(inst) + lam * r
    lw -= lw.max()
    p = np.exp(lw)
    return p / p.sum()


def gap_err(prompts, w, beta, delta):
    lam = 1.0 / beta - delta
    errs = []
    for inst, r in prompts:
        pl = tilt(inst, r, lam)
        pr = tilt(inst, r, 1.0 / beta)
        lp = np.log(pl)
        exact = (pl * lp).sum() - (pr * lp).sum()
        cov = (pl * lp * r).sum() - (pl * lp).sum() * (pl * r).sum()
        approx = -delta * cov
        errs.append(abs(exact - approx))
    return float(np.dot(w, errs))


def main():
    rng = np.random.default_rng(12345)
    worst = 0.0
    for _ in range(2000):
        prompts, w, beta = mixed_family(rng, 4, 8)
        e = [gap_err(prompts, w, beta, d) for d in (0.2, 0.1, 0.05)]
        worst = max(worst, e[1] / e[0], e[2] / e[1])
    print("entropy rule: worst halving ratio over 2000 mixed families =", worst)

    corrs = []
    for beta in (0.1, 0.25, 0.5, 1.0):
        for _ in range(200):
            prompts, w = high_acc_family(rng, 8, 8, beta)
            n_steps = int(np.ceil(8.0 / beta))
            R, H = [], []
            for n in range(n_steps + 2):
                lam = (1 - np.exp(-beta * n)) / beta
                rs, hs = [], []
                for inst, r in prompts:
                    p = tilt(inst, r, lam)
                    rs.append((p * r).sum())
                    hs.append(-(p * np.log(p)).sum())
                R.append(np.dot(w, rs))
                H.append(np.dot(w, hs))
            R = np.array(R[: n_steps + 1])
            X = np.exp(np.array(H[1 : n_steps + 2]))
            corrs.append(np.corrcoef(R, X)[0, 1])
        print(f"beta={beta}: max corr so far {max(corrs):.4f}")
    corrs = np.array(corrs)
    print("trace: corr quantiles", np.quantile(corrs, [0, 0.01, 0.5, 0.99, 1.0]))


if __name__ == "__main__":
    main()
