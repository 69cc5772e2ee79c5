"""Which regime does a parameter family fall into?

Each family prescribes the in-wall spacing h, the material constant K, the
load sigma and the domain length L as power laws in n (optionally times a
power of log n).  classify() reads off the interaction regime p from the
aspect ratio and the domain regime q from Lambda_n = L_n / ell_n.
"""

import math

from pileup import ParamSequences, PowerLawSeq, classify
from pileup.exceptions import Unclassifiable

P = PowerLawSeq
ONE = P(1.0)

families = {
    "h = 1/n, unit K, sigma, L": ParamSequences(h=P(1, -1), K=ONE, sigma=ONE, L=ONE),
    "tiny K, L = n^-3": ParamSequences(h=ONE, K=P(1, -4), sigma=ONE, L=P(1, -3)),
    "h = n^-2, L = 1/n": ParamSequences(h=P(1, -2), K=ONE, sigma=ONE, L=P(1, -1)),
    "half line, load 1/n": ParamSequences(h=ONE, K=ONE, sigma=P(1, -1)),
    "elastic, C = 2 pi^2 / 3": ParamSequences(h=ONE, K=P(3 / (2 * math.pi**3)), sigma=ONE, L=P(1 / math.pi, 0.5)),
    "dilute, alpha_n = log n": ParamSequences(h=P(math.pi, -1, -1), K=P(1.0, 4.0, -1), sigma=ONE, L=ONE),
    "dilute, beta = inf": ParamSequences(h=ONE, K=P(1 / math.pi, 41.0), sigma=ONE, L=P(40 / math.pi, 1, 1)),
    "aspect ratio ~ log log n": ParamSequences(h=P(1, -1), K=P(1 / math.pi, 0, 1), sigma=ONE),
}

print(f"{'family':28s} {'(p,q)':7s} {'c_tilde':>9s} {'Lambda':>9s} {'beta':>9s} {'C':>9s}")
for name, params in families.items():
    try:
        r = classify(params)
    except Unclassifiable as exc:
        print(f"{name:28s} unclassifiable: {exc}")
        continue

    def fmt(v):
        return f"{'-' if v is None else f'{v:.4g}':>9s}"

    print(f"{name:28s} ({r.p},{r.q})   {fmt(r.c_tilde)} {fmt(r.Lambda)} {fmt(r.beta)} {fmt(r.C)}")
    for note in r.notes:
        print(f"{'':28s} note: {note}")
