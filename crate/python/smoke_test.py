"""Quick end-to-end check of the Python bindings.

    pip install --no-build-isolation ./crates/python
    python python/smoke_test.py
"""

import math
import pathlib
import sys

import stickydp

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def check(cond, msg):
    if not cond:
        sys.exit(f"FAIL: {msg}")
    print(f"ok: {msg}")


def main():
    law = stickydp.enumerate_prior(2, 2, 0.5, 1.0)
    check(abs(sum(p for _, p in law) - 1.0) < 1e-12, f"prior law over {len(law)} matrices sums to one")

    draws = stickydp.prior_sample(3, 4, 0.5, gamma=1.0, draws=10, seed=1)
    check(len(draws) == 10 and all(m[0][0] == 0 for m in draws), "prior samples are canonically labelled")

    panel, truth = stickydp.simulate("structural-break", seed=1)
    check((panel.n_units, panel.n_periods) == (50, 30), repr(panel))
    again = stickydp.Panel.from_text(panel.to_text())
    check(again.to_text() == panel.to_text(), "panel text round trip")

    post = stickydp.fit(panel, truncation=10, n_iterations=300, burn_in=100, chains=2, seed=3)
    check(len(post) == 400, f"{len(post)} pooled draws")
    change = post.change_probability()
    movers = [change[i][t - 1] for i in range(50) for t in range(1, 30) if truth[i][t] != truth[i][t - 1]]
    stayers = [change[i][t - 1] for i in range(50) for t in range(1, 30) if truth[i][t] == truth[i][t - 1]]
    check(sum(movers) / len(movers) > 0.5, f"mean change at transitions {sum(movers) / len(movers):.3f}")
    check(sum(stayers) / len(stayers) < 0.1, f"mean change elsewhere {sum(stayers) / len(stayers):.4f}")

    g1, g2 = panel.select(initial_group="g1"), panel.select(initial_group="g2")
    series = post.alignment(g1, g2)
    check(all(lo <= est <= hi for est, lo, hi, _ in filter(None, series)), "pooled intervals contain the estimate")

    leg = stickydp.ingest_legislative(str(DATA / "legislative" / "records.csv"), str(DATA / "south_states.tsv"))
    check(leg.n_periods == 20, repr(leg))
    south = leg.select(region="south")
    north = leg.select(region="north")
    lpost = stickydp.fit(leg, n_iterations=150, burn_in=50, seed=2)
    within = lpost.alignment(north + south, north + south, keys=leg.attribute("state"))
    check(any(within), "within-state series has points")

    rows = stickydp.geweke(steps=5000, seed=1)
    check(all(math.isfinite(z) for *_, z in rows), "geweke rows: " + ", ".join(f"{s} {z:+.2f}" for s, _, _, z in rows))

    try:
        stickydp.fit(panel, truncation=1)
    except ValueError as e:
        check("truncation" in str(e) or "K" in str(e), f"bad config rejected: {e}")
    else:
        sys.exit("FAIL: truncation 1 accepted")
    print("smoke test passed")


if __name__ == "__main__":
    main()
