"""
Bistability on a two-hub network
================================

Two anchored hubs, each with ten satellites. The CNY hub pulls harder on
its own satellites, while the USD satellites only follow their hub weakly,
so they form a swing bloc that collectively ends on either side.
"""
import numpy as np

from tradespin import BASELINE_ANCHORS, ExperimentConfig, build_trade_network, classify_groups, run_scan
from tradespin.synthetic import two_hub

net = build_trade_network(two_hub())
cfg = ExperimentConfig(f_i_grid=np.arange(21) / 20, n_runs=500, anchors=BASELINE_ANCHORS)
scan = run_scan(cfg, net)

finals = scan.final_fractions()
print("attractors f_f:", [round(f, 3) for f in finals])
print(" f_i   rho(low)  rho(high)")
for f_i, lo, hi in zip(cfg.f_i_grid, scan.rho(finals[0]), scan.rho(finals[-1])):
    print(f"{f_i:4.2f}   {lo:7.3f}  {hi:8.3f}")

groups = classify_groups(scan, net)
for label in ("USD", "CNY", "SWING"):
    print(label, groups.members(label))
