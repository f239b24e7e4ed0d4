"""
Three countries, two anchors
============================

A is pinned to USD and B to CNY. C trades more with B than with A, so its
local field is positive and it settles on CNY whatever it starts from.
"""
import numpy as np

from tradespin import AnchorSpec, SpinConfig, build_trade_network, relax, trade_weights
from tradespin.dynamics import local_fields
from tradespin.synthetic import three_country

m = three_country()
net = build_trade_network(m)
print("S =\n", net.S.round(3))
print("P + P* =", (net.P + net.P_star).round(3))

w = trade_weights(net)
anchors = AnchorSpec({"A"}, {"B"})
for start in (-1, 1):
    init = SpinConfig.from_anchors([-1, 1, start], anchors, net.table)
    res = relax(net, w, init, rng=np.random.default_rng(0))
    print(f"C starts {start:+d}: field {local_fields(net, w, init)[2]:+.3f}, "
          f"ends {res.final.sigma[2]:+d} after {res.tau_stop} sweep(s)")
