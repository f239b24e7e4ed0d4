"""
PageRank and CheiRank as node weights
=====================================

The partner weight in the local field can be the trade share P + P* or
the sum of PageRank and CheiRank. On a random network the two rank the
countries similarly but not identically.
"""
import numpy as np

from tradespin import build_trade_network, centrality_weights, trade_weights
from tradespin.centrality import cheirank, pagerank
from tradespin.synthetic import random_money_matrix

net = build_trade_network(random_money_matrix(np.random.default_rng(3), 12, density=0.6))

for alpha in (0.5, 0.85):
    pr, cr = pagerank(net, alpha), cheirank(net, alpha)
    print(f"alpha={alpha}: {pr.iterations} / {cr.iterations} iterations")

trade = trade_weights(net).node_weight
cent = centrality_weights(net).node_weight
order = np.argsort(-trade)
print("code  P+P*    PR+CR")
for i in order:
    print(f"{net.table.codes[i]:<4}  {trade[i]:.3f}  {cent[i]:.3f}")
