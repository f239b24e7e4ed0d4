"""
Louvain on a planted partition
==============================

Thirty countries in two blocks with ten times more trade inside a block
than across. Louvain finds the blocks and labels each by its largest
trader.
"""
import numpy as np

from tradespin import build_trade_network, directed_modularity, label_leaders, louvain
from tradespin.synthetic import planted_blocks

m, labels = planted_blocks(np.random.default_rng(0))
part = louvain(m, seed=0)
print("modularity per pass:", [round(q, 4) for q in part.history])
print("planted partition Q:", round(directed_modularity(m, labels), 4))
print("agrees with planted blocks:",
      np.array_equal(labels[:, None] == labels, part.community[:, None] == part.community))
print("leaders:", label_leaders(part, build_trade_network(m)))
