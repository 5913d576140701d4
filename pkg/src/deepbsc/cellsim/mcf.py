"""Successive-shortest-path min-cost flow with Dijkstra on reduced costs."""
from __future__ import annotations

import heapq
import math

EPS = 1e-12


class MinCostFlow:
    """Residual graph over real capacities and non-negative arc costs.

    Edge ``e`` and its reverse ``e ^ 1`` are stored side by side.
    """

    def __init__(self, n_nodes):
        self.n = n_nodes
        self.adj = [[] for _ in range(n_nodes)]
        self.to = []
        self.cap = []
        self.cost = []

    def add_edge(self, u, v, cap, cost):
        if cost < 0:
            raise ValueError("arc costs must be non-negative")
        e = len(self.to)
        self.to += [v, u]
        self.cap += [float(cap), 0.0]
        self.cost += [float(cost), -float(cost)]
        self.adj[u].append(e)
        self.adj[v].append(e + 1)
        return e

    def flow_on(self, e):
        return self.cap[e ^ 1]

    def solve(self, s, t, amount=math.inf):
        """Send up to ``amount`` from ``s`` to ``t`` at minimum cost; returns ``(flow, cost)``."""
        n = self.n
        to, cap, cost, adj = self.to, self.cap, self.cost, self.adj
        potential = [0.0] * n
        sent = 0.0
        total = 0.0
        while sent < amount - EPS:
            dist = [math.inf] * n
            prev = [-1] * n
            dist[s] = 0.0
            heap = [(0.0, s)]
            while heap:
                d, u = heapq.heappop(heap)
                if d > dist[u]:
                    continue
                pu = potential[u]
                for e in adj[u]:
                    if cap[e] <= EPS:
                        continue
                    v = to[e]
                    # reduced costs are non-negative up to round-off
                    nd = d + max(cost[e] + pu - potential[v], 0.0)
                    if nd < dist[v] - 1e-15:
                        dist[v] = nd
                        prev[v] = e
                        heapq.heappush(heap, (nd, v))
            if dist[t] == math.inf:
                break
            for v in range(n):
                if dist[v] < math.inf:
                    potential[v] += dist[v]
            push = amount - sent
            v = t
            while v != s:
                e = prev[v]
                push = min(push, cap[e])
                v = to[e ^ 1]
            v = t
            while v != s:
                e = prev[v]
                cap[e] -= push
                cap[e ^ 1] += push
                total += push * cost[e]
                v = to[e ^ 1]
            sent += push
        return sent, total
