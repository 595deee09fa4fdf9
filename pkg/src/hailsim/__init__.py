"""Poisson hail on Z^d: workload simulation, oracles, and experiments.

Hailstones (jobs) land on the integer lattice: a job needs `service` units
of work from every server in a cube `base` around its center site, and a
site's workload melts at unit rate while positive.  The package provides

* ``core``       -- lattice geometry, heavy-tailed mark laws, Poisson arrivals
* ``dynamics``   -- event-driven evolution of the workload field
* ``oracle``     -- brute-force path-score computation of the same workload
* ``clusters``   -- per-interval aggregation, cube clusters, discretized bound
* ``gla``        -- greedy lattice animals over thinned weight fields
* ``stability``  -- backward-coupling stability and heavy-tail instability runs
* ``cli``        -- batch experiment runner with reproducible artifacts
"""

__version__ = "0.1.0"
