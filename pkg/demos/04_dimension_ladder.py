"""How dKL and sdKL scale with dimension.

dKL visits every diagonal of each margin, 2^(d-1) - 1 lines in total, while
sdKL keeps one line per margin.  The printed timings show the difference.
"""

from __future__ import annotations

from vinedist import dimension_ladder

print(dimension_ladder(dims=range(3, 9)).render())
