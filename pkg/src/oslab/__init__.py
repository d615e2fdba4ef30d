"""oslab: a desk-scale lab for rank-n outer space.

Marked metric graphs, the asymmetric Lipschitz metric, core intersection
numbers of free actions on trees, and sphere-system surgery combing paths,
with a seeded experiment harness.
"""

__version__ = "0.1.0"
