"""A laboratory for last passage percolation geometry.

Exact passage values, geodesics, disjoint 2-optimizers, disjointness-gap
sheets, geodesic network classification, and finite-horizon Busemann
diagnostics on seeded Poisson and lattice environments.
"""

from .model import (DomainError, LatticeField, OrderedQuad, ParameterError,
                    PoissonCloud, Region, ScalingFrame, SpaceTimePoint,
                    causal_leq, cloud_from_points, make_lattice_field,
                    make_poisson_cloud, model_from_descriptor, reflect,
                    rescale, rotate45)
from .engine import (Chain, DisjointPair, GeodesicNetwork, OverlapInterval,
                     disjoint2_value, geodesic, greene_values, network,
                     on_optimal, optimizer2, overlap, passage_profile,
                     passage_value)

__version__ = "0.1.0"
