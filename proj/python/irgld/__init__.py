"""Inhomogeneous random graphs with percolation: simulation and large-deviation estimators."""

from ._core import (
    ComponentStats,
    CEstimate,
    Graph,
    HubsResult,
    Interval,
    LdpQuantities,
    ModelParams,
    ThetaEstimate,
    TreePool,
    build_pool,
    components,
    compute_ldp,
    dispatch,
    estimate_theta,
    exact_small_oracle,
    generate,
    hubs,
    hubs_asymptotic,
    hubs_via_inverse,
    load_pool,
    rate_function,
    save_pool,
    theta_rank_one_oracle,
)

__all__ = [name for name in dir() if not name.startswith("_")]
