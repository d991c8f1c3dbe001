"""Contrast-invariant local descriptors and sampled likelihoods."""

from ._core import (
    DegeneratePatchError,
    ImageIoError,
    clamp_normalize,
    contrast_marginal,
    gradient,
    half_gaussian_moment,
    hierarchy_check,
    kernel_sup_distances,
    likelihood_curve,
    load_image,
    polar_gradient,
    relu_equivalence,
    sal_match,
    sift_descriptor,
    two_edge_image,
)

__all__ = [
    "DegeneratePatchError",
    "ImageIoError",
    "clamp_normalize",
    "contrast_marginal",
    "gradient",
    "half_gaussian_moment",
    "hierarchy_check",
    "kernel_sup_distances",
    "likelihood_curve",
    "load_image",
    "polar_gradient",
    "relu_equivalence",
    "sal_match",
    "sift_descriptor",
    "two_edge_image",
]
