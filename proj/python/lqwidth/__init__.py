"""Measure spectra, adaptive dyadic partitions and Krein-Feller widths."""

import json
import os

from ._core import (
    InvalidMeasure,
    Measure,
    MeasureParseError,
    PartitionDepthError,
    adaptive_partition,
    beta_n,
    eigenvalues,
    entropy_estimate,
    gamma_dyadic,
    j_weight,
    kappa,
    min_dyadic_cardinality,
    order_fit,
    project_poly,
    run_cli,
    s_b_estimate,
    s_nb,
    selfsimilar_beta,
    selfsimilar_s_rho,
    spectrum_curve,
    split_counting_check,
    string_eigenvalues,
    width_upper_sequence,
)


def measure(source):
    """Build a Measure from a dict, a JSON string or a path to a spec file."""
    if isinstance(source, Measure):
        return source
    if isinstance(source, dict):
        return Measure.from_json(json.dumps(source))
    if isinstance(source, os.PathLike) or (isinstance(source, str) and os.path.exists(source)):
        return Measure.from_file(os.fspath(source))
    return Measure.from_json(source)


__all__ = [name for name in dir() if not name.startswith("_")]
