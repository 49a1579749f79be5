"""Coherent optical link laboratory.

Thin Python face of the C++ core: fiber simulation (split-step Fourier,
EDFA/ASE), receiver DSP (dispersion compensation, backpropagation, blind
phase search) and learned equalizers, driven by the same JSON configuration
schema as the `cohlab` command line tool.

Quick start::

    import json, cohlab
    cfg = json.loads(cohlab.default_config())
    cfg["run"]["n_symbols"] = 1024
    cfg["run"]["train_symbols"] = 1024
    cfg["run"]["methods"] = ["linear-eq"]
    out = cohlab.run(json.dumps(cfg))
    print(out["methods"][0]["metrics"]["q_db"])
"""

from ._core import (  # noqa: F401
    apply_overrides,
    bits_to_float,
    canonical_config,
    config_hash,
    count_errors,
    default_config,
    derive_seed,
    derive_seed_indexed,
    erfc_inv,
    evm_percent,
    float_bits,
    float_to_bits,
    prbs,
    q_factor_db,
    qam16_constellation,
    qam16_demap,
    qam16_map,
    qam16_nearest,
    run,
    sweep,
    sweep_to_files,
)

__version__ = "0.1.0"

__all__ = [
    "apply_overrides",
    "bits_to_float",
    "canonical_config",
    "config_hash",
    "count_errors",
    "default_config",
    "derive_seed",
    "derive_seed_indexed",
    "erfc_inv",
    "evm_percent",
    "float_bits",
    "float_to_bits",
    "prbs",
    "q_factor_db",
    "qam16_constellation",
    "qam16_demap",
    "qam16_map",
    "qam16_nearest",
    "run",
    "sweep",
    "sweep_to_files",
]
