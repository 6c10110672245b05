"""Degradation-adaptive super-resolution toolkit.

Submodules:
    space       three-level degradation space, sampling, 33-slot codec
    pipeline    HR -> LR degradation operations and the staged runner
    moe         expert banks, weighting net, parameter fusion
    engine      topologies, numpy forward pass, parameter/FLOPs counters
    metrics     PSNR-Y and loss terms
    weights_io  binary weight files and fixture weights
    synthesize  reproducible dataset generation
    cli         command-line entry point (``degrade-forge``)
    service     HTTP API
"""

__version__ = "0.1.0"
