"""
qcslab: Sigma-Delta quantized compressed sensing with one-stage convex recovery.

Subpackages:
    models    - typed records (signals, ensembles, traces, problems, configs)
    services  - operators, matrices, quantizers, solver, recovery, encoding, experiments
    handlers  - CLI sub-command handlers
"""

__version__ = "0.3.0"
