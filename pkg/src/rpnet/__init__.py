"""Random-projection networks: RIP measurement, sparse recovery, RP layers,
and exact complexity accounting."""

import os as _os

# Honor the documented thread cap before any BLAS-backed import happens.
if _os.environ.get("RPNET_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["RPNET_THREADS"])

__version__ = "0.1.0"
