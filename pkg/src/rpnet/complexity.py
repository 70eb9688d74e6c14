"""Exact trainable-parameter and FLOP accounting for a NetworkSpec.

Conventions (the published-table accounting):

* biases, batch norm, pooling, and activations contribute nothing;
* the final classifier never counts, and in any network containing a
  convolution layer no fully-connected layer counts;
* a FLOP tally is twice the multiplication count (one addition per multiply);
* fixed projection matrices contribute FLOPs but no parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

from .nn import layers as L
from .nn.network import NetworkSpec

CONVENTIONS = (
    "exclude_biases",
    "exclude_batchnorm",
    "exclude_fcnn_last_layer",
    "exclude_cnn_fc_layers",
    "rp_fixed_matrix_in_flops_not_params",
)

_CONV_KINDS = ("conv", "rp_conv_i", "rp_conv_ii")
_FC_KINDS = ("dense", "rp_dense")


@dataclass(frozen=True)
class LayerCount:
    index: int
    kind: str
    params: int
    flops: int


@dataclass(frozen=True)
class ComplexityReport:
    records: list[LayerCount]
    total_params: int
    total_flops: int
    conventions: tuple[str, ...] = CONVENTIONS

    def printed_params(self) -> str:
        """Parameters in units of 10^3, two decimals (published precision)."""
        return f"{self.total_params / 1e3:.2f}"

    def printed_flops(self) -> str:
        """FLOPs in units of 10^6, two decimals (published precision)."""
        return f"{self.total_flops / 1e6:.2f}"


def _layer_counts(layer) -> tuple[int, int]:
    if isinstance(layer, L.Dense):
        return layer.d_in * layer.d_out, 2 * layer.d_in * layer.d_out
    if isinstance(layer, L.RpDense):
        return layer.n * layer.d_out, 2 * (layer.n * layer.d_in + layer.n * layer.d_out)
    p2 = None if not hasattr(layer, "p") else layer.p * layer.p
    if isinstance(layer, L.Conv):
        k = layer.h * layer.h * layer.c_in
        return k * layer.c_out, 2 * p2 * k * layer.c_out
    if isinstance(layer, L.RpConvI):
        k = layer.h * layer.h * layer.c_in
        return layer.n * layer.c_out, 2 * p2 * (layer.n * k + layer.n * layer.c_out)
    if isinstance(layer, L.RpConvII):
        return (
            layer.n * layer.c_out * layer.c_in,
            2 * p2 * (layer.c_in * layer.n * layer.h * layer.h + layer.n * layer.c_out * layer.c_in),
        )
    return 0, 0  # max pool, batch norm, relu, flatten


def count(net: NetworkSpec) -> ComplexityReport:
    """Per-layer and total parameter/FLOP counts under the table conventions.

    A pure function of the architecture: weights and seeds never enter.
    """
    has_conv = any(layer.kind in _CONV_KINDS for layer in net.layers)
    records = []
    total_params = 0
    total_flops = 0
    for index, layer in enumerate(net.layers):
        if has_conv and layer.kind in _FC_KINDS:
            params, flops = 0, 0
        else:
            params, flops = _layer_counts(layer)
        records.append(LayerCount(index=index, kind=layer.kind, params=params, flops=flops))
        total_params += params
        total_flops += flops
    records.append(
        LayerCount(index=len(net.layers), kind="classifier", params=0, flops=0)
    )
    return ComplexityReport(records=records, total_params=total_params, total_flops=total_flops)


def multiplication_oracle(net: NetworkSpec) -> int:
    """Independent multiplication tally from the forward pass's matrix shapes.

    Walks every matrix product a counted layer performs on one example and
    sums rows * inner * cols, without using the closed-form layer formulas.
    """
    has_conv = any(layer.kind in _CONV_KINDS for layer in net.layers)
    mults = 0
    for layer in net.layers:
        if has_conv and layer.kind in _FC_KINDS:
            continue
        if isinstance(layer, L.Dense):
            mults += layer.d_out * layer.d_in * 1  # W [d_out, d_in] @ x [d_in, 1]
        elif isinstance(layer, L.RpDense):
            mults += layer.n * layer.d_in * 1  # A @ x
            mults += layer.d_out * layer.n * 1  # U @ (Ax)
        elif isinstance(layer, L.Conv):
            k, p2 = layer.h * layer.h * layer.c_in, layer.p * layer.p
            mults += layer.c_out * k * p2  # F @ cols [k, p^2]
        elif isinstance(layer, L.RpConvI):
            k, p2 = layer.h * layer.h * layer.c_in, layer.p * layer.p
            mults += layer.n * k * p2  # A @ cols
            mults += layer.c_out * layer.n * p2  # U @ z
        elif isinstance(layer, L.RpConvII):
            p2 = layer.p * layer.p
            for _channel in range(layer.c_in):
                mults += layer.n * layer.h * layer.h * p2  # A_hat @ channel cols
                mults += layer.c_out * layer.n * p2  # U_j @ z_j
    return mults
