"""Published model architectures and the text grammar that describes them.

Layer tokens mirror the published specification vocabulary:

    FC <d>                   fully-connected layer with d units
    RPFC <n> <d>             random-projection FC layer (project to n, then d)
    CONV <h>x<h> <c>         convolution, c output channels (stride 1, same)
    RPCONV1 <n> <h>x<h> <c>  approach-I random-projection convolution
    RPCONV2 <n> <h>x<h> <c>  approach-II random-projection convolution
    MP <h>x<h>               max pooling (stride 2, same)
    BN | RELU | FLATTEN

CONV/RPCONV*/MP accept optional ``stride=<int>`` and ``padding=same|valid``
suffixes.  Convolutions default to stride 1 with same padding and pools to
stride 2 with same padding: the unique combination consistent with the
published FLOP table (28->14 spatial on MNIST, 32->16->8 on CIFAR-10).
"""

from __future__ import annotations

from .nn.network import (
    BatchNormSpec,
    ConvSpec,
    DenseSpec,
    FlattenSpec,
    MaxPoolSpec,
    NetworkSpec,
    ReluSpec,
    RpConvIISpec,
    RpConvISpec,
    RpDenseSpec,
)

MNIST_INPUT = (28, 28, 1)
CIFAR_INPUT = (32, 32, 3)


class ModelGrammarError(ValueError):
    """A layer token does not parse under the model grammar."""


def _parse_size(token: str, context: str) -> int:
    parts = token.lower().split("x")
    if len(parts) != 2 or parts[0] != parts[1]:
        raise ModelGrammarError(f"{context}: expected a square size like 3x3, got {token!r}")
    return _parse_int(parts[0], context)


def _parse_int(token: str, context: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise ModelGrammarError(f"{context}: expected an integer, got {token!r}") from None
    if value < 1:
        raise ModelGrammarError(f"{context}: expected a positive integer, got {value}")
    return value


def _parse_options(tokens: list[str], context: str, default_stride: int) -> tuple[int, str]:
    stride, padding = default_stride, "same"
    for token in tokens:
        key, sep, value = token.partition("=")
        if not sep:
            raise ModelGrammarError(f"{context}: unexpected token {token!r}")
        if key == "stride":
            stride = _parse_int(value, context)
        elif key == "padding":
            if value not in ("same", "valid"):
                raise ModelGrammarError(f"{context}: padding must be same or valid, got {value!r}")
            padding = value
        else:
            raise ModelGrammarError(f"{context}: unknown option {key!r}")
    return stride, padding


def parse_layer_token(token: str):
    """One grammar token -> one layer spec."""
    words = token.split()
    if not words:
        raise ModelGrammarError("empty layer token")
    op, args = words[0].upper(), words[1:]
    if op == "FC":
        if len(args) != 1:
            raise ModelGrammarError(f"FC takes one width argument, got {token!r}")
        return DenseSpec(_parse_int(args[0], token))
    if op == "RPFC":
        if len(args) != 2:
            raise ModelGrammarError(f"RPFC takes <n> <d>, got {token!r}")
        return RpDenseSpec(_parse_int(args[0], token), _parse_int(args[1], token))
    if op == "CONV":
        if len(args) < 2:
            raise ModelGrammarError(f"CONV takes <h>x<h> <c>, got {token!r}")
        h, c = _parse_size(args[0], token), _parse_int(args[1], token)
        stride, padding = _parse_options(args[2:], token, default_stride=1)
        return ConvSpec(h, c, stride=stride, padding=padding)
    if op in ("RPCONV1", "RPCONV2"):
        if len(args) < 3:
            raise ModelGrammarError(f"{op} takes <n> <h>x<h> <c>, got {token!r}")
        n = _parse_int(args[0], token)
        h, c = _parse_size(args[1], token), _parse_int(args[2], token)
        stride, padding = _parse_options(args[3:], token, default_stride=1)
        spec_cls = RpConvISpec if op == "RPCONV1" else RpConvIISpec
        return spec_cls(n, h, c, stride=stride, padding=padding)
    if op == "MP":
        if len(args) < 1:
            raise ModelGrammarError(f"MP takes <h>x<h>, got {token!r}")
        h = _parse_size(args[0], token)
        stride, padding = _parse_options(args[1:], token, default_stride=2)
        return MaxPoolSpec(h, stride=stride, padding=padding)
    if op == "BN":
        if args:
            raise ModelGrammarError(f"BN takes no arguments, got {token!r}")
        return BatchNormSpec()
    if op == "RELU":
        if args:
            raise ModelGrammarError(f"RELU takes no arguments, got {token!r}")
        return ReluSpec()
    if op == "FLATTEN":
        if args:
            raise ModelGrammarError(f"FLATTEN takes no arguments, got {token!r}")
        return FlattenSpec()
    raise ModelGrammarError(f"unknown layer token {token!r}")


def build_network(input_shape, layer_tokens, classes: int, seed: int = 0) -> NetworkSpec:
    specs = [parse_layer_token(token) for token in layer_tokens]
    return NetworkSpec(input_shape, specs, classes=classes, seed=seed)


# ---------------------------------------------------------------------------
# Published architectures
# ---------------------------------------------------------------------------


def _fcnn_tokens(widths, rp_n=None):
    tokens = ["FLATTEN"]
    for w in widths:
        tokens.append(f"FC {w}" if rp_n is None else f"RPFC {rp_n} {w}")
        tokens.append("RELU")
    return tokens


def mnist_fcnn(rp_n: int | None = None, seed: int = 0) -> NetworkSpec:
    return build_network(MNIST_INPUT, _fcnn_tokens([1024, 1024], rp_n), classes=10, seed=seed)


def cifar_fcnn(rp_n: int | None = None, seed: int = 0) -> NetworkSpec:
    return build_network(CIFAR_INPUT, _fcnn_tokens([4096, 4096], rp_n), classes=10, seed=seed)


def _conv_token(channels: int, variant: str | None, n: int | None, h: int = 5) -> str:
    if variant is None:
        return f"CONV {h}x{h} {channels}"
    if variant == "approach1":
        return f"RPCONV1 {n} {h}x{h} {channels}"
    if variant == "approach2":
        return f"RPCONV2 {n} {h}x{h} {channels}"
    raise ModelGrammarError(f"unknown RP variant {variant!r}")


def _cnn_tokens(conv_channels, fc_width, variant, n):
    tokens = []
    for channels in conv_channels:
        tokens += [_conv_token(channels, variant, n), "BN", "RELU", "MP 3x3"]
    tokens += ["FLATTEN", f"FC {fc_width}", "BN", "RELU"]
    return tokens


def mnist_cnn(variant: str | None = None, n: int | None = None, seed: int = 0) -> NetworkSpec:
    return build_network(MNIST_INPUT, _cnn_tokens([64, 128], 512, variant, n), classes=10, seed=seed)


def cifar_cnn(variant: str | None = None, n: int | None = None, seed: int = 0) -> NetworkSpec:
    return build_network(
        CIFAR_INPUT, _cnn_tokens([128, 192, 256], 512, variant, n), classes=10, seed=seed
    )


def mnist_cnn_small(variant: str | None = None, n: int | None = None, seed: int = 0) -> NetworkSpec:
    """The MNIST CNN with its conv stack scaled down to 16/32 channels."""
    return build_network(MNIST_INPUT, _cnn_tokens([16, 32], 512, variant, n), classes=10, seed=seed)


def subset_fcnn(widths, rp_n: int | None = None, seed: int = 0) -> NetworkSpec:
    """Desk-scale MNIST FCNN (e.g. widths=[256, 256])."""
    return build_network(MNIST_INPUT, _fcnn_tokens(list(widths), rp_n), classes=10, seed=seed)


def table2_models(seed: int = 0) -> dict[str, NetworkSpec]:
    """Every published complexity-table configuration, keyed by row label."""
    rows: dict[str, NetworkSpec] = {}
    rows["fcnn/mnist/original"] = mnist_fcnn(seed=seed)
    for n in (250, 150, 100, 50):
        rows[f"fcnn/mnist/n={n}"] = mnist_fcnn(rp_n=n, seed=seed)
    rows["fcnn/cifar10/original"] = cifar_fcnn(seed=seed)
    for n in (1500, 1000, 700, 500):
        rows[f"fcnn/cifar10/n={n}"] = cifar_fcnn(rp_n=n, seed=seed)
    rows["cnn/mnist/original"] = mnist_cnn(seed=seed)
    for n in (15, 10, 5, 3):
        rows[f"cnn/mnist/approach1/n={n}"] = mnist_cnn("approach1", n, seed=seed)
    for n in (10, 7, 5, 3):
        rows[f"cnn/mnist/approach2/n={n}"] = mnist_cnn("approach2", n, seed=seed)
    rows["cnn/cifar10/original"] = cifar_cnn(seed=seed)
    for n in (40, 25, 15, 10):
        rows[f"cnn/cifar10/approach1/n={n}"] = cifar_cnn("approach1", n, seed=seed)
    for n in (15, 10, 7, 5):
        rows[f"cnn/cifar10/approach2/n={n}"] = cifar_cnn("approach2", n, seed=seed)
    return rows
