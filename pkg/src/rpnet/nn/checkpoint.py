"""Parameter checkpoint container.

Layout:

* 8-byte magic ``RPNETCK1``
* little-endian uint32 header length
* UTF-8 JSON header: format version, input shape, class count, network seed,
  the seed of every fixed projection matrix (keyed by layer index), and the
  payload manifest -- one ``{layer, name, shape}`` entry per tensor in payload
  order (``layer == len(layers)`` denotes the classifier)
* concatenated little-endian float64 tensor payloads

Fixed projection matrices are never written; they are rebuilt from their
recorded seeds when the owning NetworkSpec is reconstructed.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .network import NetworkSpec

MAGIC = b"RPNETCK1"
FORMAT_VERSION = 1


def save_checkpoint(path, net: NetworkSpec, params: list[dict]) -> None:
    manifest = []
    payload = bytearray()
    for layer_index, layer_params in enumerate(params):
        for name, tensor in layer_params.items():
            arr = np.ascontiguousarray(tensor, dtype="<f8")
            manifest.append({"layer": layer_index, "name": name, "shape": list(arr.shape)})
            payload.extend(arr.tobytes())
    header = json.dumps(
        {
            "format": FORMAT_VERSION,
            "input_shape": list(net.input_shape),
            "classes": net.classes,
            "network_seed": net.seed,
            "rp_seeds": {str(i): s for i, s in net.rp_seeds.items()},
            "tensors": manifest,
        },
        sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(header)))
        f.write(header)
        f.write(bytes(payload))


def read_header(path) -> dict:
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != MAGIC:
            raise ValueError(f"not a checkpoint file: bad magic {magic!r}")
        (header_len,) = struct.unpack("<I", f.read(4))
        return json.loads(f.read(header_len).decode("utf-8"))


def load_checkpoint(path, net: NetworkSpec) -> list[dict]:
    """Restore parameters for `net`; validates shapes and RP seeds."""
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:8] != MAGIC:
        raise ValueError(f"not a checkpoint file: bad magic {raw[:8]!r}")
    (header_len,) = struct.unpack("<I", raw[8:12])
    header = json.loads(raw[12 : 12 + header_len].decode("utf-8"))
    if header["format"] != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format {header['format']}")
    if tuple(header["input_shape"]) != net.input_shape or header["classes"] != net.classes:
        raise ValueError("checkpoint architecture does not match the network spec")
    recorded = {int(k): v for k, v in header["rp_seeds"].items()}
    if recorded != net.rp_seeds:
        raise ValueError("checkpoint projection seeds do not match the network spec")
    params: list[dict] = [{} for _ in range(len(net.layers) + 1)]
    offset = 12 + header_len
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=offset).reshape(shape)
        params[entry["layer"]][entry["name"]] = arr.astype(np.float64)
        offset += count * 8
    if offset != len(raw):
        raise ValueError("checkpoint payload length mismatch")
    return params
