"""Dense ReLU network over a flat parameter vector, with manual backprop.

Parameter packing order, layer by layer: the weight matrix of shape
``(n_out, n_in)`` in row-major order, then the bias vector ``(n_out,)``.

Parameters may carry leading batch dimensions (``theta`` of shape ``(m, q)``
holds ``m`` independent networks); inputs then have shape ``(m, B, n_in)``.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MlpSpec:
    layer_sizes: tuple = (1, 20, 10, 5, 2)
    hidden_activation: str = "relu"

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(n) for n in self.layer_sizes))
        if len(self.layer_sizes) < 2 or min(self.layer_sizes) < 1:
            raise ValueError(f"invalid layer sizes {self.layer_sizes}")
        if self.hidden_activation != "relu":
            raise ValueError(f"unsupported activation {self.hidden_activation!r}")

    @property
    def n_params(self):
        s = self.layer_sizes
        return sum(s[l] * s[l + 1] + s[l + 1] for l in range(len(s) - 1))

    def slices(self):
        """(weight slice, bias slice, (n_out, n_in)) for each layer."""
        out = []
        pos = 0
        s = self.layer_sizes
        for l in range(len(s) - 1):
            n_in, n_out = s[l], s[l + 1]
            ws = slice(pos, pos + n_in * n_out)
            pos += n_in * n_out
            bs = slice(pos, pos + n_out)
            pos += n_out
            out.append((ws, bs, (n_out, n_in)))
        return out


def unpack(theta, spec):
    theta = np.asarray(theta)
    lead = theta.shape[:-1]
    if theta.shape[-1] != spec.n_params:
        raise ValueError(f"theta has {theta.shape[-1]} entries, spec needs {spec.n_params}")
    return [(theta[..., ws].reshape(lead + shape), theta[..., bs])
            for ws, bs, shape in spec.slices()]


def pack(layers):
    lead = layers[0][0].shape[:-2]
    parts = []
    for W, b in layers:
        parts.append(W.reshape(lead + (-1,)))
        parts.append(b)
    return np.concatenate(parts, axis=-1)


def init(spec, rng, count=None):
    """He-normal weights (variance 2/fan_in), zero biases."""
    lead = () if count is None else (count,)
    layers = []
    for _, _, (n_out, n_in) in spec.slices():
        W = rng.normal(0.0, np.sqrt(2.0 / n_in), size=lead + (n_out, n_in))
        layers.append((W, np.zeros(lead + (n_out,))))
    return pack(layers)


def forward(theta, spec, x):
    """Returns (output, cache). Hidden layers are ReLU; the last layer is affine."""
    x = np.asarray(x, float)
    single = x.ndim == 1
    if x.shape[-1] != spec.layer_sizes[0]:
        raise ValueError(f"input width {x.shape[-1]} != {spec.layer_sizes[0]}")
    if single:
        x = x[None, :]
    layers = unpack(theta, spec)
    acts = [x]
    pre = []
    a = x
    for l, (W, b) in enumerate(layers):
        z = a @ np.swapaxes(W, -1, -2) + b[..., None, :]
        pre.append(z)
        a = z if l == len(layers) - 1 else np.maximum(z, 0.0)
        acts.append(a)
    cache = (acts, pre, single)
    return (a[0] if single else a), cache


def backward(theta, spec, cache, d_output):
    """Gradient of <d_output, forward(x)> w.r.t. theta (summed over the batch)."""
    acts, pre, single = cache
    d = np.asarray(d_output, float)
    if single:
        d = d[None, :]
    if d.shape != acts[-1].shape:
        raise ValueError(f"d_output shape {d.shape} does not match cache {acts[-1].shape}")
    layers = unpack(theta, spec)
    grads = [None] * len(layers)
    for l in range(len(layers) - 1, -1, -1):
        W, _ = layers[l]
        if l < len(layers) - 1:
            d = d * (pre[l] > 0)
        gW = np.swapaxes(d, -1, -2) @ acts[l]
        gb = d.sum(axis=-2)
        grads[l] = (gW, gb)
        if l > 0:
            d = d @ W
    return pack(grads)


_MAGIC = b"RMLP1"


def save_checkpoint(path, theta, spec):
    """Header line with the layer layout, then raw little-endian float64 values."""
    theta = np.asarray(theta, dtype="<f8")
    sizes = ",".join(str(n) for n in spec.layer_sizes)
    shape = ",".join(str(n) for n in theta.shape)
    header = f"{_MAGIC.decode()} layers={sizes} activation={spec.hidden_activation} shape={shape}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(theta.tobytes(order="C"))


def load_checkpoint(path):
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        if not header or header[0] != _MAGIC.decode():
            raise ValueError(f"{path}: not an MLP checkpoint")
        fields = dict(kv.split("=", 1) for kv in header[1:])
        spec = MlpSpec(tuple(int(n) for n in fields["layers"].split(",")),
                       fields["activation"])
        shape = tuple(int(n) for n in fields["shape"].split(","))
        theta = np.frombuffer(fh.read(), dtype="<f8").reshape(shape).astype(float)
    if theta.shape[-1] != spec.n_params:
        raise ValueError(f"{path}: parameter count does not match header")
    return theta, spec
