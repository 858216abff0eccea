"""Minimal reverse-mode differentiation kernel and layers.

Just enough machinery for the two expert networks and the critic: dense
layers, sigmoid/tanh/softplus, an LSTM cell, elementwise arithmetic,
reductions, and a bias-corrected Adam. Everything is float64 and
single-sample (no batching); sequences are processed step by step.

Gradients accumulate additively into ``Tensor.grad`` and reset only via
``zero_grad``. A tape is implicit in the parent links; ``backward`` walks
the graph in reverse topological order.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

_MAGIC = b"MISACKPT"
_VERSION = 1


class Tensor:
    """Node in the computation graph wrapping a float64 ndarray."""

    __slots__ = ("value", "grad", "requires_grad", "_parents", "_vjp")

    def __init__(self, value, requires_grad: bool = False,
                 parents: tuple = (), vjp=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad) or any(
            p.requires_grad for p in parents)
        self._parents = parents
        self._vjp = vjp

    @property
    def shape(self):
        return self.value.shape

    def detach(self) -> "Tensor":
        return Tensor(self.value.copy())

    def backward(self, seed: np.ndarray | None = None) -> None:
        order: list[Tensor] = []
        seen: set[int] = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if id(node) in seen:
                continue
            if expanded:
                seen.add(id(node))
                order.append(node)
                continue
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen and p.requires_grad:
                    stack.append((p, False))
        self.grad = np.ones_like(self.value) if seed is None else \
            np.asarray(seed, dtype=np.float64)
        for node in reversed(order):
            if node._vjp is None or node.grad is None:
                continue
            for parent, contrib in node._vjp(node.grad):
                if not parent.requires_grad:
                    continue
                if parent.grad is None:
                    parent.grad = np.zeros_like(parent.value)
                parent.grad = parent.grad + contrib

    # operator sugar -----------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __truediv__(self, other):
        return div(self, other)

    def __getitem__(self, idx):
        return narrow(self, idx)


def tensor(value, requires_grad: bool = False) -> Tensor:
    return Tensor(value, requires_grad=requires_grad)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum ``grad`` back down to ``shape`` (scalar, length-1 or same shape)."""
    if shape == grad.shape:
        return grad
    if shape == ():
        return np.asarray(grad.sum())
    if shape == (1,):
        return np.asarray([grad.sum()])
    raise ValueError(f"cannot reduce gradient {grad.shape} to {shape}")


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = Tensor(a.value + b.value, parents=(a, b),
                 vjp=lambda g: ((a, _unbroadcast(g, a.shape)),
                                (b, _unbroadcast(g, b.shape))))
    return out


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    return Tensor(a.value - b.value, parents=(a, b),
                  vjp=lambda g: ((a, _unbroadcast(g, a.shape)),
                                 (b, _unbroadcast(-g, b.shape))))


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    return Tensor(a.value * b.value, parents=(a, b),
                  vjp=lambda g: ((a, _unbroadcast(g * b.value, a.shape)),
                                 (b, _unbroadcast(g * a.value, b.shape))))


def div(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    return Tensor(a.value / b.value, parents=(a, b),
                  vjp=lambda g: ((a, _unbroadcast(g / b.value, a.shape)),
                                 (b, _unbroadcast(-g * a.value / b.value ** 2,
                                                  b.shape))))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.value.ndim != 2 or b.value.ndim not in (1, 2):
        raise ValueError("matmul expects a 2-D left operand")
    if a.value.shape[1] != b.value.shape[0]:
        raise ValueError(f"matmul shape mismatch {a.shape} @ {b.shape}")

    def vjp(g):
        if b.value.ndim == 1:
            return ((a, np.outer(g, b.value)), (b, a.value.T @ g))
        return ((a, g @ b.value.T), (b, a.value.T @ g))

    return Tensor(a.value @ b.value, parents=(a, b), vjp=vjp)


def tanh(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    y = np.tanh(x.value)
    return Tensor(y, parents=(x,), vjp=lambda g: ((x, g * (1.0 - y * y)),))


def sigmoid(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    y = np.where(x.value >= 0, 1.0 / (1.0 + np.exp(-x.value)),
                 np.exp(x.value) / (1.0 + np.exp(x.value)))
    return Tensor(y, parents=(x,), vjp=lambda g: ((x, g * y * (1.0 - y)),))


def softplus(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    y = np.logaddexp(0.0, x.value)
    s = np.where(x.value >= 0, 1.0 / (1.0 + np.exp(-x.value)),
                 np.exp(x.value) / (1.0 + np.exp(x.value)))
    return Tensor(y, parents=(x,), vjp=lambda g: ((x, g * s),))


def exp(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    y = np.exp(x.value)
    return Tensor(y, parents=(x,), vjp=lambda g: ((x, g * y),))


def log(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    return Tensor(np.log(x.value), parents=(x,),
                  vjp=lambda g: ((x, g / x.value),))


def sin(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    return Tensor(np.sin(x.value), parents=(x,),
                  vjp=lambda g: ((x, g * np.cos(x.value)),))


def cos(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    return Tensor(np.cos(x.value), parents=(x,),
                  vjp=lambda g: ((x, -g * np.sin(x.value)),))


def square(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    return Tensor(x.value ** 2, parents=(x,),
                  vjp=lambda g: ((x, 2.0 * g * x.value),))


def minimum(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    mask = a.value <= b.value
    return Tensor(np.where(mask, a.value, b.value), parents=(a, b),
                  vjp=lambda g: ((a, _unbroadcast(g * mask, a.shape)),
                                 (b, _unbroadcast(g * ~mask, b.shape))))


def maximum(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    mask = a.value >= b.value
    return Tensor(np.where(mask, a.value, b.value), parents=(a, b),
                  vjp=lambda g: ((a, _unbroadcast(g * mask, a.shape)),
                                 (b, _unbroadcast(g * ~mask, b.shape))))


def sum_(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    return Tensor(x.value.sum(), parents=(x,),
                  vjp=lambda g: ((x, np.full_like(x.value, float(g))),))


def mean(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    n = x.value.size
    return Tensor(x.value.mean(), parents=(x,),
                  vjp=lambda g: ((x, np.full_like(x.value, float(g) / n)),))


def concat(parts: list[Tensor]) -> Tensor:
    parts = [_as_tensor(p) for p in parts]
    sizes = [p.value.size for p in parts]
    offsets = np.cumsum([0] + sizes)

    def vjp(g):
        return tuple(
            (p, g[offsets[i]:offsets[i + 1]].reshape(p.value.shape))
            for i, p in enumerate(parts))

    return Tensor(np.concatenate([p.value.ravel() for p in parts]),
                  parents=tuple(parts), vjp=vjp)


def narrow(x: Tensor, idx) -> Tensor:
    x = _as_tensor(x)

    def vjp(g):
        full = np.zeros_like(x.value)
        full[idx] = g
        return ((x, full),)

    return Tensor(x.value[idx], parents=(x,), vjp=vjp)


def logsumexp(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    m = float(np.max(x.value))
    e = np.exp(x.value - m)
    s = float(e.sum())
    soft = e / s
    return Tensor(np.log(s) + m, parents=(x,),
                  vjp=lambda g: ((x, float(g) * soft),))


def log_softmax(x: Tensor) -> Tensor:
    return sub(x, logsumexp(x))


def zero_grad(params: dict) -> None:
    for p in params.values():
        p.grad = None


# ------------------------------------------------------------------ layers

def init_uniform(shape: tuple, fan_in: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform(-1, 1) scaled by 1/sqrt(fan_in)."""
    bound = 1.0 / np.sqrt(max(1, fan_in))
    return rng.uniform(-bound, bound, size=shape)


def dense_params(name: str, n_in: int, n_out: int,
                 rng: np.random.Generator) -> dict:
    return {f"{name}.W": Tensor(init_uniform((n_out, n_in), n_in, rng),
                                requires_grad=True),
            f"{name}.b": Tensor(np.zeros(n_out), requires_grad=True)}


def dense_forward(x: Tensor, W: Tensor, b: Tensor) -> Tensor:
    """Affine map W x + b, recorded on the tape."""
    if W.value.ndim != 2 or W.value.shape[1] != x.value.shape[0] \
            or b.value.shape[0] != W.value.shape[0]:
        raise ValueError(f"dense shape mismatch W{W.shape} x{x.shape} b{b.shape}")
    return add(matmul(W, x), b)


def lstm_params(name: str, n_in: int, hidden: int,
                rng: np.random.Generator) -> dict:
    out = {}
    for gate in ("i", "f", "o", "c"):
        out.update(dense_params(f"{name}.{gate}", n_in + hidden, hidden, rng))
    return out


def recurrent_step(x: Tensor, hidden: Tensor, cell: Tensor,
                   params: dict, name: str) -> tuple[Tensor, Tensor]:
    """Standard LSTM update with input/forget/output gates and a tanh
    candidate cell."""
    if hidden.value.shape != cell.value.shape:
        raise ValueError("hidden and cell shapes must agree")
    z = concat([x, hidden])
    i = sigmoid(dense_forward(z, params[f"{name}.i.W"], params[f"{name}.i.b"]))
    f = sigmoid(dense_forward(z, params[f"{name}.f.W"], params[f"{name}.f.b"]))
    o = sigmoid(dense_forward(z, params[f"{name}.o.W"], params[f"{name}.o.b"]))
    c_hat = tanh(dense_forward(z, params[f"{name}.c.W"], params[f"{name}.c.b"]))
    cell_new = add(mul(f, cell), mul(i, c_hat))
    hidden_new = mul(o, tanh(cell_new))
    return hidden_new, cell_new


# -------------------------------------------------------------------- Adam

@dataclass
class AdamState:
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params: dict, state: AdamState) -> AdamState:
    """Bias-corrected Adam update applied in place from ``Tensor.grad``;
    missing gradients are treated as zero."""
    state.step += 1
    t = state.step
    for name, p in params.items():
        g = p.grad if p.grad is not None else np.zeros_like(p.value)
        m = state.m.get(name)
        if m is None:
            m = np.zeros_like(p.value)
            state.v[name] = np.zeros_like(p.value)
        v = state.v[name]
        m = state.beta1 * m + (1 - state.beta1) * g
        v = state.beta2 * v + (1 - state.beta2) * g * g
        state.m[name], state.v[name] = m, v
        m_hat = m / (1 - state.beta1 ** t)
        v_hat = v / (1 - state.beta2 ** t)
        p.value = p.value - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return state


# -------------------------------------------------------------- grad check

@dataclass
class GradCheckReport:
    max_rel_err: float
    worst_param: str
    n_checked: int

    @property
    def passed(self) -> bool:
        return np.isfinite(self.max_rel_err)


def grad_check(fn, params: dict, tol: float = 1e-4, h: float = 1e-6,
               sample: int | None = None, atol: float | None = None,
               rng: np.random.Generator | None = None) -> GradCheckReport:
    """Compare reverse-mode gradients of the scalar ``fn(params)`` against
    central finite differences, elementwise (or on ``sample`` random
    entries per parameter).

    The error is relative to the larger gradient magnitude with an
    absolute floor ``atol`` (default 1e-4 * (1 + |loss|)): below that
    scale the finite difference itself is rounding noise at h = 1e-6.
    """
    zero_grad(params)
    out = fn(params)
    out.backward()
    if atol is None:
        atol = 1e-4 * (1.0 + abs(float(out.value)))
    analytic = {k: (p.grad.copy() if p.grad is not None
                    else np.zeros_like(p.value)) for k, p in params.items()}
    worst, worst_name, checked = 0.0, "", 0
    rng = rng or np.random.default_rng(0)
    for name, p in params.items():
        flat = p.value.ravel()
        idxs = range(flat.size) if sample is None else \
            rng.choice(flat.size, size=min(sample, flat.size), replace=False)
        for i in idxs:
            orig = flat[i]
            flat[i] = orig + h
            up = float(fn(params).value)
            flat[i] = orig - h
            dn = float(fn(params).value)
            flat[i] = orig
            fd = (up - dn) / (2 * h)
            ad = analytic[name].ravel()[i]
            rel = abs(ad - fd) / max(abs(ad), abs(fd), atol)
            checked += 1
            if rel > worst:
                worst, worst_name = rel, f"{name}[{i}]"
    return GradCheckReport(max_rel_err=worst, worst_param=worst_name,
                           n_checked=checked)


# ------------------------------------------------------------- checkpoints

def save_params(path, params: dict, meta: dict | None = None) -> None:
    """Write a checkpoint: magic, version, JSON manifest with shapes and
    offsets, then the raw little-endian float64 blob. Round-trips
    bit-exactly."""
    tensors = []
    blobs = []
    offset = 0
    for name in sorted(params):
        value = params[name].value if isinstance(params[name], Tensor) \
            else np.asarray(params[name], dtype=np.float64)
        raw = np.ascontiguousarray(value, dtype="<f8").tobytes()
        tensors.append({"name": name, "shape": list(value.shape),
                        "offset": offset, "nbytes": len(raw)})
        blobs.append(raw)
        offset += len(raw)
    manifest = json.dumps({"meta": meta or {}, "tensors": tensors},
                          sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IQ", _VERSION, len(manifest)))
        fh.write(manifest)
        for raw in blobs:
            fh.write(raw)


def load_params(path) -> tuple[dict, dict]:
    """Read a checkpoint back into {name: ndarray} plus its metadata."""
    with open(path, "rb") as fh:
        if fh.read(8) != _MAGIC:
            raise ValueError(f"{path}: not a parameter checkpoint")
        version, mlen = struct.unpack("<IQ", fh.read(12))
        if version != _VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        manifest = json.loads(fh.read(mlen))
        blob = fh.read()
    out = {}
    for spec in manifest["tensors"]:
        raw = blob[spec["offset"]:spec["offset"] + spec["nbytes"]]
        out[spec["name"]] = np.frombuffer(raw, dtype="<f8").reshape(
            spec["shape"]).copy()
    return out, manifest["meta"]
