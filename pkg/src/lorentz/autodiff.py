"""Tape-based reverse-mode automatic differentiation over dense float64 arrays.

Every operation appends one node to the tape of its inputs. ``Tape.backward``
walks the nodes in reverse insertion order exactly once and accumulates
vector-Jacobian products.

Broadcasting is limited to scalar-vs-tensor. Anything else must be made
explicit with :func:`tile_cols`, :func:`reshape` or :func:`transpose`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .manifold import DimensionError

ARCOSH_GRAD_CAP = 1e8
NORM_EPS = 1e-15


class ContractError(RuntimeError):
    pass


@dataclass
class _Node:
    op: str
    parents: tuple[int, ...]
    vjp: Callable | None


class Var:
    __slots__ = ("tape", "id", "value", "requires_grad")
    __array_priority__ = 100

    def __init__(self, tape, id_, value, requires_grad):
        self.tape = tape
        self.id = id_
        self.value = value
        self.requires_grad = requires_grad

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Var(id={self.id}, shape={self.shape}, grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, index):
        return getitem(self, index)


class Tape:
    def __init__(self):
        self.nodes: list[_Node] = []
        self._leaves: list[Var] = []

    def _new(self, value, parents, vjp, op, requires_grad):
        value = np.asarray(value, dtype=np.float64)
        v = Var(self, len(self.nodes), value, requires_grad)
        self.nodes.append(_Node(op, parents, vjp if requires_grad else None))
        return v

    def param(self, value) -> Var:
        v = self._new(np.array(value, dtype=np.float64), (), None, "param", True)
        self._leaves.append(v)
        return v

    def const(self, value) -> Var:
        return self._new(np.array(value, dtype=np.float64), (), None, "const", False)

    def backward(self, loss: Var) -> dict[int, np.ndarray]:
        """Gradients of a scalar ``loss`` with respect to every parameter on this tape."""
        if loss.tape is not self:
            raise ContractError("loss was not recorded on this tape")
        if loss.value.shape != ():
            raise ContractError(f"backward needs a scalar loss, got shape {loss.value.shape}")
        grads: dict[int, np.ndarray] = {loss.id: np.ones(())}
        for nid in range(loss.id, -1, -1):
            node = self.nodes[nid]
            g = grads.get(nid)
            if g is None or node.vjp is None:
                continue
            for pid, pg in zip(node.parents, node.vjp(g)):
                if pg is None:
                    continue
                if pid in grads:
                    grads[pid] = grads[pid] + pg
                else:
                    grads[pid] = pg
        return {
            leaf.id: grads.get(leaf.id, np.zeros_like(leaf.value)) for leaf in self._leaves
        }


def _tape_of(*xs):
    for x in xs:
        if isinstance(x, Var):
            return x.tape
    raise ContractError("operation needs at least one Var input")


def _lift(tape, x):
    if isinstance(x, Var):
        if x.tape is not tape:
            raise ContractError("mixing Vars from different tapes")
        return x
    return tape.const(x)


def _record(op, value, inputs, vjp):
    tape = inputs[0].tape
    needs = any(x.requires_grad for x in inputs)
    return tape._new(value, tuple(x.id for x in inputs), vjp, op, needs)


def _unbroadcast(g, shape):
    if shape == g.shape:
        return g
    if shape == ():
        return np.sum(g)
    raise DimensionError(f"cannot reduce gradient of shape {g.shape} to {shape}")


def _binary_shapes(op, a, b):
    sa, sb = a.value.shape, b.value.shape
    if sa != sb and sa != () and sb != ():
        raise DimensionError(f"{op}: shapes {sa} and {sb} differ (only scalar broadcast allowed)")


def _binary(op, a, b, fwd, ga, gb):
    tape = _tape_of(a, b)
    a = _lift(tape, a)
    b = _lift(tape, b)
    _binary_shapes(op, a, b)
    av, bv = a.value, b.value
    out = fwd(av, bv)

    def vjp(g):
        return (
            _unbroadcast(ga(g, av, bv, out), av.shape) if a.requires_grad else None,
            _unbroadcast(gb(g, av, bv, out), bv.shape) if b.requires_grad else None,
        )

    return _record(op, out, (a, b), vjp)


def add(a, b):
    return _binary("add", a, b, np.add, lambda g, a, b, o: g * np.ones_like(o),
                   lambda g, a, b, o: g * np.ones_like(o))


def sub(a, b):
    return _binary("sub", a, b, np.subtract, lambda g, a, b, o: g * np.ones_like(o),
                   lambda g, a, b, o: -g * np.ones_like(o))


def mul(a, b):
    return _binary("mul", a, b, np.multiply, lambda g, a, b, o: g * b, lambda g, a, b, o: g * a)


def div(a, b):
    return _binary("div", a, b, np.divide, lambda g, a, b, o: g / b,
                   lambda g, a, b, o: -g * a / (b * b))


def _unary(op, x, fwd, grad):
    """``grad(g, x_value, out_value)`` returns the input cotangent."""
    out = fwd(x.value)
    xv = x.value

    def vjp(g):
        return (grad(g, xv, out),)

    return _record(op, out, (x,), vjp)


def sqrt(x):
    return _unary("sqrt", x, np.sqrt, lambda g, x, o: g * 0.5 / o)


def exp(x):
    return _unary("exp", x, np.exp, lambda g, x, o: g * o)


def log(x):
    return _unary("log", x, np.log, lambda g, x, o: g / x)


def cosh(x):
    return _unary("cosh", x, np.cosh, lambda g, x, o: g * np.sinh(x))


def sinh(x):
    return _unary("sinh", x, np.sinh, lambda g, x, o: g * np.cosh(x))


def tanh(x):
    return _unary("tanh", x, np.tanh, lambda g, x, o: g * (1.0 - o * o))


def arsinh(x):
    return _unary("arsinh", x, np.arcsinh, lambda g, x, o: g / np.sqrt(x * x + 1.0))


def _arcosh_grad(g, x, o):
    with np.errstate(divide="ignore"):
        d = 1.0 / np.sqrt(np.maximum(x * x - 1.0, 0.0))
    return g * np.minimum(d, ARCOSH_GRAD_CAP)


def arcosh(x):
    """arcosh with the argument clamped to >= 1 and a capped derivative near 1."""
    return _unary("arcosh", x, lambda v: np.arccosh(np.maximum(v, 1.0)), _arcosh_grad)


def relu(x):
    return _unary("relu", x, lambda v: np.maximum(v, 0.0), lambda g, x, o: g * (x > 0))


def sigmoid(x):
    def fwd(v):
        return np.where(v >= 0, 1.0 / (1.0 + np.exp(-np.abs(v))),
                        np.exp(-np.abs(v)) / (1.0 + np.exp(-np.abs(v))))

    return _unary("sigmoid", x, fwd, lambda g, x, o: g * o * (1.0 - o))


def identity(x):
    return x


def clamp(x, lo=None, hi=None):
    lo_v = -np.inf if lo is None else lo
    hi_v = np.inf if hi is None else hi
    return _unary("clamp", x, lambda v: np.clip(v, lo_v, hi_v),
                  lambda g, x, o: g * ((x >= lo_v) & (x <= hi_v)))


def sum(x, axis=None):
    shape = x.value.shape

    def grad(g, xv, o):
        if axis is None:
            return np.broadcast_to(g, shape).copy()
        return np.broadcast_to(np.expand_dims(g, axis), shape).copy()

    return _unary("sum", x, lambda v: np.sum(v, axis=axis), grad)


def reshape(x, shape):
    old = x.value.shape
    return _unary("reshape", x, lambda v: v.reshape(shape), lambda g, xv, o: g.reshape(old))


def transpose(x):
    if x.value.ndim != 2:
        raise DimensionError("transpose expects a matrix")
    return _unary("transpose", x, lambda v: v.T.copy(), lambda g, xv, o: g.T.copy())


def tile_cols(s, m):
    """Turn a length-n vector into the (n, m) matrix whose columns all equal ``s``."""
    if s.value.ndim != 1:
        raise DimensionError("tile_cols expects a vector")
    return _unary("tile_cols", s, lambda v: np.repeat(v[:, None], m, axis=1),
                  lambda g, xv, o: np.sum(g, axis=1))


def getitem(x, index):
    shape = x.value.shape
    parts = index if isinstance(index, tuple) else (index,)
    basic = all(isinstance(p, (slice, int)) for p in parts)

    def grad(g, xv, o):
        out = np.zeros(shape)
        if basic:
            out[index] = g
        else:
            np.add.at(out, index, g)
        return out

    return _unary("slice", x, lambda v: np.array(v[index], dtype=np.float64), grad)


def segment_sum(x, segment_ids, num_segments):
    """Sum rows of ``x`` that share a segment id; output has ``num_segments`` rows."""
    ids = np.asarray(segment_ids)
    if x.value.shape[0] != ids.shape[0]:
        raise DimensionError("segment_sum: one id per row required")

    def fwd(v):
        out = np.zeros((num_segments,) + v.shape[1:])
        np.add.at(out, ids, v)
        return out

    return _unary("segment_sum", x, fwd, lambda g, xv, o: g[ids])


def concat(xs: Sequence[Var], axis=0):
    tape = _tape_of(*xs)
    xs = [_lift(tape, x) for x in xs]
    values = [x.value for x in xs]
    out = np.concatenate(values, axis=axis)
    splits = np.cumsum([v.shape[axis] for v in values])[:-1]

    def vjp(g):
        parts = np.split(g, splits, axis=axis)
        return tuple(p if x.requires_grad else None for p, x in zip(parts, xs))

    return _record("concat", out, tuple(xs), vjp)


def matmul(a, b):
    tape = _tape_of(a, b)
    a = _lift(tape, a)
    b = _lift(tape, b)
    av, bv = a.value, b.value
    if av.ndim != 2 or bv.ndim != 2 or av.shape[1] != bv.shape[0]:
        raise DimensionError(f"matmul: incompatible shapes {av.shape} @ {bv.shape}")

    def vjp(g):
        return (g @ bv.T if a.requires_grad else None, av.T @ g if b.requires_grad else None)

    return _record("matmul", av @ bv, (a, b), vjp)


def matvec(W, x):
    tape = _tape_of(W, x)
    W = _lift(tape, W)
    x = _lift(tape, x)
    Wv, xv = W.value, x.value
    if Wv.ndim != 2 or xv.ndim != 1 or Wv.shape[1] != xv.shape[0]:
        raise DimensionError(f"matvec: incompatible shapes {Wv.shape} @ {xv.shape}")

    def vjp(g):
        return (np.outer(g, xv) if W.requires_grad else None, Wv.T @ g if x.requires_grad else None)

    return _record("matvec", Wv @ xv, (W, x), vjp)


def l2_norm(x):
    """Euclidean norm along the last axis."""
    out = np.sqrt(np.sum(x.value ** 2, axis=-1))

    def grad(g, xv, o):
        return g[..., None] * xv / np.maximum(o, NORM_EPS)[..., None]

    return _record("l2_norm", out, (x,), lambda g: (grad(g, x.value, out),))


def minkowski_inner(u, v):
    """Row-wise Minkowski inner product along the last axis."""
    tape = _tape_of(u, v)
    u = _lift(tape, u)
    v = _lift(tape, v)
    uv, vv = u.value, v.value
    if uv.shape != vv.shape or uv.shape[-1] < 2:
        raise DimensionError(f"minkowski_inner: shapes {uv.shape} and {vv.shape}")
    sign = np.ones(uv.shape[-1])
    sign[0] = -1.0
    out = np.sum(uv * vv * sign, axis=-1)

    def vjp(g):
        ge = g[..., None] * sign
        return (ge * vv if u.requires_grad else None, ge * uv if v.requires_grad else None)

    return _record("minkowski_inner", out, (u, v), vjp)


def softmax(logits, mask=None):
    """Row-wise softmax over the last axis; entries outside ``mask`` get weight 0."""
    lv = logits.value
    if mask is None:
        mask = np.ones(lv.shape, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != lv.shape:
        raise DimensionError("softmax mask must match logits shape")
    if not np.all(mask.any(axis=-1)):
        raise ContractError("softmax row with an empty mask")
    shifted = np.where(mask, lv, -np.inf)
    shifted = shifted - np.max(shifted, axis=-1, keepdims=True)
    e = np.where(mask, np.exp(shifted), 0.0)
    out = e / np.sum(e, axis=-1, keepdims=True)

    def grad(g, xv, o):
        return o * (g - np.sum(g * o, axis=-1, keepdims=True))

    return _record("softmax", out, (logits,), lambda g: (grad(g, lv, out),))


def log_softmax(logits):
    """Row-wise log-softmax over the last axis."""
    lv = logits.value
    shifted = lv - np.max(lv, axis=-1, keepdims=True)
    out = shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))

    def vjp(g):
        p = np.exp(out)
        return (g - p * np.sum(g, axis=-1, keepdims=True),)

    return _record("log_softmax", out, (logits,), vjp)


ACTIVATIONS = {"relu": relu, "tanh": tanh, "identity": identity}


def numerical_grad(f, x: np.ndarray, h=1e-5):
    """Central finite differences of the scalar function ``f`` at ``x``."""
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(x)
        flat[i] = orig - h
        fm = f(x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * h)
    return g


def relative_error(a, b, floor=1e-8):
    """Max-norm relative error ``|a - b|_inf / max(|a|_inf, |b|_inf, floor)``."""
    a = np.asarray(a)
    b = np.asarray(b)
    scale = max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0), floor)
    return float(np.max(np.abs(a - b), initial=0.0) / scale)


def gradient_check(build_loss, params: dict[str, np.ndarray], h=1e-5):
    """Compare tape gradients of ``build_loss(tape, vars) -> scalar Var`` with finite differences.

    Returns a dict mapping parameter name to relative error.
    """

    def analytic():
        tape = Tape()
        vs = {k: tape.param(v) for k, v in params.items()}
        loss = build_loss(tape, vs)
        grads = tape.backward(loss)
        return {k: grads[v.id] for k, v in vs.items()}

    ga = analytic()
    errors = {}
    for name in params:
        def f(xk, name=name):
            tape = Tape()
            vs = {k: tape.const(xk if k == name else v) for k, v in params.items()}
            return float(build_loss(tape, vs).value)

        gn = numerical_grad(f, params[name], h)
        errors[name] = relative_error(ga[name], gn)
    return errors
