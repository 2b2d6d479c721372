import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from ..utils.errors import GraphError, ShapeError

_state = threading.local()


def _graph_stack() -> List["ComputeGraph"]:
    stack = getattr(_state, "graphs", None)
    if stack is None:
        stack = _state.graphs = []
    return stack


def grad_enabled() -> bool:
    return getattr(_state, "grad_enabled", True)


@contextmanager
def no_grad():
    """Primitives compute values only; nothing is recorded."""
    previous = grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


def active_graph() -> Optional["ComputeGraph"]:
    if not grad_enabled():
        return None
    stack = _graph_stack()
    return stack[-1] if stack else None


BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


@dataclass
class OpRecord:
    kind: str
    parents: Tuple["DiffArray", ...]
    backward_fn: BackwardFn
    graph: "ComputeGraph"
    index: int


class DiffArray:
    def __init__(self, values, requires_grad: bool = False, dtype=None):
        values = np.asarray(values, dtype=dtype)
        if not np.issubdtype(values.dtype, np.floating):
            values = values.astype(np.float64)
        self.values: np.ndarray = values
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.op_record: Optional[OpRecord] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def dtype(self):
        return self.values.dtype

    def item(self) -> float:
        return float(self.values)

    def zero_grad(self):
        self.grad = None

    def accumulate_grad(self, grad: np.ndarray):
        if grad.shape != self.values.shape:
            raise ShapeError("accumulate_grad", self.values.shape, grad.shape)
        if self.grad is None:
            self.grad = np.array(grad, dtype=self.values.dtype, copy=True)
        else:
            self.grad += grad

    def __repr__(self) -> str:
        kind = self.op_record.kind if self.op_record else "leaf"
        return f"DiffArray(shape={self.shape}, dtype={self.dtype}, op={kind}, requires_grad={self.requires_grad})"


def record(kind: str, values: np.ndarray, parents: Tuple[DiffArray, ...],
           backward_fn: BackwardFn) -> DiffArray:
    out = DiffArray(values)
    graph = active_graph()
    if graph is not None and any(p.requires_grad for p in parents):
        out.requires_grad = True
        graph._append(out, kind, parents, backward_fn)
    return out


class ComputeGraph:
    """Ordered tape of primitive operations for one forward pass.

    Recording order is a topological order, so backward walks the tape in
    reverse and visits every operation once. A graph is discarded after its
    backward.
    """

    def __init__(self):
        self._tape: List[DiffArray] = []
        self._consumed = False

    def __enter__(self) -> "ComputeGraph":
        _graph_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        stack = _graph_stack()
        if not stack or stack[-1] is not self:
            raise GraphError("compute graphs exited out of order")
        stack.pop()
        return False

    def __len__(self) -> int:
        return len(self._tape)

    def _append(self, out: DiffArray, kind: str, parents: Tuple[DiffArray, ...],
                backward_fn: BackwardFn):
        if self._consumed:
            raise GraphError("recording into a graph that already ran backward")
        out.op_record = OpRecord(kind, tuple(parents), backward_fn, self, len(self._tape))
        self._tape.append(out)

    def backward(self, loss: DiffArray, inputs: Optional[Iterable[DiffArray]] = None):
        """Accumulate d loss / d leaf into every requires_grad leaf, or only into `inputs`."""
        if self._consumed:
            raise GraphError("backward already ran on this graph")
        if not self._tape:
            raise GraphError("backward on an empty graph")
        if loss.values.shape != ():
            raise GraphError(f"backward needs a scalar loss, got shape {loss.values.shape}")
        if loss.op_record is None or loss.op_record.graph is not self:
            raise GraphError("loss was not produced by this graph")

        allowed = None if inputs is None else {id(x) for x in inputs}
        pending: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.values)}

        for node in reversed(self._tape[:loss.op_record.index + 1]):
            grad = pending.pop(id(node), None)
            if grad is None:
                continue
            record_ = node.op_record
            for parent, parent_grad in zip(record_.parents, record_.backward_fn(grad)):
                if parent_grad is None or not parent.requires_grad:
                    continue
                if parent.op_record is None:
                    if allowed is None or id(parent) in allowed:
                        parent.accumulate_grad(parent_grad)
                elif parent.op_record.graph is self:
                    key = id(parent)
                    pending[key] = pending[key] + parent_grad if key in pending else parent_grad
                # nodes of other graphs are constants here

        loss.grad = np.ones_like(loss.values)
        self._consumed = True
        self._tape = []


def backward(loss: DiffArray, inputs: Optional[Iterable[DiffArray]] = None):
    if loss.op_record is None:
        raise GraphError("backward on an empty graph: the loss was not recorded")
    loss.op_record.graph.backward(loss, inputs=inputs)
