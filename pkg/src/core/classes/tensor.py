import threading
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import NumericError, TapeError

# backward rule: upstream gradient -> one gradient (or None) per input
BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_local = threading.local()


def _tape_stack() -> List["Tape"]:
    if not hasattr(_local, "stack"):
        _local.stack = []
    return _local.stack


def active_tape() -> Optional["Tape"]:
    stack = _tape_stack()
    return stack[-1] if stack else None


class Tensor:
    """Dense row-major array with an optional gradient requirement.

    Args:
        data: Anything numpy can turn into an array. Floating inputs keep
            their precision; integer and python scalars become float64.
        requires_grad (bool): Whether backward should produce a gradient
            for this tensor when it is a leaf.
        name (Optional[str]): Parameter name, used in diagnostics.
    """

    __slots__ = ("data", "requires_grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        array = np.asarray(data)
        if not np.issubdtype(array.dtype, np.floating):
            array = array.astype(np.float64)
        self.data: np.ndarray = array
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, requires_grad={self.requires_grad}{label})"

    # operator sugar; the implementations live in ops.py
    def __add__(self, other):
        from src.core.classes import ops
        return ops.add(self, ops.as_tensor(other, like=self))

    __radd__ = __add__

    def __sub__(self, other):
        from src.core.classes import ops
        return ops.sub(self, ops.as_tensor(other, like=self))

    def __mul__(self, other):
        from src.core.classes import ops
        if np.isscalar(other):
            return ops.scale(self, float(other))
        return ops.mul(self, ops.as_tensor(other, like=self))

    __rmul__ = __mul__

    def __matmul__(self, other):
        from src.core.classes import ops
        return ops.matmul(self, other)


@dataclass
class TapeRecord:
    inputs: Tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn
    op: str


class Tape:
    """Records differentiable ops executed while it is active.

    Use it as a context manager around a forward pass, then call
    :meth:`backward` once with the scalar loss. Tapes are thread-local, so
    independent tapes may run in parallel threads.

    Examples:
    >>> from src.core.classes import ops
    >>> x = Tensor([3.0], requires_grad=True)
    >>> with Tape() as tape:
    ...     loss = ops.sum_all(x + x)
    >>> tape.backward(loss)[x]
    array([2.])
    """

    def __init__(self):
        self.records: List[TapeRecord] = []
        self._produced: Dict[int, int] = {}
        self._consumed = False

    def __enter__(self) -> "Tape":
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        stack = _tape_stack()
        if not stack or stack[-1] is not self:
            raise TapeError("tape stack corrupted: tapes must be exited in LIFO order")
        stack.pop()
        return False

    def __len__(self) -> int:
        return len(self.records)

    def record(self, inputs: Tuple[Tensor, ...], output: Tensor, backward: BackwardFn, op: str):
        if self._consumed:
            raise TapeError("cannot record on a tape that has already run backward")
        self._produced[id(output)] = len(self.records)
        self.records.append(TapeRecord(inputs=inputs, output=output, backward=backward, op=op))

    def backward(self, seed: Tensor) -> Dict[Tensor, np.ndarray]:
        """Propagate d(seed)/d(.) back through the recorded ops.

        Args:
            seed (Tensor): Scalar tensor produced by an op on this tape.

        Returns:
            Dict[Tensor, np.ndarray]: Gradient for every leaf that requires
            one. Leaves with ``requires_grad=False`` get no entry.
        """
        if self._consumed:
            raise TapeError("backward already ran on this tape; record a new forward pass")
        if id(seed) not in self._produced:
            raise TapeError("seed tensor was not produced on this tape")
        if seed.size != 1:
            raise TapeError(f"seed must be a scalar, got shape {seed.shape}")
        self._consumed = True

        grads: Dict[int, np.ndarray] = {id(seed): np.ones_like(seed.data)}
        leaves: Dict[int, Tensor] = {}

        for index in range(self._produced[id(seed)], -1, -1):
            rec = self.records[index]
            upstream = grads.pop(id(rec.output), None)
            if upstream is None:
                continue
            input_grads = rec.backward(upstream)
            for tensor, grad in zip(rec.inputs, input_grads):
                if grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                if key not in self._produced:
                    leaves[key] = tensor
                if key in grads:
                    grads[key] = grads[key] + grad
                else:
                    grads[key] = grad

        return {tensor: grads[key] for key, tensor in leaves.items() if key in grads}


def record_op(
    op: str,
    out: np.ndarray,
    inputs: Tuple[Tensor, ...],
    backward: BackwardFn,
) -> Tensor:
    """Wrap a forward result, check it is finite and put it on the active tape."""
    if not np.all(np.isfinite(out)):
        raise NumericError(f"{op} produced non-finite values")
    requires_grad = any(t.requires_grad for t in inputs)
    result = Tensor(out, requires_grad=requires_grad)
    tape = active_tape()
    if tape is not None and requires_grad:
        tape.record(inputs, result, backward, op)
    return result
