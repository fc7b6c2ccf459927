"""Append-only differentiation tape and the reverse sweep over it."""

import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from best_of_many.exceptions import BmsError, NotScalar

from .tensor import Tensor

logger = logging.getLogger(__name__)

VJP = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_serials = itertools.count(1)
_active: List["Tape"] = []


@dataclass
class Node:
    """One recorded operation; leaves have no ``vjp``."""

    op: str
    inputs: Tuple[Optional[int], ...]
    vjp: Optional[VJP]
    shape: Tuple[int, ...]


class Gradients:
    """Gradient map produced by a backward sweep, keyed by tape node."""

    def __init__(
        self, serial: int, by_node: Dict[int, np.ndarray], leaves: Dict[int, Tensor]
    ) -> None:
        self.serial = serial
        self.by_node = by_node
        self.leaves = leaves

    def __getitem__(self, tensor: Tensor) -> np.ndarray:
        """Gradient with respect to ``tensor``; zeros when it did not reach the loss."""
        if tensor.tape_serial == self.serial and tensor.node in self.by_node:
            return self.by_node[tensor.node]
        return np.zeros_like(tensor.data)

    def __contains__(self, tensor: Tensor) -> bool:
        return tensor.tape_serial == self.serial and tensor.node in self.by_node

    def items(self) -> Iterator[Tuple[Tensor, np.ndarray]]:
        for node_id, tensor in self.leaves.items():
            yield tensor, self.by_node.get(node_id, np.zeros_like(tensor.data))


class Tape:
    """
    Records operations while active and replays them backwards once.

    Node ids are insertion indices, so inputs always precede outputs and the
    backward sweep is a plain reverse iteration.
    """

    def __init__(self) -> None:
        self.serial = next(_serials)
        self.nodes: List[Node] = []
        self.leaves: Dict[int, Tensor] = {}
        self.consumed = False

    def __enter__(self) -> "Tape":
        _active.append(self)
        return self

    def __exit__(self, *exc: object) -> None:
        _active.remove(self)

    def __len__(self) -> int:
        return len(self.nodes)

    def node_of(self, tensor: Tensor) -> Optional[int]:
        """Return the node id of ``tensor``, registering parameters as leaves."""
        if tensor.tape_serial == self.serial:
            return tensor.node
        if not tensor.requires_grad:
            return None
        node_id = len(self.nodes)
        self.nodes.append(Node("leaf", (), None, tensor.shape))
        self.leaves[node_id] = tensor
        tensor.node = node_id
        tensor.tape_serial = self.serial
        return node_id

    def record(
        self,
        result: Tensor,
        op: str,
        inputs: Sequence[Optional[int]],
        vjp: VJP,
    ) -> int:
        node_id = len(self.nodes)
        self.nodes.append(Node(op, tuple(inputs), vjp, result.shape))
        result.node = node_id
        result.tape_serial = self.serial
        return node_id

    def backward(self, loss: Tensor) -> Gradients:
        """
        Propagate d(loss)/d(node) to every node in exact reverse insertion order.

        Raises:
            NotScalar: If ``loss`` holds more than one value
        """
        if loss.size != 1:
            raise NotScalar(
                f"backward needs a scalar loss, got shape {loss.shape}",
                {"shape": list(loss.shape)},
            )
        if self.consumed:
            raise BmsError("Tape already used for a backward pass")
        self.consumed = True

        grads: Dict[int, np.ndarray] = {}
        if loss.tape_serial != self.serial or loss.node is None:
            logger.debug("Loss is not on this tape; all gradients are zero")
            return Gradients(self.serial, grads, dict(self.leaves))

        grads[loss.node] = np.ones(loss.shape, dtype=loss.dtype)
        for node_id in range(loss.node, -1, -1):
            node = self.nodes[node_id]
            upstream = grads.get(node_id)
            if upstream is None or node.vjp is None:
                continue
            for parent, grad in zip(node.inputs, node.vjp(upstream)):
                if parent is None or grad is None:
                    continue
                if parent in grads:
                    grads[parent] = grads[parent] + grad
                else:
                    grads[parent] = np.array(grad, copy=True)

        return Gradients(self.serial, grads, dict(self.leaves))


def active_tape() -> Optional[Tape]:
    """Return the innermost active tape, if any."""
    return _active[-1] if _active else None


def backward(loss: Tensor) -> Gradients:
    """
    Run the backward sweep of the tape that recorded ``loss``.

    Raises:
        NotScalar: If ``loss`` is not a scalar
        BmsError: If no active tape recorded ``loss``
    """
    for tape in reversed(_active):
        if tape.serial == loss.tape_serial:
            return tape.backward(loss)
    if loss.size != 1:
        raise NotScalar(f"backward needs a scalar loss, got shape {loss.shape}")
    raise BmsError("Loss was not recorded on an active tape")
