from abc import ABC
from typing import Dict, Iterator, Mapping, Tuple

import numpy as np

from best_of_many.exceptions import ShapeMismatch
from best_of_many.tensor import Tensor


class Module(ABC):
    """
    Abstract base class for parameterized building blocks.

    Parameters live in ``self.params``; nested blocks are registered in
    ``self.children`` and their parameters are addressed as ``child.name``.
    """

    def __init__(self) -> None:
        self.params: Dict[str, Tensor] = {}
        self.children: Dict[str, "Module"] = {}

    def add_param(self, name: str, data: np.ndarray) -> Tensor:
        tensor = Tensor(data, requires_grad=True, name=name)
        self.params[name] = tensor
        return tensor

    def add_child(self, name: str, module: "Module") -> "Module":
        self.children[name] = module
        return module

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Tensor]]:
        for name, tensor in self.params.items():
            yield prefix + name, tensor
        for child_name, child in self.children.items():
            yield from child.named_parameters(f"{prefix}{child_name}.")

    def parameters(self) -> Dict[str, Tensor]:
        return dict(self.named_parameters())

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: tensor.data.copy() for name, tensor in self.named_parameters()}

    def load_state(self, state: Mapping[str, np.ndarray]) -> None:
        """
        Copy parameter values from ``state`` into this module in place.

        Raises:
            ShapeMismatch: If a name is missing or a shape differs
        """
        params = self.parameters()
        missing = sorted(set(params) - set(state))
        if missing:
            raise ShapeMismatch(
                f"State is missing parameters: {', '.join(missing)}",
                {"missing": missing},
            )
        for name, tensor in params.items():
            value = np.asarray(state[name])
            if value.shape != tensor.shape:
                raise ShapeMismatch(
                    f"Parameter {name}: expected shape {tensor.shape}, "
                    f"got {value.shape}"
                )
            tensor.data[...] = value

    def zero_(self) -> None:
        """Set every parameter to zero."""
        for _, tensor in self.named_parameters():
            tensor.data[...] = 0.0

    def num_parameters(self) -> int:
        return sum(tensor.size for _, tensor in self.named_parameters())
