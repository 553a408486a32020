"""Output functions h applied to input draws."""

from dataclasses import dataclass

import numpy as np

from trulr.models.enums import OutputKind


def identity(x):
    return np.asarray(x, dtype=np.float64)


@dataclass(frozen=True)
class TailIdentity:
    """h(x) = x * 1{|x| >= a}"""

    a: float

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.where(np.abs(x) >= self.a, x, 0.0)


OUTPUTS = {OutputKind.IDENTITY: identity}


def output_function(kind: OutputKind):
    return OUTPUTS[kind]
