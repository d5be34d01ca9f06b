from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import NonFiniteGradientError, ShapeMismatchError
from .tensor import Tensor

ParamList = list[dict[str, Tensor]]


@dataclass
class AdamState:
    """Moment buffers (one pair per weight tensor) and the step counter."""

    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: ParamList = field(default_factory=list)
    v: ParamList = field(default_factory=list)

    @classmethod
    def zeros_like(cls, params: Sequence[dict[str, Tensor]], **hyper) -> "AdamState":
        return cls(
            m=[{k: np.zeros_like(w) for k, w in layer.items()} for layer in params],
            v=[{k: np.zeros_like(w) for k, w in layer.items()} for layer in params],
            **hyper,
        )


def adam_step(
    params: Sequence[dict[str, Tensor]],
    grads: Sequence[dict[str, Tensor]],
    state: AdamState,
) -> tuple[ParamList, AdamState]:
    """One bias-corrected Adam update. Inputs are left untouched."""
    if len(params) != len(grads):
        raise ShapeMismatchError(
            f"{len(params)} parameter groups, {len(grads)} gradient groups"
        )

    if not state.m:
        state = AdamState.zeros_like(
            params,
            lr=state.lr,
            beta1=state.beta1,
            beta2=state.beta2,
            epsilon=state.epsilon,
            t=state.t,
        )

    for layer_grads in grads:
        for name, g in layer_grads.items():
            if not np.all(np.isfinite(g)):
                raise NonFiniteGradientError(f"Non-finite gradient for '{name}'")

    t = state.t + 1
    correction1 = 1.0 - state.beta1**t
    correction2 = 1.0 - state.beta2**t

    new_params: ParamList = []
    new_m: ParamList = []
    new_v: ParamList = []
    groups = zip(params, grads, state.m, state.v)
    for layer_params, layer_grads, layer_m, layer_v in groups:
        p_out, m_out, v_out = {}, {}, {}
        for name, w in layer_params.items():
            g = layer_grads[name]
            if g.shape != w.shape:
                raise ShapeMismatchError(
                    f"Gradient for '{name}' has shape {g.shape}, weight {w.shape}"
                )

            m = state.beta1 * layer_m[name] + (1.0 - state.beta1) * g
            v = state.beta2 * layer_v[name] + (1.0 - state.beta2) * (g * g)
            m_hat = m / correction1
            v_hat = v / correction2
            step = state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
            p_out[name] = (w - step).astype(w.dtype)
            m_out[name] = m.astype(w.dtype)
            v_out[name] = v.astype(w.dtype)

        new_params.append(p_out)
        new_m.append(m_out)
        new_v.append(v_out)

    new_state = AdamState(
        lr=state.lr,
        beta1=state.beta1,
        beta2=state.beta2,
        epsilon=state.epsilon,
        t=t,
        m=new_m,
        v=new_v,
    )
    return new_params, new_state
