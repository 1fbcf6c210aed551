"""Adam parameter updates with bias correction."""

from __future__ import annotations

import numpy as np

from .model import ModelParams

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


def adam_step(params: ModelParams, grads: list[dict[str, np.ndarray]],
              learning_rate: float) -> ModelParams:
    """One Adam update, in place; increments the step counter."""
    params.step += 1
    t = params.step
    m_corr = 1.0 - BETA1 ** t
    v_corr = 1.0 - BETA2 ** t
    for lp, m, v, g in zip(params.layer_params, params.adam_m, params.adam_v, grads):
        for key in lp:
            grad = g[key]
            m[key] *= BETA1
            m[key] += (1.0 - BETA1) * grad
            v[key] *= BETA2
            v[key] += (1.0 - BETA2) * grad * grad
            lp[key] -= learning_rate * (m[key] / m_corr) / (np.sqrt(v[key] / v_corr) + EPSILON)
    return params
