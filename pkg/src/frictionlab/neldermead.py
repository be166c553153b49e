"""Derivative-free Nelder-Mead simplex minimization.

Deterministic implementation with an explicit stopping contract: the search
ends when the simplex diameter (largest pairwise vertex distance) drops
below ``diameter_tol`` or the evaluation budget is spent. Used for
identification objectives that are nonsmooth at stiction transitions, where
gradient-based methods have no justification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NelderMeadResult:
    x: np.ndarray
    fx: float
    evaluations: int
    converged: bool


def _diameter(vertices: list[np.ndarray]) -> float:
    d = 0.0
    for i in range(len(vertices)):
        for j in range(i + 1, len(vertices)):
            d = max(d, float(np.linalg.norm(vertices[i] - vertices[j])))
    return d


def minimize(fn, x0, initial_step: float = 0.4, diameter_tol: float = 1e-6,
             max_evals: int = 2000) -> NelderMeadResult:
    """Minimize ``fn`` from ``x0`` with a standard (1, 2, 0.5, 0.5) simplex.

    Non-finite objective values are treated as +inf so the simplex retreats
    from divergent regions instead of crashing. Ties are broken by vertex
    insertion order, which keeps the search fully deterministic.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.shape[0]

    evals = 0

    def f(x):
        nonlocal evals
        evals += 1
        v = fn(x)
        return float(v) if np.isfinite(v) else np.inf

    vertices = [x0.copy()]
    for i in range(n):
        v = x0.copy()
        v[i] += initial_step
        vertices.append(v)
    values = [f(v) for v in vertices]

    converged = False
    while True:
        order = sorted(range(n + 1), key=lambda k: (values[k], k))
        vertices = [vertices[k] for k in order]
        values = [values[k] for k in order]
        if _diameter(vertices) < diameter_tol:
            converged = True
            break
        if evals >= max_evals:
            break

        centroid = np.mean(vertices[:-1], axis=0)
        worst = vertices[-1]
        reflected = centroid + (centroid - worst)
        fr = f(reflected)
        if fr < values[0]:
            expanded = centroid + 2.0 * (centroid - worst)
            fe = f(expanded)
            if fe < fr:
                vertices[-1], values[-1] = expanded, fe
            else:
                vertices[-1], values[-1] = reflected, fr
        elif fr < values[-2]:
            vertices[-1], values[-1] = reflected, fr
        else:
            if fr < values[-1]:
                contracted = centroid + 0.5 * (reflected - centroid)
            else:
                contracted = centroid + 0.5 * (worst - centroid)
            fc = f(contracted)
            if fc < min(fr, values[-1]):
                vertices[-1], values[-1] = contracted, fc
            else:
                # shrink toward the best vertex
                best = vertices[0]
                for k in range(1, n + 1):
                    vertices[k] = best + 0.5 * (vertices[k] - best)
                    values[k] = f(vertices[k])

    order = sorted(range(n + 1), key=lambda k: (values[k], k))
    best = order[0]
    return NelderMeadResult(vertices[best].copy(), values[best], evals, converged)
