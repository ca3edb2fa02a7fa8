####################################
##### Arquivo: numerics.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Núcleos numéricos compartilhados pelos estimadores.

Este módulo reúne o módulo centrado Ω_r, a sobreamostragem no domínio de
Fourier e três otimizadores genéricos (escalar limitado, simplex e
quase-Newton) construídos sobre o `scipy.optimize`. Todas as funções são
puras e podem ser chamadas concorrentemente.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import fft as sp_fft
from scipy import optimize

from ..models.errors import InvalidArgumentError, NumericFailureError

logger = logging.getLogger(__name__)

Bounds = Sequence[Tuple[float, float]]


@dataclass
class OptimResult:
    """Resultado de uma maximização.

    Atributos:
        point: Ponto ótimo encontrado (vetor)
        value: Valor do objetivo no ponto
        iterations: Número de iterações executadas
        converged: Se o otimizador reportou convergência
    """

    point: np.ndarray
    value: float
    iterations: int
    converged: bool

    @property
    def scalar(self) -> float:
        """Retorna o ponto como escalar (problemas unidimensionais)."""
        return float(np.ravel(self.point)[0])


def centered_modulo(x, r: float):
    """Reduz x ao intervalo semiaberto (−r/2, r/2].

    Args:
        x: Valor escalar ou array
        r: Período positivo

    Returns:
        Valor (ou array) congruente a x módulo r

    Raises:
        InvalidArgumentError: Se r ≤ 0 ou x não for finito
    """
    if not np.isfinite(r) or r <= 0:
        raise InvalidArgumentError(f"Período do módulo centrado deve ser positivo: {r}")
    values = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError("Módulo centrado recebeu valor não finito")
    half = 0.5 * r
    wrapped = half - np.mod(half - values, r)
    # np.mod pode devolver r por arredondamento
    wrapped = np.where(wrapped <= -half, wrapped + r, wrapped)
    if wrapped.ndim == 0:
        return float(wrapped)
    return wrapped


def upsample_fourier(signal, factor: int) -> np.ndarray:
    """Interpola um sinal complexo completando seu espectro com zeros.

    O bin de Nyquist de sequências de comprimento par é dividido entre as
    frequências positiva e negativa, de modo que toda M-ésima amostra da
    saída reproduza a entrada.

    Args:
        signal: Sequência complexa de comprimento N
        factor: Fator inteiro M ≥ 1

    Returns:
        np.ndarray: Sequência de comprimento M·N
    """
    x = np.asarray(signal, dtype=complex)
    if x.size == 0:
        raise InvalidArgumentError("Sinal vazio não pode ser sobreamostrado")
    if int(factor) != factor or factor < 1:
        raise InvalidArgumentError(f"Fator de sobreamostragem inválido: {factor}")
    factor = int(factor)
    if factor == 1:
        return x.copy()

    n = x.size
    spectrum = sp_fft.fft(x)
    padded = np.zeros(n * factor, dtype=complex)
    half = n // 2
    if n % 2 == 0:
        padded[:half] = spectrum[:half]
        padded[half] = 0.5 * spectrum[half]
        padded[n * factor - half] = 0.5 * spectrum[half]
        if half > 1:
            padded[n * factor - half + 1:] = spectrum[half + 1:]
    else:
        padded[:half + 1] = spectrum[:half + 1]
        if half > 0:
            padded[n * factor - half:] = spectrum[half + 1:]
    return sp_fft.ifft(padded) * factor


class _TrackedObjective:
    """Avalia o objetivo guardando o melhor ponto e o último ponto válido."""

    def __init__(self, objective: Callable, with_gradient: bool = False):
        self.objective = objective
        self.with_gradient = with_gradient
        self.last_valid = None
        self.best_point = None
        self.best_value = -np.inf

    def _record(self, x, value):
        if not np.isfinite(value):
            raise NumericFailureError(
                f"Objetivo não finito ({value}) durante a otimização", last_point=self.last_valid
            )
        point = np.array(x, dtype=float, copy=True)
        self.last_valid = point
        if value > self.best_value:
            self.best_value = float(value)
            self.best_point = point

    def negated(self, x):
        if self.with_gradient:
            value, gradient = self.objective(x)
            self._record(x, value)
            return -float(value), -np.asarray(gradient, dtype=float)
        value = float(self.objective(x))
        self._record(x, value)
        return -value


def maximize_scalar_bounded(
    objective: Callable[[float], float],
    lo: float,
    hi: float,
    x0: float,
    tol: float = 1e-12,
    max_iter: int = 500,
) -> OptimResult:
    """Maximiza uma função escalar em [lo, hi] pelo método de Brent.

    Args:
        objective: Função real a maximizar
        lo: Limite inferior
        hi: Limite superior
        x0: Ponto inicial (normalmente o máximo da grade grossa)
        tol: Tolerância absoluta em x
        max_iter: Máximo de iterações

    Returns:
        OptimResult: Maximizador local; nunca pior que x0

    Raises:
        InvalidArgumentError: Se os limites ou a tolerância forem inválidos
        NumericFailureError: Se o objetivo produzir valor não finito
    """
    if not lo < hi:
        raise InvalidArgumentError(f"Intervalo inválido: [{lo}, {hi}]")
    if not lo <= x0 <= hi:
        raise InvalidArgumentError(f"Ponto inicial {x0} fora de [{lo}, {hi}]")
    if tol <= 0:
        raise InvalidArgumentError(f"Tolerância deve ser positiva: {tol}")

    tracked = _TrackedObjective(lambda x: objective(float(np.ravel(x)[0])))
    start_value = -tracked.negated(np.array([x0]))
    result = optimize.minimize_scalar(
        lambda x: tracked.negated(np.array([x])),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": tol, "maxiter": max_iter},
    )
    value = -float(result.fun)
    point = float(result.x)
    if start_value >= value:
        point, value = float(x0), start_value
    return OptimResult(
        point=np.array([point]),
        value=value,
        iterations=int(getattr(result, "nfev", 0)),
        converged=bool(result.success),
    )


def maximize_simplex(
    objective: Callable[[np.ndarray], float],
    x0: Sequence[float],
    bounds: Bounds,
    tol: float = 1e-10,
    max_iter: Optional[int] = None,
    initial_step: Optional[Sequence[float]] = None,
) -> OptimResult:
    """Maximiza um objetivo vetorial com Nelder–Mead restrito a uma caixa.

    Os vértices refletidos ou expandidos para fora da caixa são projetados
    de volta sobre ela.

    Args:
        objective: Função real de um vetor
        x0: Ponto inicial dentro da caixa
        bounds: Pares (lo, hi) por dimensão
        tol: Tolerância em x; a tolerância em f é relativa ao valor inicial
        max_iter: Máximo de iterações (padrão do scipy se None)
        initial_step: Passo inicial do simplex por dimensão

    Returns:
        OptimResult: Maximizador local; nunca pior que x0
    """
    start = np.asarray(x0, dtype=float).ravel()
    box = [tuple(map(float, pair)) for pair in bounds]
    if len(box) != start.size:
        raise InvalidArgumentError(
            f"Dimensão incompatível: x0 tem {start.size} componentes e bounds {len(box)}"
        )
    lower = np.array([pair[0] for pair in box])
    upper = np.array([pair[1] for pair in box])
    if np.any(start < lower) or np.any(start > upper):
        raise InvalidArgumentError(f"Ponto inicial {start} fora da caixa {box}")

    tracked = _TrackedObjective(objective)
    start_value = -tracked.negated(start)
    options = {"xatol": tol, "fatol": tol * max(1.0, abs(start_value))}
    if max_iter is not None:
        options["maxiter"] = max_iter
    if initial_step is not None:
        step = np.asarray(initial_step, dtype=float).ravel()
        if step.size != start.size:
            raise InvalidArgumentError("Passo inicial com dimensão incompatível")
        simplex = np.tile(start, (start.size + 1, 1))
        for i in range(start.size):
            vertex = start[i] + step[i]
            if vertex > upper[i]:
                vertex = start[i] - step[i]
            simplex[i + 1, i] = np.clip(vertex, lower[i], upper[i])
        options["initial_simplex"] = simplex

    result = optimize.minimize(
        tracked.negated, start, method="Nelder-Mead", bounds=box, options=options
    )
    point = np.clip(np.asarray(result.x, dtype=float), lower, upper)
    value = -float(result.fun)
    if start_value >= value:
        point, value = start, start_value
    return OptimResult(
        point=point,
        value=value,
        iterations=int(result.nit),
        converged=bool(result.success) or value == start_value,
    )


def maximize_quasi_newton(
    objective: Callable,
    gradient: Union[Callable[[np.ndarray], np.ndarray], bool],
    x0: Sequence[float],
    tol: float = 1e-8,
    max_iter: int = 200,
) -> OptimResult:
    """Maximiza um objetivo suave com BFGS.

    A busca linear de Wolfe do scipy garante aumento suficiente a cada passo
    aceito. Se a busca linear falhar, o melhor ponto visitado é devolvido
    com `converged=False`.

    Args:
        objective: Função real de um vetor; se `gradient` for True, deve
            devolver a tupla (valor, gradiente)
        gradient: Gradiente do objetivo, ou True conforme acima
        x0: Ponto inicial
        tol: Tolerância na norma do gradiente
        max_iter: Máximo de iterações

    Returns:
        OptimResult: Maximizador local encontrado
    """
    start = np.asarray(x0, dtype=float).ravel()
    if gradient is True:
        tracked = _TrackedObjective(objective, with_gradient=True)
        fun, jac = tracked.negated, True
    else:
        tracked = _TrackedObjective(objective)
        fun = tracked.negated
        jac = lambda x: -np.asarray(gradient(x), dtype=float)  # noqa: E731

    result = optimize.minimize(
        fun, start, jac=jac, method="BFGS", options={"gtol": tol, "maxiter": max_iter}
    )
    point = np.asarray(result.x, dtype=float)
    value = -float(result.fun)
    converged = bool(result.success)
    if not converged:
        logger.debug(f"BFGS não convergiu: {result.message}")
    if tracked.best_point is not None and tracked.best_value > value:
        point, value = tracked.best_point, tracked.best_value
    return OptimResult(point=point, value=value, iterations=int(result.nit), converged=converged)
