####################################
##### Arquivo: errors.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Hierarquia de exceções do toolkit de lidar FMCW.

Cada exceção carrega o código de saída usado pela interface de linha de
comando, de modo que `main.py` possa encerrar o processo com o status
adequado sem conhecer os detalhes de cada falha.
"""
from typing import Any, Dict, Optional


class FmcwError(Exception):
    """Exceção base do toolkit.

    Atributos:
        message: Descrição legível do problema
        details: Informações adicionais para diagnóstico
        exit_code: Código de saída da CLI associado ao erro
    """

    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.details = details or {}
        super().__init__(message)


class InvalidArgumentError(FmcwError, ValueError):
    """Argumento fora do domínio de uma operação."""

    exit_code = 2


class ConfigError(FmcwError, ValueError):
    """Configuração malformada ou com valores inválidos."""

    exit_code = 2

    def __init__(self, field: Optional[str], message: str, line: Optional[int] = None):
        self.field = field
        self.line = line
        self.reason = message
        prefix = ""
        if line is not None:
            prefix += f"linha {line}: "
        if field:
            prefix += f"campo '{field}': "
        super().__init__(f"{prefix}{message}", {"field": field, "line": line})


class CalibrationMissingError(FmcwError):
    """Tabela ĥ ausente; deve ser gerada com o comando `hfit`."""

    exit_code = 3

    def __init__(self, path: str):
        self.path = path
        super().__init__(
            f"Tabela de calibração ĥ não encontrada em {path}. "
            f"Gere-a com: python main.py hfit --out {path}",
            {"path": path},
        )


class UnsupportedModulationError(FmcwError):
    """Combinação de método e modulação não suportada."""

    exit_code = 4

    def __init__(self, method: str, waveform_kind: str):
        self.method = method
        self.waveform_kind = waveform_kind
        super().__init__(
            f"Método {method} não suporta a modulação {waveform_kind}",
            {"method": method, "waveform": waveform_kind},
        )


class ResourceLimitError(FmcwError):
    """Grade de busca acima do limite configurado."""

    exit_code = 4


class NumericFailureError(FmcwError):
    """Valor não finito encontrado durante uma otimização."""

    exit_code = 5

    def __init__(self, message: str, last_point: Any = None):
        self.last_point = last_point
        super().__init__(message, {"last_point": last_point})


class DegenerateInputError(FmcwError):
    """Entrada degenerada (amostra nula, canal sem ruído, jacobiano nulo)."""

    exit_code = 5

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        super().__init__(message, {"index": index})


class IllConditionedError(FmcwError):
    """Matriz singular ou mal condicionada."""

    exit_code = 5

    def __init__(self, message: str, condition: Optional[float] = None):
        self.condition = condition
        super().__init__(message, {"condition": condition})


class ResolutionError(FmcwError):
    """Varredura sem resolução suficiente para delimitar a condição buscada."""

    exit_code = 5
