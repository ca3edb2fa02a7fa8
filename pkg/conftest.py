####################################
##### Arquivo: conftest.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Configuração do pytest: raiz do projeto no sys.path e marcador `slow`."""
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: verificações Monte Carlo longas (desative com -m 'not slow')")
