# Credenciais do banco de dados usado como destino opcional das varreduras
# (storage.persistence_mode = oracle | auto). Variáveis de ambiente têm
# precedência sobre os valores abaixo.
import os

username = os.environ.get("FMCW_DB_USER", "")
password = os.environ.get("FMCW_DB_PASSWORD", "")
dsn = os.environ.get("FMCW_DB_DSN", "localhost:1521/XEPDB1")
schema = os.environ.get("FMCW_DB_SCHEMA", "")

# Timeout de conexão Oracle (em segundos)
connection_timeout = 30

# Novas tentativas de conexão com backoff exponencial
retry_count = 3
retry_delay = 2  # segundos
