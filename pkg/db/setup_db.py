####################################
##### Arquivo: setup_db.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Criação do esquema Oracle das varreduras a partir de `schema.sql`."""
import logging
import os
import sys
import time
import traceback
from typing import List

import oracledb

from . import config

logger = logging.getLogger(__name__)

STATEMENT_ORDER = ("CREATE TABLE", "CREATE SEQUENCE", "CREATE INDEX", "INSERT INTO")
ALREADY_EXISTS = 955  # ORA-00955: name is already used by an existing object
MIN_SUCCESS_RATE = 0.8


def split_statements(sql_script: str) -> List[str]:
    """Divide o script em comandos, sem comentários, na ordem tabelas → sequências → índices → inserções."""
    statements = []
    for chunk in sql_script.split(";"):
        lines = [line for line in chunk.splitlines() if not line.strip().startswith("--")]
        statement = "\n".join(lines).strip()
        if statement:
            statements.append(statement)

    def rank(statement: str) -> int:
        upper = statement.upper()
        for index, prefix in enumerate(STATEMENT_ORDER):
            if upper.startswith(prefix):
                return index
        return len(STATEMENT_ORDER)

    return sorted(statements, key=rank)


def _connect(username: str, password: str, dsn: str):
    oracledb.defaults.connect_timeout = config.connection_timeout
    for attempt in range(1, config.retry_count + 1):
        try:
            logger.info(f"Tentativa {attempt} de {config.retry_count} para conectar ao banco de dados Oracle...")
            return oracledb.connect(user=username, password=password, dsn=dsn)
        except Exception as e:
            logger.warning(f"Tentativa {attempt} falhou: {str(e)}")
            if attempt < config.retry_count:
                wait_time = config.retry_delay * (2 ** (attempt - 1))
                logger.info(f"Aguardando {wait_time} segundos antes da próxima tentativa...")
                time.sleep(wait_time)
    return None


def initialize_schema(username=None, password=None, dsn=None) -> bool:
    """Inicializa o esquema do banco de dados Oracle.

    Args:
        username: Nome de usuário (padrão: config.username)
        password: Senha (padrão: config.password)
        dsn: DSN do banco de dados (padrão: config.dsn)

    Returns:
        bool: True se ao menos 80% dos comandos foram executados (objetos já
        existentes contam como sucesso)
    """
    username = username or config.username
    password = password or config.password
    dsn = dsn or config.dsn
    script_path = os.path.join(os.path.dirname(__file__), "schema.sql")

    connection = _connect(username, password, dsn)
    if connection is None:
        logger.error("Não foi possível estabelecer conexão após várias tentativas")
        return False

    successful = failed = 0
    try:
        connection.autocommit = False
        with open(script_path, "r") as file:
            statements = split_statements(file.read().replace(":SCHEMA", config.schema))
        with connection.cursor() as cursor:
            for statement in statements:
                try:
                    logger.info(f"Executando: {statement[:100]}...")
                    cursor.execute(statement)
                    connection.commit()
                    successful += 1
                except oracledb.DatabaseError as e:
                    error_obj, = e.args
                    if error_obj.code == ALREADY_EXISTS:
                        logger.info("Objeto já existe, continuando com o próximo comando")
                        successful += 1
                    else:
                        logger.warning(f"Erro ao executar comando: Código de erro: {error_obj.code}, "
                                       f"Mensagem: {error_obj.message}")
                        failed += 1
                        connection.rollback()
    except Exception as e:
        logger.error(f"Erro ao executar o script do banco de dados: {e}")
        logger.error(f"Stack trace: {traceback.format_exc()}")
        connection.rollback()
        return False
    finally:
        connection.close()
        logger.info("Conexão ao banco de dados encerrada.")

    total = successful + failed
    success_rate = successful / total if total else 0.0
    logger.info(f"{successful} comandos executados com sucesso, {failed} falharam (taxa {success_rate:.2%})")
    return success_rate >= MIN_SUCCESS_RATE


if __name__ == "__main__":
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s [%(levelname)s] %(name)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stdout)],
    )
    print("Inicializando esquema do banco de dados Oracle...")
    if initialize_schema():
        print("Esquema do banco de dados Oracle inicializado com sucesso.")
    else:
        print("Falha ao inicializar esquema do banco de dados Oracle.")
        sys.exit(1)
