####################################
##### Arquivo: oracle_db.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Persistência opcional das varreduras em banco de dados Oracle.

Cada execução de `sweep` grava uma linha em `sweep_runs` (especificação e
resumo) e uma linha por estimativa em `sweep_records`.
"""
import json
import logging
import math
import time
import traceback
from typing import Dict, Optional, Sequence

import oracledb

from db import config
from ..models.sweep import SweepRecord, SweepSpec, SweepSummary

logger = logging.getLogger(__name__)

REQUIRED_TABLES = ("sweep_runs", "sweep_records")
REQUIRED_SEQUENCES = ("sweep_run_seq", "sweep_record_seq")


def _nullable(value: float) -> Optional[float]:
    """NaN vira NULL no banco."""
    return None if value is None or math.isnan(value) else float(value)


class OracleStorage:
    """Gerencia operações do banco de dados Oracle."""

    def __init__(
            self,
            username: str = config.username,
            password: str = config.password,
            dsn: str = config.dsn,
    ):
        """Inicializa a conexão com o banco de dados Oracle.

        Args:
            username: Nome de usuário do banco de dados.
            password: Senha do banco de dados.
            dsn: Nome do Data Source Name (DSN) do banco de dados.
        """
        self.username = username
        self.password = password
        self.dsn = dsn
        self._connection = None
        logger.info(f"Inicializando OracleStorage com usuário: {username}, DSN: {dsn}")

    def connect(self):
        """Estabelece a conexão com o banco de dados, com novas tentativas.

        Raises:
            oracledb.DatabaseError: Se todas as tentativas falharem
        """
        max_retries = config.retry_count
        last_exception = None
        for attempt in range(1, max_retries + 1):
            try:
                logger.info(f"Tentativa {attempt} de {max_retries} para conectar ao Oracle: {self.dsn}")
                self._connection = oracledb.connect(
                    user=self.username,
                    password=self.password,
                    dsn=self.dsn,
                    tcp_connect_timeout=config.connection_timeout,
                )
                break
            except oracledb.DatabaseError as e:
                error_obj, = e.args
                logger.warning(f"Tentativa {attempt} falhou: Código de erro: {error_obj.code}, "
                               f"Mensagem: {error_obj.message}")
                last_exception = e
            except Exception as e:
                logger.warning(f"Tentativa {attempt} falhou com exceção: {str(e)}")
                last_exception = e
            if attempt < max_retries:
                # backoff exponencial: 2, 4, 8... segundos
                wait_time = config.retry_delay * (2 ** (attempt - 1))
                logger.info(f"Aguardando {wait_time} segundos antes da próxima tentativa...")
                time.sleep(wait_time)
        else:
            logger.error("Todas as tentativas de conexão falharam")
            logger.error(f"Detalhes da conexão - Usuário: {self.username}, DSN: {self.dsn}")
            raise last_exception

        self._connection.autocommit = False
        logger.info("Conectado ao banco de dados Oracle (autocommit desativado)")

    def disconnect(self):
        """Fecha a conexão com o banco de dados."""
        if self._connection:
            try:
                self._connection.close()
                logger.info("Desconectado do banco de dados Oracle com sucesso.")
            except oracledb.DatabaseError as e:
                error_obj, = e.args
                logger.error(f"Erro ao desconectar do banco de dados: Código de erro: {error_obj.code}, "
                             f"Mensagem: {error_obj.message}")
            except Exception as e:
                logger.error(f"Exceção inesperada ao desconectar do banco de dados: {str(e)}")
                logger.error(f"Stack trace: {traceback.format_exc()}")
            finally:
                self._connection = None

    def test_connection(self) -> bool:
        """Testa a conexão com o banco de dados Oracle.

        Returns:
            bool: True se a conexão estiver ativa, False caso contrário.
        """
        try:
            if not self._connection:
                logger.info("Conexão não inicializada. Tentando estabelecer conexão...")
                self.connect()
            with self._connection.cursor() as cursor:
                cursor.execute("SELECT 1 FROM DUAL")
                result = cursor.fetchone()
            if result is not None:
                logger.info("Teste de conexão bem-sucedido. Banco de dados Oracle respondendo.")
                return True
            logger.warning("Teste de conexão falhou. Consulta não retornou resultados.")
            return False
        except Exception as e:
            logger.error(f"Exceção ao testar conexão com o banco de dados: {str(e)}")
            logger.error(f"Stack trace: {traceback.format_exc()}")
            return False

    def _ensure_connection(self):
        """Garante que a conexão com o banco de dados está ativa."""
        if not self._connection:
            self.connect()
            return
        try:
            self._connection.ping()
        except Exception as e:
            logger.warning(f"Ping da conexão falhou: {str(e)}. Reconectando...")
            self.disconnect()
            self.connect()

    def check_schema_exists(self) -> Dict[str, bool]:
        """Verifica se as tabelas e sequências necessárias existem.

        Returns:
            dict: Status de cada objeto (True se existir)
        """
        status = {}
        try:
            self._ensure_connection()
            with self._connection.cursor() as cursor:
                for table in REQUIRED_TABLES:
                    cursor.execute(
                        "SELECT COUNT(*) FROM user_tables WHERE table_name = :table_name",
                        {"table_name": table.upper()},
                    )
                    result = cursor.fetchone()
                    status[table] = bool(result and result[0] > 0)
                for seq in REQUIRED_SEQUENCES:
                    cursor.execute(
                        "SELECT COUNT(*) FROM user_sequences WHERE sequence_name = :seq_name",
                        {"seq_name": seq.upper()},
                    )
                    result = cursor.fetchone()
                    status[seq] = bool(result and result[0] > 0)
            found = sum(1 for exists in status.values() if exists)
            logger.info(f"Verificação do esquema concluída: {found}/{len(status)} objetos encontrados")
            return status
        except Exception as e:
            logger.error(f"Erro ao verificar esquema do banco de dados: {str(e)}")
            logger.error(f"Stack trace: {traceback.format_exc()}")
            return {name: False for name in REQUIRED_TABLES + REQUIRED_SEQUENCES}

    def store_sweep(
        self, spec: SweepSpec, records: Sequence[SweepRecord], summaries: Sequence[SweepSummary]
    ) -> int:
        """Armazena uma execução de varredura e todos os seus registros.

        A execução e os registros são confirmados numa única transação.

        Returns:
            int: Identificador da execução em `sweep_runs`
        """
        self._ensure_connection()
        run_sql = """
            INSERT INTO sweep_runs (run_id, created_at, master_seed, trials_per_point, spec_json, summary_json)
            VALUES (sweep_run_seq.NEXTVAL, SYSTIMESTAMP, :master_seed, :trials_per_point, :spec_json, :summary_json)
            RETURNING run_id INTO :run_id
        """
        record_sql = """
            INSERT INTO sweep_records (
                record_id, run_id, distance_m, velocity_mps, method, trial, seed,
                d_hat_m, v_hat_mps, abs_err_d_m, abs_err_v_mps, runtime_ms, converged
            ) VALUES (
                sweep_record_seq.NEXTVAL, :run_id, :distance_m, :velocity_mps, :method, :trial, :seed,
                :d_hat_m, :v_hat_mps, :abs_err_d_m, :abs_err_v_mps, :runtime_ms, :converged
            )
        """
        summary = [dict(zip(("distance_m", "velocity_mps", "method", "rmse_d", "rmse_v", "se_std"), s.to_row()))
                   for s in summaries]
        try:
            with self._connection.cursor() as cursor:
                run_id_var = cursor.var(int)
                cursor.execute(
                    run_sql,
                    {
                        "master_seed": spec.master_seed,
                        "trials_per_point": spec.trials_per_point,
                        "spec_json": json.dumps(spec.to_dict()),
                        "summary_json": json.dumps(summary),
                        "run_id": run_id_var,
                    },
                )
                run_id = run_id_var.getvalue()
                if isinstance(run_id, list):
                    run_id = run_id[0]
                cursor.executemany(
                    record_sql,
                    [
                        {
                            "run_id": run_id,
                            "distance_m": r.distance_m,
                            "velocity_mps": r.velocity_mps,
                            "method": r.method,
                            "trial": r.trial,
                            # sementes de 63 bits são guardadas como texto
                            "seed": str(r.seed),
                            "d_hat_m": _nullable(r.d_hat_m),
                            "v_hat_mps": _nullable(r.v_hat_mps),
                            "abs_err_d_m": _nullable(r.abs_err_d_m),
                            "abs_err_v_mps": _nullable(r.abs_err_v_mps),
                            "runtime_ms": r.runtime_ms,
                            "converged": 1 if r.converged else 0,
                        }
                        for r in records
                    ],
                )
            self._connection.commit()
            logger.info(f"Varredura {run_id} armazenada com {len(records)} registros")
            return run_id
        except oracledb.DatabaseError as e:
            error_obj, = e.args
            logger.error(f"Falha ao armazenar varredura: Código de erro: {error_obj.code}, "
                         f"Mensagem: {error_obj.message}")
            logger.error(f"Stack trace: {traceback.format_exc()}")
            self._connection.rollback()
            raise
        except Exception as e:
            logger.error(f"Exceção inesperada ao armazenar varredura: {str(e)}")
            logger.error(f"Stack trace: {traceback.format_exc()}")
            self._connection.rollback()
            raise
