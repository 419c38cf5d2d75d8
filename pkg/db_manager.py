import datetime
import json
import os

from peewee import AutoField, CharField, DateTimeField, IntegerField, Model, TextField
from playhouse.sqlite_ext import JSONField, SqliteExtDatabase

from utils import logger


class BaseModel(Model):
    class Meta:
        database = None


class TaskRun(BaseModel):
    id = AutoField()
    file = CharField(default="", index=True)   # 来源工作台文件
    task = CharField(index=True)               # 任务名
    op = CharField()                           # validate / cohomology / grothendieck / spectral / check
    status = CharField(index=True)             # pass / fail / hypothesis-fails / budget-exceeded
    trusted_degree = IntegerField(null=True)
    payload = JSONField(null=True)
    duration_ms = IntegerField(default=0)
    created_at = DateTimeField(default=datetime.datetime.now, index=True)

    class Meta:
        indexes = (
            (("task", "created_at"), False),
        )


class DatabaseManager:
    @staticmethod
    def _bind_model(model_cls, database):
        """为指定数据库创建独立的模型类，避免跨 DB 互相污染。"""
        base_meta = getattr(model_cls, "Meta", object)
        meta = type(
            "Meta",
            (base_meta,),
            {
                "database": database,
                "table_name": model_cls._meta.table_name,
                "indexes": model_cls._meta.indexes,
            },
        )
        return type(
            f"{model_cls.__name__}Bound_{id(database)}",
            (model_cls,),
            {"Meta": meta},
        )

    def __init__(self, data_dir, db_path: str = None):
        self.data_dir = data_dir
        self.db_path = db_path or os.path.join(self.data_dir, "catcoh_runs.db")
        os.makedirs(os.path.dirname(os.path.abspath(self.db_path)), exist_ok=True)

        self.db = SqliteExtDatabase(
            self.db_path,
            pragmas={
                "journal_mode": "wal",
                "cache_size": -16 * 1024,
                "synchronous": 1,
            }
        )
        # 每个 DatabaseManager 一套独立模型，多个归档可以并存
        self.TaskRun = self._bind_model(TaskRun, self.db)
        self.init_db()
        logger.debug("Catcoh：归档已打开 path=%s", os.path.abspath(self.db_path))

    def init_db(self):
        self.db.connect(reuse_if_open=True)
        self.db.create_tables([self.TaskRun])
        self.db.close()

    def save_run(self, file, task, op, status, trusted_degree=None, payload=None, duration_ms=0):
        # payload 先过一遍 json，保证写入的是纯 JSON 值
        clean = json.loads(json.dumps(payload, ensure_ascii=False, default=str)) if payload is not None else None
        with self.db.connection_context():
            return self.TaskRun.create(
                file=file or "",
                task=task,
                op=op,
                status=status,
                trusted_degree=trusted_degree,
                payload=clean,
                duration_ms=int(duration_ms),
            )

    def get_runs(self, limit=20, task=None):
        with self.db.connection_context():
            query = self.TaskRun.select()
            if task:
                query = query.where(self.TaskRun.task == task)
            query = query.order_by(self.TaskRun.created_at.desc(), self.TaskRun.id.desc())
            if limit:
                query = query.limit(limit)
            return list(query)

    def get_last_run(self, task=None):
        runs = self.get_runs(limit=1, task=task)
        return runs[0] if runs else None

    def count_runs(self, status=None):
        with self.db.connection_context():
            query = self.TaskRun.select()
            if status:
                query = query.where(self.TaskRun.status == status)
            return query.count()
