from datetime import datetime, timedelta
import os

from sqlalchemy import create_engine, Column, Integer, String, DateTime, Float, Text, Boolean, ForeignKey
from sqlalchemy.orm import declarative_base, sessionmaker, relationship

from ..utils.logging_config import get_logger

logger = get_logger('database')

Base = declarative_base()


class VerificationRun(Base):
    __tablename__ = 'verification_runs'

    id = Column(Integer, primary_key=True)
    lo = Column(Integer, nullable=False)
    hi = Column(Integer, nullable=False)
    exponents = Column(String(100), nullable=False)  # "c1,c2,c3" as num/den
    X = Column(Integer, nullable=False)
    W = Column(Integer, default=2)
    status = Column(String(50), default='running')  # running, completed, completed_with_exceptions, failed, cancelled
    checked = Column(Integer, default=0)
    exception_count = Column(Integer, default=0)
    largest_exception = Column(Integer)
    exception_floor = Column(Integer)
    proven_range = Column(Boolean, default=False)
    runtime_ms = Column(Float, default=0.0)
    started_at = Column(DateTime, default=datetime.utcnow)
    completed_at = Column(DateTime)
    error_message = Column(Text)

    exceptions = relationship("RunException", back_populates="run", cascade="all, delete-orphan")

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "range": [self.lo, self.hi],
            "c": self.exponents.split(','),
            "X": self.X,
            "W": self.W,
            "status": self.status,
            "checked": self.checked,
            "exceptions": self.exception_count,
            "largest_exception": self.largest_exception,
            "runtime_ms": self.runtime_ms,
            "started_at": self.started_at.isoformat() if self.started_at else None,
            "completed_at": self.completed_at.isoformat() if self.completed_at else None,
        }


class RunException(Base):
    __tablename__ = 'run_exceptions'

    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey('verification_runs.id'), nullable=False)
    n = Column(Integer, nullable=False)

    run = relationship("VerificationRun", back_populates="exceptions")


class DatabaseManager:
    def __init__(self, db_path="results.db"):
        self.db_path = os.path.abspath(db_path)
        self.engine = create_engine(f'sqlite:///{self.db_path}')
        Base.metadata.create_all(self.engine)
        self.SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=self.engine,
                                         expire_on_commit=False)

    def get_session(self):
        return self.SessionLocal()

    def close(self):
        self.engine.dispose()

    def start_run(self, lo: int, hi: int, exponents, X: int, W: int) -> int:
        """Insert a running row and return its id"""
        session = self.get_session()
        try:
            run = VerificationRun(lo=lo, hi=hi, exponents=','.join(str(c) for c in exponents),
                                  X=X, W=W, status='running')
            session.add(run)
            session.commit()
            return run.id
        except Exception:
            session.rollback()
            raise
        finally:
            session.close()

    def finish_run(self, run_id: int, summary):
        """Store a VerificationSummary on an existing run"""
        session = self.get_session()
        try:
            run = session.get(VerificationRun, run_id)
            run.checked = summary.checked
            run.exception_count = len(summary.exceptions)
            run.largest_exception = summary.largest_exception
            run.exception_floor = summary.exception_floor
            run.proven_range = summary.proven_range
            run.runtime_ms = summary.runtime_ms
            run.status = 'completed_with_exceptions' if summary.exceptions_above_floor else 'completed'
            run.completed_at = datetime.utcnow()
            run.exceptions = [RunException(n=int(n)) for n in summary.exceptions]
            session.commit()
            logger.info(f"Recorded run {run_id}: {run.status}")
        except Exception:
            session.rollback()
            raise
        finally:
            session.close()

    def fail_run(self, run_id: int, status: str, message: str = None):
        session = self.get_session()
        try:
            run = session.get(VerificationRun, run_id)
            run.status = status
            run.error_message = message
            run.completed_at = datetime.utcnow()
            session.commit()
        except Exception:
            session.rollback()
            raise
        finally:
            session.close()

    def record_run(self, summary, W: int = 2) -> int:
        """Start and finish a run in one step"""
        run_id = self.start_run(summary.lo, summary.hi, summary.exponents, summary.X, W)
        self.finish_run(run_id, summary)
        return run_id

    def get_run(self, run_id: int):
        session = self.get_session()
        try:
            return session.get(VerificationRun, run_id)
        finally:
            session.close()

    def get_exceptions(self, run_id: int):
        session = self.get_session()
        try:
            rows = session.query(RunException).filter_by(run_id=run_id).order_by(RunException.n).all()
            return [row.n for row in rows]
        finally:
            session.close()

    def recent_runs(self, limit: int = 20):
        """Most recent runs first"""
        session = self.get_session()
        try:
            return (session.query(VerificationRun)
                    .order_by(VerificationRun.started_at.desc(), VerificationRun.id.desc())
                    .limit(limit).all())
        finally:
            session.close()

    def cleanup_old_runs(self, days_to_keep=30):
        """Clean up old finished runs"""
        session = self.get_session()
        try:
            cutoff_date = datetime.utcnow() - timedelta(days=days_to_keep)
            old_runs = session.query(VerificationRun).filter(
                VerificationRun.completed_at < cutoff_date,
                VerificationRun.status != 'running'
            ).all()

            for run in old_runs:
                session.delete(run)

            session.commit()
            return len(old_runs)
        except Exception as e:
            session.rollback()
            raise e
        finally:
            session.close()


def open_results(cache_dir) -> DatabaseManager:
    """The results.db run history inside a cache directory"""
    return DatabaseManager(os.path.join(str(cache_dir), 'results.db'))
