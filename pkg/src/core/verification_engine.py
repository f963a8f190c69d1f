import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from .database import DatabaseManager, open_results
from .errors import RunCancelled
from .goldbach import DEFAULT_SEED, GoldbachConfig, VerificationResult, verify_range
from ..utils.logging_config import get_logger

logger = get_logger('verification_engine')


@dataclass
class VerificationJob:
    lo: int
    hi: int
    config: GoldbachConfig
    with_witnesses: bool = True
    validate_limit: int = 10_000
    spot_checks: int = 32
    seed: int = DEFAULT_SEED
    exception_floor: int = 10_000


class VerificationWorker(threading.Thread):
    """Runs one job off the calling thread; the result or error is kept on the worker"""

    def __init__(self, engine: "VerificationEngine", job: VerificationJob):
        super().__init__(name=f"verify-{job.lo}-{job.hi}", daemon=True)
        self.engine = engine
        self.job = job
        self.result: Optional[VerificationResult] = None
        self.error: Optional[BaseException] = None

    def run(self):
        try:
            self.result = self.engine.run(self.job)
        except Exception as e:
            self.error = e
        finally:
            self.engine._on_worker_finished()


class VerificationEngine:
    """verify_range with progress/log callbacks, a stop request and run history"""

    def __init__(self, results: Optional[DatabaseManager] = None, cache_dir: Optional[Path] = None):
        if results is None and cache_dir is not None:
            results = open_results(cache_dir)
        self.results = results
        self.is_running = False
        self.current_worker: Optional[VerificationWorker] = None
        self.current_run_id: Optional[int] = None
        self._stop_event = threading.Event()
        self._lock = threading.Lock()
        self.progress_callback: Optional[Callable[[int, int, str], None]] = None
        self.log_callback: Optional[Callable[[str], None]] = None

    def set_progress_callback(self, callback: Callable[[int, int, str], None]):
        self.progress_callback = callback

    def set_log_callback(self, callback: Callable[[str], None]):
        self.log_callback = callback

    def log(self, message: str):
        logger.info(message)
        if self.log_callback:
            self.log_callback(message)

    def update_progress(self, current: int, total: int, status: str):
        if self.progress_callback:
            self.progress_callback(current, total, status)

    def run(self, job: VerificationJob) -> VerificationResult:
        """Run a job on the calling thread and record it"""
        with self._lock:
            if self.is_running and threading.current_thread() is not self.current_worker:
                raise RuntimeError("Another verification is already running")
            self.is_running = True
            self._stop_event.clear()

        cfg = job.config
        run_id = None
        if self.results is not None:
            run_id = self.results.start_run(job.lo, job.hi, cfg.exponents, cfg.X, cfg.W)
            self.current_run_id = run_id

        self.log(f"Verifying odd n in [{job.lo}, {job.hi}] for c = "
                 f"{', '.join(str(c) for c in cfg.exponents)}")
        try:
            result = verify_range(job.lo, job.hi, cfg,
                                  with_witnesses=job.with_witnesses,
                                  validate_limit=job.validate_limit,
                                  spot_checks=job.spot_checks,
                                  seed=job.seed,
                                  exception_floor=job.exception_floor,
                                  progress=self.update_progress,
                                  should_stop=self._stop_event.is_set)
        except RunCancelled as e:
            self.log("Verification cancelled")
            if run_id is not None:
                self.results.fail_run(run_id, 'cancelled', str(e))
            raise
        except Exception as e:
            self.log(f"Verification failed: {e}")
            if run_id is not None:
                self.results.fail_run(run_id, 'failed', str(e))
            raise
        finally:
            if threading.current_thread() is not self.current_worker:
                self.is_running = False

        if run_id is not None:
            self.results.finish_run(run_id, result.summary)

        summary = result.summary
        self.log(f"Verification completed: {summary.checked} checked, "
                 f"{len(summary.exceptions)} exceptions, largest {summary.largest_exception}")
        return result

    def run_async(self, job: VerificationJob) -> bool:
        """Start a job in a worker thread"""
        with self._lock:
            if self.is_running:
                self.log("Another verification is already running")
                return False
            self.current_worker = VerificationWorker(self, job)
            self.is_running = True
        self.current_worker.start()
        return True

    def wait(self, timeout: Optional[float] = None) -> Optional[VerificationResult]:
        """Join the worker; re-raise its error if it failed"""
        worker = self.current_worker
        if worker is None:
            return None
        worker.join(timeout)
        if worker.error is not None:
            raise worker.error
        return worker.result

    def stop(self):
        """Request the running verification to stop"""
        if self.is_running:
            self.log("Requesting verification stop...")
            self._stop_event.set()

    def cleanup_old_runs(self, days_to_keep: int = 30) -> int:
        if self.results is None:
            return 0
        removed = self.results.cleanup_old_runs(days_to_keep)
        if removed:
            self.log(f"Removed {removed} runs older than {days_to_keep} days")
        return removed

    def close(self):
        if self.results is not None:
            self.results.close()

    def _on_worker_finished(self):
        self.is_running = False
        self.current_run_id = None
