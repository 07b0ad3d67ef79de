from .parallel_processor import ParallelCellRunner, default_workers

__all__ = ["ParallelCellRunner", "default_workers"]
