"""Parallel execution of independent work items with deterministic output."""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Callable, Dict, Hashable, List

from config.settings import settings

logger = logging.getLogger(__name__)


class ParallelRunner:
    """Run a function over keyed work items in a thread pool."""

    def __init__(self, max_workers: int = None):
        """Initialize parallel runner.

        Args:
            max_workers: Maximum number of parallel workers
                        (defaults to settings.MAX_PARALLEL_WORKERS)
        """
        self.max_workers = max_workers or settings.MAX_PARALLEL_WORKERS

    def run(
        self,
        items: List[Hashable],
        work_function: Callable[[Any], Any],
        label: str = 'items',
    ) -> Dict[Hashable, Any]:
        """Apply ``work_function`` to every item.

        Args:
            items: Work items, also used as result keys
            work_function: Function called with one item
            label: Name of the items for log messages

        Returns:
            Dictionary mapping each item to its result, in the order of
            ``items``. Items that failed map to {'error': message}.
        """
        results = {}

        if not items:
            logger.warning(f"No {label} to run")
            return results

        if self.max_workers <= 1 or len(items) == 1:
            for item in items:
                results[item] = self._call(work_function, item, label)
            return results

        logger.info(
            f"Running {len(items)} {label} in parallel (max {self.max_workers} workers)"
        )

        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            future_to_item = {
                executor.submit(work_function, item): item
                for item in items
            }

            for future in as_completed(future_to_item):
                item = future_to_item[future]
                try:
                    results[item] = future.result()
                    logger.debug(f"Finished {label} {item}")
                except Exception as e:
                    logger.error(f"Error running {label} {item}: {e}")
                    results[item] = {'error': str(e), 'exception': e}

        # Re-emit in submission order
        ordered = {item: results[item] for item in items}
        failed = sum(1 for r in ordered.values() if self.is_error(r))
        logger.info(f"Parallel run completed: {len(items) - failed}/{len(items)} {label} successful")
        return ordered

    @staticmethod
    def _call(work_function, item, label):
        try:
            return work_function(item)
        except Exception as e:
            logger.error(f"Error running {label} {item}: {e}")
            return {'error': str(e), 'exception': e}

    @staticmethod
    def is_error(result: Any) -> bool:
        return isinstance(result, dict) and 'error' in result and 'exception' in result

    def raise_first_error(self, results: Dict[Hashable, Any]) -> None:
        """Re-raise the exception of the first failed item, in item order."""
        for item, result in results.items():
            if self.is_error(result):
                raise result['exception']


# Create a singleton instance
parallel_runner = ParallelRunner()
