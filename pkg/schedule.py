import logging

from concurrent.futures import (
    Future,
    ProcessPoolExecutor,
)

from typing import (
    Any,
    Callable,
    Dict,
    List,
    Sequence,
)

logger = logging.getLogger(__name__)

class ScheduleError(Exception):
    """
    Exception class for scheduled runs in which at least one item failed

    ...

    Attributes
    ----------
    failures: Dict[int, BaseException]
        failed item index to its exception
    results: Dict[int, Any]
        successful item index to its result
    message: str

    """

    failures: Dict[int, BaseException]
    results: Dict[int, Any]
    message: str

    def __init__(
        self,
        failures: Dict[int, BaseException],
        results: Dict[int, Any]
    ) -> None:
        self.failures = failures
        self.results = results
        self.message = "Scheduled work failed: "

    def __str__(self) -> str:
        details = '; '.join(
            f'item {index}: {error}' for index, error in sorted(self.failures.items())
        )

        return f'{self.message} {len(self.failures)} failed, {len(self.results)} succeeded ({details})'

def schedule(
    func: Callable[[Any], Any],
    items: Sequence[Any],
    jobs: int=1
) -> List[Any]:
    """
    Applies func to every item with up to `jobs` worker processes

    Every item is run to completion, so a failure is reported together with
    all other failures and the successful results.

    :param Callable func: picklable function of one item when jobs > 1
    :param Sequence items: work items
    :param int jobs: maximum items in flight
    :return: results in input order
    :raises ScheduleError: at least one item raised
    :raises ValueError: jobs < 1
    """
    if jobs < 1:
        raise ValueError(f"jobs must be at least 1, got {jobs}")

    results: Dict[int, Any] = {}
    failures: Dict[int, BaseException] = {}

    if jobs == 1 or len(items) <= 1:

        for index, item in enumerate(items):

            try:
                results[index] = func(item)
            except Exception as error:
                logger.error("Work item %d failed: %s", index, error)
                failures[index] = error

    else:

        with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as executor:
            futures: List[Future] = [executor.submit(func, item) for item in items]

            for index, future in enumerate(futures):

                try:
                    results[index] = future.result()
                except Exception as error:
                    logger.error("Work item %d failed: %s", index, error)
                    failures[index] = error

    if failures:
        raise ScheduleError(failures, results)

    return [results[index] for index in range(len(items))]
