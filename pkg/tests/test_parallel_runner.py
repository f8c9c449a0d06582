import pytest

from services.parallel_runner import ParallelRunner


def square_or_fail(item):
    if item == 3:
        raise ValueError('three')
    return item * item


class TestParallelRunner:
    """Keyed thread-pool execution."""

    @pytest.mark.parametrize('workers', [1, 4])
    def test_results_in_item_order(self, workers):
        results = ParallelRunner(workers).run([5, 1, 4, 2], square_or_fail)
        assert list(results) == [5, 1, 4, 2]
        assert list(results.values()) == [25, 1, 16, 4]

    @pytest.mark.parametrize('workers', [1, 4])
    def test_errors_captured_and_reraised(self, workers):
        runner = ParallelRunner(workers)
        results = runner.run([1, 3, 2], square_or_fail)
        assert runner.is_error(results[3])
        assert not runner.is_error(results[2])
        with pytest.raises(ValueError, match='three'):
            runner.raise_first_error(results)

    def test_empty(self):
        assert ParallelRunner(2).run([], square_or_fail) == {}
