from concurrent.futures import ThreadPoolExecutor


def ordered_map(function, items, threads: int = 1) -> list:
    """
    Maps `function` over `items`, optionally on a thread pool.

    Results always come back in input order, so reductions over them are independent
    of the schedule.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(function, items))
