from contextlib import contextmanager
from pathlib import Path

import portalocker

LOCK_NAME = ".stackforecast.lock"


@contextmanager
def output_lock(directory: Path):
    """Hold an exclusive lock on ``directory`` while reports are written into it."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / LOCK_NAME, "a+") as f:
        portalocker.lock(f, portalocker.LOCK_EX)
        try:
            yield directory
        finally:
            portalocker.unlock(f)
