from tqdm import tqdm

from modules.logging_utils import setup_logger


class BaseModule:
    """Shared logger, debug flag and progress counter for pipeline components."""

    def __init__(self, name: str, debug: bool = False, verbose: bool = True, show_progress: bool = False):
        self.debug = debug
        self.verbose = verbose
        self.show_progress = show_progress and verbose
        self.logger = setup_logger(name, debug=debug, verbose=verbose)

    def progress(self, total: int, desc: str, unit: str = "it") -> tqdm:
        """stderr counter, a no-op unless show_progress is set."""
        return tqdm(total=total, desc=desc, unit=unit, disable=not self.show_progress, leave=False)
