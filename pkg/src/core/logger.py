import logging
import sys


def setup_logging(level=logging.INFO):
    """
    Sets up structured logging for the shearForge project.

    Calling it again only adjusts the level; handlers are never added twice.
    """
    formatter = logging.Formatter(
        fmt='%(asctime)s | %(name)-20s | %(levelname)-8s | %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    root_logger = logging.getLogger("shearForge")
    if not root_logger.handlers:
        handler = logging.StreamHandler(sys.stdout)
        handler.setFormatter(formatter)
        root_logger.addHandler(handler)
        root_logger.propagate = False
    root_logger.setLevel(level)

    return root_logger
