"""
Instance Store
Reads and writes instance files, keeping parse and I/O failures apart so the
CLI can map both onto its exit codes.
"""

import logging
import os

from modules.instance_model import Instance, parse_instance, serialize_instance

logger = logging.getLogger(__name__)

SAMPLES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "samples")


class InstanceStore:
    def __init__(self, encoding: str = "utf-8"):
        """Initialize the store with the file encoding used for every read and write."""
        self.encoding = encoding

    def read_text(self, path: str) -> str:
        """
        Read an instance file as text.

        Raises:
            OSError: the file is missing or unreadable
        """
        try:
            with open(path, "r", encoding=self.encoding) as handle:
                return handle.read()
        except OSError as e:
            logger.error("cannot read instance file %s: %s", path, e)
            raise

    def load(self, path: str, validate: bool = False) -> Instance:
        """
        Load and parse an instance file.

        Raises:
            OSError: the file is missing or unreadable
            InstanceFormatError: the text is not a well-formed instance
            InstanceValidationError: validate is set and invariants fail
        """
        instance = parse_instance(self.read_text(path), validate=validate)
        logger.info("loaded %s: %d nodes, %d demands", path, len(instance.nodes), len(instance.demands))
        return instance

    def save(self, instance: Instance, path: str):
        """Write an instance in the canonical format; parent directories are created."""
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding=self.encoding, newline="\n") as handle:
            handle.write(serialize_instance(instance))
        logger.info("instance written to %s", path)

    @staticmethod
    def sample_path(name: str) -> str:
        """Path of a bundled sample instance, e.g. sample_path("line3")."""
        return os.path.join(SAMPLES_DIR, f"{name}.json")
