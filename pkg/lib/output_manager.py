"""
Output Manager for Experiment Runs

Manages the organized folder structure for experiment artifacts.
Creates a base folder with one subfolder per instance holding all its
related files (graph, solution, trace, report).
"""

import os
import logging
from pathlib import Path
from typing import Dict, Any


class OutputManager:
    """Manages organized output folder structure for instance files."""

    FILE_NAMES = {
        "graph": "graph.json",
        "solution": "solution.json",
        "trace": "trace.csv",
        "report": "report.json",
        "gnuplot": "plot.gp",
    }

    def __init__(self, config: Dict[str, Any]):
        """
        Initialize output manager with configuration.

        Args:
            config: Configuration dictionary with output settings
        """
        self.config = config.get("output", {}) or {}
        self.base_folder = os.path.expanduser(self.config.get("base_folder", ".output"))
        self.float_digits = int(self.config.get("float_digits", 12))
        self.logger = logging.getLogger(__name__)

        self.logger.debug(f"Output manager initialized: {self.base_folder}")

    def get_instance_folder(self, instance_name: str) -> str:
        """
        Get the folder path for a specific instance, creating it if needed.

        Args:
            instance_name: Name of the instance (e.g. the input file stem)

        Returns:
            Path to the instance's folder
        """
        safe_name = self._sanitize_folder_name(instance_name) or "instance"
        instance_folder = os.path.join(self.base_folder, safe_name)
        self._ensure_folder_exists(instance_folder)
        return instance_folder

    def get_artifact_path(self, instance_name: str, kind: str) -> str:
        """
        Get the default path of one artifact of an instance.

        Args:
            instance_name: Name of the instance
            kind: One of graph, solution, trace, report, gnuplot

        Returns:
            Full path inside the instance folder

        Raises:
            ValueError: For an unknown artifact kind
        """
        if kind not in self.FILE_NAMES:
            raise ValueError(f"Unknown artifact kind: {kind}")
        return os.path.join(self.get_instance_folder(instance_name), self.FILE_NAMES[kind])

    def resolve(self, explicit_path: str, instance_name: str, kind: str) -> str:
        """The explicit -o path when given, otherwise the organized default."""
        if explicit_path:
            return explicit_path
        return self.get_artifact_path(instance_name, kind)

    def instance_name(self, input_path: str) -> str:
        """
        Instance name of an input file.

        Artifacts already in an instance folder (graph.json, solution.json, ...)
        are named after that folder; any other file after its stem.
        """
        path = Path(input_path)
        if path.name in self.FILE_NAMES.values() and path.parent.name:
            return path.parent.name
        return path.stem

    def _sanitize_folder_name(self, name: str) -> str:
        """
        Sanitize a name for use as a folder name.

        Args:
            name: Original name

        Returns:
            Sanitized folder name
        """
        safe_name = "".join(c if c.isalnum() or c in "-_" else "_" for c in name)
        return safe_name.strip("_")

    def _ensure_folder_exists(self, folder_path: str) -> None:
        """
        Ensure a folder exists, creating it if necessary.

        Args:
            folder_path: Path to the folder
        """
        try:
            os.makedirs(folder_path, exist_ok=True)
            self.logger.debug(f"Ensured folder exists: {folder_path}")
        except Exception as e:
            self.logger.error(f"Failed to create folder {folder_path}: {e}")
            raise
