import os

import pytest

from lib.output_manager import OutputManager


@pytest.fixture
def manager(tmp_path):
    return OutputManager({"output": {"base_folder": str(tmp_path / "runs"), "float_digits": 8}})


def test_artifact_paths_share_an_instance_folder(manager, tmp_path):
    graph = manager.get_artifact_path("er-seed3", "graph")
    trace = manager.get_artifact_path("er-seed3", "trace")
    assert graph == os.path.join(str(tmp_path / "runs"), "er-seed3", "graph.json")
    assert os.path.dirname(graph) == os.path.dirname(trace)
    assert os.path.isdir(os.path.dirname(graph))
    assert manager.float_digits == 8


def test_folder_names_are_sanitized(manager):
    assert os.path.basename(manager.get_instance_folder("my instance/v2")) == "my_instance_v2"
    assert os.path.basename(manager.get_instance_folder("///")) == "instance"


def test_explicit_path_wins(manager):
    assert manager.resolve("out/solution.json", "ignored", "solution") == "out/solution.json"


def test_unknown_artifact_kind(manager):
    with pytest.raises(ValueError):
        manager.get_artifact_path("x", "movie")


@pytest.mark.parametrize(
    "path, name",
    [
        (".output/lattice-seed7/graph.json", "lattice-seed7"),
        (".output/lattice-seed7/solution.json", "lattice-seed7"),
        ("fixtures/path3.json", "path3"),
        ("graph.json", "graph"),
    ],
)
def test_instance_name(manager, path, name):
    assert manager.instance_name(path) == name


def test_defaults_without_an_output_section():
    assert OutputManager({}).base_folder == ".output"
