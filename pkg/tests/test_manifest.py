import json

import pytest

from scottlab import __version__
from scottlab.errors import InputError
from scottlab.manifest import RunManifest, load_manifest, sha256_file, sha256_text, write_manifest


@pytest.fixture
def manifest(tmp_path):
    source = tmp_path / "formula.sexp"
    source.write_text("(R x y)\n", encoding="utf-8")
    return RunManifest(
        command=["formula", "classify", str(source)],
        inputs={str(source): sha256_file(source)},
        bounds={"max_size": 3},
        exit_code=0,
        outcome="ok",
        report_sha256=sha256_text("(Both, 0)\n"),
    )


def test_digests_agree_for_text_and_files(tmp_path):
    path = tmp_path / "a.txt"
    path.write_text("abc", encoding="utf-8")
    assert sha256_file(path) == sha256_text("abc")
    assert sha256_text("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"


def test_manifests_are_sorted_and_carry_the_version(manifest):
    document = json.loads(manifest.to_json())
    assert list(document) == sorted(document)
    assert document["version"] == __version__
    assert manifest.to_json().endswith("\n")


def test_written_manifest_loads_back(manifest, tmp_path):
    destination = tmp_path / "runs" / "run.json"
    write_manifest(manifest, destination)
    assert load_manifest(destination) == manifest
    assert destination.read_text(encoding="utf-8") == manifest.to_json()


def test_changed_inputs(manifest):
    assert manifest.changed_inputs() == []
    (path,) = manifest.inputs
    with open(path, "a", encoding="utf-8") as handle:
        handle.write("(R y x)\n")
    assert manifest.changed_inputs() == [path]


def test_missing_inputs_count_as_changed(manifest):
    (path,) = manifest.inputs
    manifest.inputs[path + ".gone"] = manifest.inputs[path]
    assert manifest.changed_inputs() == [path + ".gone"]


def test_invalid_manifest_is_an_input_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"command": "classify"}', encoding="utf-8")
    with pytest.raises(InputError, match="Invalid manifest"):
        load_manifest(path)
