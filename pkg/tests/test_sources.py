import io
import json
import zipfile

import pytest

from bespoke_dt.dataset import CsvSchema, DatasetError
from bespoke_dt.sources import (
    CACHE_ENV,
    ChecksumError,
    ManifestEntry,
    dataset_available,
    default_cache_dir,
    fetch,
    fixture_path,
    load_dataset,
    load_manifest,
    sha256_bytes,
    sha256_file,
)

CSV = b"1.0 2.0 a\n3.0 4.0 b\n5.0 1.0 a\n"


def remote(tmp_path, data=CSV, sha=None, member=None, name="toy"):
    src = tmp_path / "src.bin"
    src.write_bytes(data)
    part = {"url": src.as_uri(), "sha256": sha}
    if member:
        part["member"] = member
    return ManifestEntry(name=name, schema=CsvSchema(label_column=2, delimiter=None), parts=(part,)), src


def test_fixtures_need_no_network(monkeypatch):
    def boom(*a, **k):
        raise AssertionError("network used")

    monkeypatch.setattr("urllib.request.urlopen", boom)
    manifest = load_manifest()
    for name in ("seeds", "balance-scale"):
        path = fetch(manifest[name])
        assert path == fixture_path(name)
        assert sha256_file(path) == manifest[name].sha256
        assert dataset_available(name)


def test_pinned_fetch_and_cache_reuse(tmp_path, monkeypatch):
    entry, src = remote(tmp_path, sha=sha256_bytes(CSV))
    cache = tmp_path / "cache"
    path = fetch(entry, cache)
    assert path.read_bytes() == CSV
    # second call must not touch the source
    src.unlink()
    monkeypatch.setattr("urllib.request.urlopen", lambda *a, **k: pytest.fail("re-downloaded"))
    assert fetch(entry, cache) == path


def test_corrupted_download(tmp_path):
    entry, _ = remote(tmp_path, sha="0" * 64)
    with pytest.raises(ChecksumError, match="mismatch"):
        fetch(entry, tmp_path / "cache")


def test_corrupted_cache_detected(tmp_path):
    entry, _ = remote(tmp_path, sha=sha256_bytes(CSV))
    path = fetch(entry, tmp_path / "cache")
    path.write_bytes(b"tampered\n")
    with pytest.raises(ChecksumError):
        fetch(entry, tmp_path / "cache")


def test_unpinned_requires_opt_in(tmp_path):
    entry, _ = remote(tmp_path)
    with pytest.raises(ChecksumError, match="pinned"):
        fetch(entry, tmp_path / "cache")
    path = fetch(entry, tmp_path / "cache", allow_unpinned=True)
    sidecar = json.loads(path.with_name(path.name + ".sha256").read_text())
    assert sidecar["file"] == sha256_bytes(CSV)


def test_zip_member(tmp_path):
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        zf.writestr("inner/data.dat", CSV)
    blob = buf.getvalue()
    entry, _ = remote(tmp_path, data=blob, sha=sha256_bytes(blob), member="inner/data.dat")
    assert fetch(entry, tmp_path / "cache").read_bytes() == CSV


def test_cache_env(monkeypatch, tmp_path):
    monkeypatch.setenv(CACHE_ENV, str(tmp_path / "c"))
    assert default_cache_dir() == tmp_path / "c"
    assert not dataset_available("vertebral-2c")
    with pytest.raises(DatasetError, match="fetch"):
        load_dataset("vertebral-2c")


def test_load_by_path(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("1,2,x\n3,4,y\n")
    assert load_dataset(str(p)).n_samples == 2


def test_xls_entry_explains():
    with pytest.raises(DatasetError, match="CSV"):
        load_dataset("cardio")


def test_manifest_entries_complete():
    m = load_manifest()
    assert {"seeds", "balance-scale", "vertebral-2c", "vertebral-3c", "pendigits", "whitewine", "cardio", "arrhythmia"} <= set(m)
    for e in m.values():
        assert e.is_fixture or e.parts
        if e.is_fixture:
            assert e.sha256 and len(e.sha256) == 64
