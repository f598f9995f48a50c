"""Dataset manifest: committed fixtures plus checksum-verified downloads into a local cache.

Remote entries whose manifest checksum is ``null`` are fetched trust-on-first-use:
the digest of the first download is pinned in a ``.sha256`` sidecar and every
later fetch is verified against it.
"""

from __future__ import annotations

import hashlib
import io
import json
import logging
import os
import urllib.request
import zipfile
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .dataset import CsvSchema, DatasetError, RawDataset, load_csv

log = logging.getLogger(__name__)

CACHE_ENV = "BESPOKE_DT_CACHE"
FIXTURES = ("seeds", "balance-scale")


class ChecksumError(DatasetError):
    pass


@dataclass(frozen=True)
class ManifestEntry:
    name: str
    schema: CsvSchema
    file: str | None = None
    sha256: str | None = None
    parts: tuple[dict, ...] = ()
    format: str = "csv"

    @property
    def is_fixture(self) -> bool:
        return self.file is not None


def _data_dir() -> Path:
    return Path(str(resources.files("bespoke_dt") / "data"))


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "bespoke-dt"


def load_manifest(path: str | Path | None = None) -> dict[str, ManifestEntry]:
    path = Path(path) if path else _data_dir() / "datasets.json"
    raw = json.loads(Path(path).read_text())
    out = {}
    for name, e in raw["datasets"].items():
        out[name] = ManifestEntry(
            name=name,
            schema=CsvSchema.from_dict(e.get("schema", {})),
            file=e.get("file"),
            sha256=e.get("sha256"),
            parts=tuple(e.get("parts", ())),
            format=e.get("format", "csv"),
        )
    return out


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str | Path) -> str:
    return sha256_bytes(Path(path).read_bytes())


def fixture_path(name: str) -> Path:
    entry = load_manifest()[name]
    if not entry.is_fixture:
        raise DatasetError(f"{name} is not a committed fixture")
    return _data_dir() / entry.file


def _download(url: str, timeout: float) -> bytes:
    with urllib.request.urlopen(url, timeout=timeout) as resp:
        return resp.read()


def _check(data: bytes, expected: str | None, what: str) -> str:
    digest = sha256_bytes(data)
    if expected is not None and digest != expected:
        raise ChecksumError(f"checksum mismatch for {what}: expected {expected}, got {digest}")
    return digest


def fetch(
    entry: ManifestEntry,
    cache_dir: str | Path | None = None,
    allow_unpinned: bool = False,
    timeout: float = 60.0,
) -> Path:
    """Return a local path to the dataset file, downloading it into the cache if needed."""
    if entry.is_fixture:
        path = _data_dir() / entry.file
        _check(path.read_bytes(), entry.sha256, f"fixture {entry.name}")
        return path

    cache = Path(cache_dir) if cache_dir else default_cache_dir()
    cache.mkdir(parents=True, exist_ok=True)
    target = cache / f"{entry.name}.{entry.format}"
    sidecar = target.with_name(target.name + ".sha256")

    pinned = [p.get("sha256") for p in entry.parts]
    if target.exists() and sidecar.exists():
        recorded = json.loads(sidecar.read_text())
        for i, part_sha in enumerate(pinned):
            if part_sha is not None and recorded["parts"][i] != part_sha:
                raise ChecksumError(f"cached {entry.name} part {i} does not match manifest")
        _check(target.read_bytes(), recorded["file"], f"cached {entry.name}")
        log.info("cache hit", extra={"dataset": entry.name, "path": str(target)})
        return target

    if any(s is None for s in pinned) and not allow_unpinned:
        raise ChecksumError(
            f"{entry.name} has no pinned checksum in the manifest; "
            "re-run with allow_unpinned to pin the first download"
        )

    blobs, part_digests = [], []
    for i, part in enumerate(entry.parts):
        data = _download(part["url"], timeout)
        part_digests.append(_check(data, part.get("sha256"), f"{entry.name} part {i}"))
        if "member" in part:
            with zipfile.ZipFile(io.BytesIO(data)) as zf:
                data = zf.read(part["member"])
        if blobs and not blobs[-1].endswith(b"\n"):
            blobs.append(b"\n")
        blobs.append(data)
    content = b"".join(blobs)
    target.write_bytes(content)
    sidecar.write_text(json.dumps({"parts": part_digests, "file": sha256_bytes(content)}))
    log.info("fetched", extra={"dataset": entry.name, "path": str(target)})
    return target


def load_dataset(name_or_path: str, schema: CsvSchema | None = None, cache_dir: str | Path | None = None) -> RawDataset:
    """Load a manifest dataset by name, or any delimited file by path."""
    manifest = load_manifest()
    if name_or_path in manifest:
        entry = manifest[name_or_path]
        if entry.format != "csv":
            raise DatasetError(
                f"{entry.name} is distributed as {entry.format}; export it to CSV and load it by path"
            )
        if entry.is_fixture:
            path = fetch(entry)
        else:
            cache = Path(cache_dir) if cache_dir else default_cache_dir()
            path = cache / f"{entry.name}.{entry.format}"
            if not path.exists():
                raise DatasetError(f"{entry.name} not in cache {cache}; run the fetch command first")
        return load_csv(path, schema or entry.schema, name=entry.name)
    return load_csv(name_or_path, schema or CsvSchema())


def dataset_available(name: str, cache_dir: str | Path | None = None) -> bool:
    entry = load_manifest()[name]
    if entry.is_fixture:
        return True
    cache = Path(cache_dir) if cache_dir else default_cache_dir()
    return (cache / f"{entry.name}.{entry.format}").exists()
