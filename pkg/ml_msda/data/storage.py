"""Binary dataset files. The byte layout is documented in docs/dataset_format.md."""
import struct
from pathlib import Path

import numpy as np

from ..errors import DatasetFormatError, DatasetVersionError
from .dataset import Domain, DomainSplit, MultiDomainDataset

MAGIC = b"MLMSDADS"
FORMAT_VERSION = 1

ROLE_SOURCE = 0
ROLE_TARGET = 1

_HEADER = struct.Struct("<8sHIII")  # magic, version, K, input_dim, domain count
_DOMAIN = struct.Struct("<BIII")  # role, K, n_train, n_test


def dumps_dataset(ds: MultiDomainDataset) -> bytes:
    parts = [_HEADER.pack(MAGIC, FORMAT_VERSION, ds.num_classes, ds.input_dim, len(ds.domains))]
    parts.append(_pack_text(ds.tag))
    for domain in ds.domains:
        role = ROLE_TARGET if domain is ds.target else ROLE_SOURCE
        parts.append(_pack_text(domain.name))
        parts.append(_DOMAIN.pack(role, ds.num_classes, len(domain.train), len(domain.test)))
    for domain in ds.domains:
        for split in (domain.train, domain.test):
            parts.append(split.x.astype("<f8").tobytes())
            parts.append(split.y.astype("<i4").tobytes())
    return b"".join(parts)


def save_dataset(ds: MultiDomainDataset, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps_dataset(ds))
    return path


def _pack_text(text: str) -> bytes:
    raw = text.encode("utf-8")
    return struct.pack("<H", len(raw)) + raw


class _Reader:
    def __init__(self, payload: bytes):
        self.payload = payload
        self.offset = 0

    def take(self, size: int) -> bytes:
        end = self.offset + size
        if end > len(self.payload):
            raise DatasetFormatError(
                f"dataset file is truncated: wanted {size} bytes at offset {self.offset}, "
                f"{len(self.payload) - self.offset} left"
            )
        chunk = self.payload[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, layout: struct.Struct) -> tuple:
        return layout.unpack(self.take(layout.size))

    def text(self) -> str:
        (length,) = struct.unpack("<H", self.take(2))
        try:
            return self.take(length).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DatasetFormatError(f"invalid text field: {exc}") from exc

    def array(self, dtype: str, count: int) -> np.ndarray:
        width = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(width * count), dtype=dtype)


def loads_dataset(payload: bytes) -> MultiDomainDataset:
    reader = _Reader(payload)
    magic, version, num_classes, input_dim, count = reader.unpack(_HEADER)
    if magic != MAGIC:
        raise DatasetFormatError("not an ml-msda dataset file (bad magic)")
    if version != FORMAT_VERSION:
        raise DatasetVersionError(
            f"unsupported dataset format version {version}, expected {FORMAT_VERSION}"
        )
    if num_classes < 2 or input_dim < 1 or count < 2:
        raise DatasetFormatError(
            f"degenerate header: K={num_classes}, input_dim={input_dim}, domains={count}"
        )
    tag = reader.text()

    table = []
    for _ in range(count):
        name = reader.text()
        role, domain_classes, n_train, n_test = reader.unpack(_DOMAIN)
        if domain_classes != num_classes:
            raise DatasetFormatError(
                f"domain {name!r} declares K={domain_classes}, header declares K={num_classes}"
            )
        table.append((name, role, n_train, n_test))

    roles = [role for _, role, _, _ in table]
    if roles[-1] != ROLE_TARGET or roles.count(ROLE_TARGET) != 1 or any(
        role not in (ROLE_SOURCE, ROLE_TARGET) for role in roles
    ):
        raise DatasetFormatError("the domain table must end with the only target domain")

    domains = []
    for name, _, n_train, n_test in table:
        splits = []
        for size in (n_train, n_test):
            x = reader.array("<f8", size * input_dim).reshape(size, input_dim)
            y = reader.array("<i4", size)
            if not np.all(np.isfinite(x)):
                raise DatasetFormatError(f"domain {name!r} holds non-finite features")
            if size and (y.min() < 0 or y.max() >= num_classes):
                raise DatasetFormatError(f"domain {name!r} holds labels outside [0, {num_classes})")
            splits.append(DomainSplit(x=x.astype(np.float64), y=y.astype(np.int64)))
        domains.append(Domain(name=name, train=splits[0], test=splits[1]))

    if reader.offset != len(payload):
        raise DatasetFormatError(f"{len(payload) - reader.offset} trailing bytes after the last block")

    return MultiDomainDataset(
        num_classes=num_classes,
        input_dim=input_dim,
        sources=tuple(domains[:-1]),
        target=domains[-1],
        tag=tag,
    )


def load_dataset(path: str | Path) -> MultiDomainDataset:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    return loads_dataset(path.read_bytes())
