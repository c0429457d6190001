import csv
from pathlib import Path
from typing import Optional

from ..model.network import MlMsdaModel, extract, subnetwork_name

SPLITS = ("train", "test")


def feature_columns(feature_dim: int) -> list[str]:
    """domain_id, domain, split, subnetwork, label, f0..f{d-1}, config_hash."""
    return [
        "domain_id", "domain", "split", "subnetwork", "label",
        *[f"f{i}" for i in range(feature_dim)],
        "config_hash",
    ]


def dump_features(
    model: MlMsdaModel,
    ds,
    path: str | Path,
    subnetwork: Optional[int] = None,
    split: str = "test",
    config_hash: str = "",
) -> int:
    """Write one row per sample of every domain's ``split``, embedded by ``subnetwork``.

    The guidance network is used when ``subnetwork`` is None. Domain ids run 1..N for the
    sources and N+1 for the target. The label is left empty for target training samples.
    Returns the number of rows written.
    """
    if split not in SPLITS:
        raise ValueError(f"split must be one of {SPLITS}, got {split!r}")
    j = subnetwork or model.guidance_index
    name = subnetwork_name(j, model.num_sources)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    rows = 0
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(feature_columns(model.arch.feature_dim))
        for domain_id, domain in enumerate(ds.domains, start=1):
            part = getattr(domain, split)
            if len(part) == 0:
                continue
            hide_labels = domain is ds.target and split == "train"
            features = extract(model, j, part.x).data
            for vector, label in zip(features, part.y):
                writer.writerow([
                    domain_id, domain.name, split, name,
                    "" if hide_labels else int(label),
                    *(repr(float(v)) for v in vector),
                    config_hash,
                ])
                rows += 1
    return rows
