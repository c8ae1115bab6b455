import json
import os
import shutil
import struct
from pathlib import Path

import numpy as np
import pytest


def pack_cwe1(dim, records):
    """CWE1 bytes packed by hand with struct, independent of the library writer."""
    out = [b"CWE1", struct.pack("<IQ", dim, len(records))]
    for key, vec in records:
        raw = key.encode("utf-8")
        out.append(struct.pack("<H", len(raw)) + raw)
        out.append(struct.pack("<%df" % dim, *vec))
    return b"".join(out)


def two_sense_data(seed, prefix, per_sense, separation, dim=16, extra_word=False):
    """JSONL corpus text and CWE1 records for two senses of 'bank'."""
    rng = np.random.default_rng(seed)
    lines, records = [], []
    for s, sense in enumerate(["bank%1:14:00::", "bank%1:17:01::"]):
        for i in range(per_sense):
            sid = f"{prefix}{s}_{i}"
            tokens = [{"s": "the", "l": "the"}, {"s": "bank", "l": "bank", "p": "NOUN", "k": sense}]
            lines.append(json.dumps({"id": sid, "tokens": tokens}))
            v = rng.normal(size=dim)
            v[0] += separation / 2 if s == 0 else -separation / 2
            records.append((f"{sid}#1", v.astype(np.float32).tolist()))
    if extra_word:
        sid = f"{prefix}x"
        tokens = [{"s": "crane", "l": "crane", "p": "NOUN", "k": "crane%1:06:00::"}]
        lines.append(json.dumps({"id": sid, "tokens": tokens}))
        records.append((f"{sid}#0", rng.normal(size=dim).astype(np.float32).tolist()))
    return "\n".join(lines) + "\n", records


@pytest.fixture
def cli():
    path = os.environ.get("SENSEKNN_CLI") or shutil.which("senseknn")
    if not path:
        pytest.skip("senseknn CLI not found (set SENSEKNN_CLI)")
    return path


@pytest.fixture
def dataset(tmp_path: Path):
    """Separated train/test splits written to disk."""
    train_text, train_recs = two_sense_data(1, "tr", 12, 12.0)
    test_text, test_recs = two_sense_data(2, "te", 6, 12.0, extra_word=True)
    files = {
        "train": tmp_path / "train.jsonl",
        "test": tmp_path / "test.jsonl",
        "train_vec": tmp_path / "train.cwe1",
        "test_vec": tmp_path / "test.cwe1",
    }
    files["train"].write_text(train_text)
    files["test"].write_text(test_text)
    files["train_vec"].write_bytes(pack_cwe1(16, train_recs))
    files["test_vec"].write_bytes(pack_cwe1(16, test_recs))
    return files
