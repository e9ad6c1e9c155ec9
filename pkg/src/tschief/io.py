"""UCR-format loading, stratified subsampling, model files and results CSVs."""

import csv
import io
import json
import os
import struct
import zlib
from dataclasses import astuple, dataclass, fields

import numpy as np

from .core import LabeledDataset, TsChiefError, znormalize
from .dictionary import BossParams, BossTransform, Histograms
from .distances import Measure
from .forest import ForestConfig, TsChiefForest
from .spectral import Interval
from .tree import DictionarySplitter, Internal, IntervalSplitter, Leaf, SimilaritySplitter

MAGIC = b"TSCF"
FORMAT_VERSION = 1

RESULTS_HEADER = (
    "dataset", "n_train", "n_test", "series_length", "classes", "k", "t", "Ce", "Cb", "Cr",
    "seed", "accuracy", "train_seconds", "test_seconds", "sim_nodes", "dict_nodes",
    "interval_nodes",
)


class DataFormatError(TsChiefError):
    pass


class ModelFormatError(TsChiefError):
    pass


def _parse_rows(path):
    try:
        with open(path) as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    except FileNotFoundError:
        raise DataFormatError(f"file not found: {path}") from None
    if not lines:
        raise DataFormatError(f"empty file: {path}")
    comma = "," in lines[0]
    rows = []
    width = None
    for no, line in enumerate(lines, 1):
        fields_ = line.split(",") if comma else line.split()
        try:
            vals = [float(v) for v in fields_]
        except ValueError:
            raise DataFormatError(f"{path}: non-numeric field on row {no}") from None
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise DataFormatError(f"{path}: ragged row {no} ({len(vals)} fields, expected {width})")
        rows.append(vals)
    if width < 3:
        raise DataFormatError(f"{path}: rows need a label and at least two values")
    return np.asarray(rows, dtype=np.float64)


def load_ucr_file(path, classes=None, normalize=False):
    """Read a UCR TSV/CSV file (label first).

    Labels are remapped to ``0..c-1`` in sorted order of the original values.
    Pass the ``classes`` of a training split to load its test split with the
    same mapping; labels missing from that table are rejected.
    """
    data = _parse_rows(path)
    raw = data[:, 0]
    if not np.all(raw == np.round(raw)):
        raise DataFormatError(f"{path}: labels must be integer-valued")
    raw = raw.astype(np.int64)
    if classes is None:
        classes = tuple(int(v) for v in np.unique(raw))
    table = {c: i for i, c in enumerate(classes)}
    unknown = sorted(set(raw.tolist()) - table.keys())
    if unknown:
        raise DataFormatError(f"{path}: labels not seen in training: {unknown}")
    y = np.array([table[v] for v in raw.tolist()], dtype=np.int64)
    X = data[:, 1:]
    if normalize:
        X = znormalize(X)
    name = os.path.basename(path).rsplit(".", 1)[0]
    for suffix in ("_TRAIN", "_TEST"):
        name = name.removesuffix(suffix)
    return LabeledDataset(X, y, len(classes), classes, name)


def load_ucr_split(train_path, test_path, normalize=False):
    train = load_ucr_file(train_path, normalize=normalize)
    return train, load_ucr_file(test_path, train.classes, normalize)


def stratified_subsample(dataset, size, rng):
    """Sample ``size`` instances keeping class proportions, at least one per class.

    Quotas start from the proportional share (floored, minimum one) and are
    adjusted by largest remainder until they sum to ``size``.
    """
    counts = dataset.class_counts()
    present = np.flatnonzero(counts)
    if size < len(present):
        raise TsChiefError(f"sample size {size} smaller than class count {len(present)}")
    if size > dataset.n:
        raise TsChiefError(f"sample size {size} larger than dataset ({dataset.n})")
    share = size * counts[present] / dataset.n
    quota = np.maximum(np.floor(share).astype(np.int64), 1)
    rem = share - np.floor(share)
    while quota.sum() < size:
        room = np.where(quota < counts[present], rem, -np.inf)
        j = int(np.argmax(room))
        quota[j] += 1
        rem[j] = -1.0
    while quota.sum() > size:
        room = np.where(quota > 1, -rem, -np.inf)
        j = int(np.argmax(room))
        quota[j] -= 1
        rem[j] = 2.0
    picks = [rng.choice(np.flatnonzero(dataset.y == c), size=q, replace=False)
             for c, q in zip(present, quota)]
    idx = rng.permutation(np.concatenate(picks))
    return dataset.subset(idx)


# model files

def _splitter_record(sp, arrays):
    if isinstance(sp, SimilaritySplitter):
        arrays["sim"].append(sp.exemplars)
        return {"type": "similarity", "measure": sp.measure.to_dict(),
                "classes": list(sp.classes), "salt": sp.salt}
    if isinstance(sp, DictionarySplitter):
        arrays["dict"].append(sp.exemplars)
        return {"type": "dictionary", "transform": sp.transform,
                "classes": list(sp.classes), "salt": sp.salt}
    return {"type": "interval", "start": sp.interval.start, "length": sp.interval.length,
            "feature": sp.feature, "attribute": sp.attribute, "threshold": sp.threshold}


def _encode_tree(root, arrays):
    """Flat node list; children are referenced by list position (-1 for a dropped branch)."""
    nodes = []
    stack = [(root, None, 0)]
    while stack:
        node, parent, slot = stack.pop()
        pos = -1 if node is None else len(nodes)
        if parent is not None:
            parent["children"][slot] = pos
        if node is None:
            continue
        if isinstance(node, Leaf):
            nodes.append({"leaf": node.label, "forced": node.forced})
            continue
        rec = {"split": _splitter_record(node.splitter, arrays), "fallback": node.fallback,
               "children": [-1] * len(node.children)}
        nodes.append(rec)
        for b in reversed(range(len(node.children))):
            stack.append((node.children[b], rec, b))
    return nodes


def _concat_hists(hists):
    ptr = [np.zeros(1, np.int64)]
    base = 0
    for h in hists:
        ptr.append(h.ptr[1:] + base)
        base += int(h.ptr[-1])
    return (np.concatenate(ptr), np.concatenate([h.words for h in hists]),
            np.concatenate([h.counts for h in hists]))


def save_model(forest, path):
    arrays = {"sim": [], "dict": []}
    trees = [_encode_tree(t, arrays) for t in forest.trees]
    sim = (np.concatenate(arrays["sim"]) if arrays["sim"]
           else np.empty((0, forest.length)))
    blob = {"sim_exemplars": sim,
            "sim_sizes": np.array([len(e) for e in arrays["sim"]], dtype=np.int64)}
    sizes = [len(h) for h in arrays["dict"]]
    if arrays["dict"]:
        ptr, words, counts = _concat_hists(arrays["dict"])
    else:
        ptr, words, counts = np.zeros(1, np.int64), np.empty(0, np.uint32), np.empty(0, np.int32)
    blob.update(dict_ptr=ptr, dict_words=words, dict_counts=counts,
                dict_sizes=np.array(sizes, dtype=np.int64))
    transforms = []
    for k, tr in sorted(forest.transforms.items()):
        blob[f"mcb_{k}"] = tr.mcb
        p = tr.params
        transforms.append({"index": k, "window": p.window, "word_length": p.word_length,
                           "norm": p.norm, "alphabet": p.alphabet})
    header = {"config": forest.config.to_dict(), "n_classes": forest.n_classes,
              "length": forest.length, "classes": list(forest.classes),
              "transforms": transforms, "trees": trees}
    buf = io.BytesIO()
    np.savez(buf, **blob)
    payload = buf.getvalue()
    head = json.dumps(header, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HI", FORMAT_VERSION, len(head)))
        fh.write(head)
        fh.write(struct.pack("<QI", len(payload), zlib.crc32(payload)))
        fh.write(payload)


def _read_exact(fh, n):
    data = fh.read(n)
    if len(data) != n:
        raise ModelFormatError("truncated model file")
    return data


def load_model(path):
    try:
        fh = open(path, "rb")
    except FileNotFoundError:
        raise ModelFormatError(f"file not found: {path}") from None
    with fh:
        if fh.read(4) != MAGIC:
            raise ModelFormatError("not a model file")
        version, head_len = struct.unpack("<HI", _read_exact(fh, 6))
        if version != FORMAT_VERSION:
            raise ModelFormatError(f"unsupported model format version {version}")
        header = json.loads(_read_exact(fh, head_len))
        blob_len, crc = struct.unpack("<QI", _read_exact(fh, 12))
        payload = _read_exact(fh, blob_len)
    if zlib.crc32(payload) != crc:
        raise ModelFormatError("corrupted model file (checksum mismatch)")
    with np.load(io.BytesIO(payload)) as z:
        blob = {k: z[k] for k in z.files}

    sim_off = np.concatenate([[0], np.cumsum(blob["sim_sizes"])])
    dict_off = np.concatenate([[0], np.cumsum(blob["dict_sizes"])])
    pool = Histograms(blob["dict_ptr"], blob["dict_words"], blob["dict_counts"])
    counters = {"sim": 0, "dict": 0}

    def splitter(rec):
        kind = rec["type"]
        if kind == "similarity":
            i = counters["sim"]
            counters["sim"] += 1
            ex = np.ascontiguousarray(blob["sim_exemplars"][sim_off[i]:sim_off[i + 1]])
            return SimilaritySplitter(Measure.from_dict(rec["measure"]), ex,
                                      tuple(rec["classes"]), rec["salt"])
        if kind == "dictionary":
            i = counters["dict"]
            counters["dict"] += 1
            ex = pool.take(np.arange(dict_off[i], dict_off[i + 1]))
            return DictionarySplitter(rec["transform"], ex, tuple(rec["classes"]), rec["salt"])
        return IntervalSplitter(Interval(rec["start"], rec["length"]), rec["feature"],
                                rec["attribute"], rec["threshold"])

    def decode(nodes):
        built = [None] * len(nodes)
        for pos, rec in enumerate(nodes):
            if "leaf" in rec:
                built[pos] = Leaf(rec["leaf"], rec["forced"])
            else:
                built[pos] = Internal(splitter(rec["split"]), [], rec["fallback"])
        for pos, rec in enumerate(nodes):
            if "children" in rec:
                built[pos].children = [built[c] if c >= 0 else None for c in rec["children"]]
        return built[0]

    trees = [decode(t) for t in header["trees"]]
    transforms = {}
    for rec in header["transforms"]:
        params = BossParams(rec["window"], rec["word_length"], rec["norm"], rec["alphabet"])
        transforms[rec["index"]] = BossTransform(params, blob[f"mcb_{rec['index']}"])
    return TsChiefForest(ForestConfig(**header["config"]), trees, transforms,
                         header["n_classes"], header["length"], tuple(header["classes"]))


# results

@dataclass
class ResultsRecord:
    dataset: str
    n_train: int
    n_test: int
    series_length: int
    classes: int
    k: int
    t: int
    Ce: int
    Cb: int
    Cr: int
    seed: int
    accuracy: float
    train_seconds: float
    test_seconds: float
    sim_nodes: int
    dict_nodes: int
    interval_nodes: int

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise TsChiefError("accuracy outside [0, 1]")
        if self.train_seconds < 0 or self.test_seconds < 0:
            raise TsChiefError("negative time")

    def row(self):
        out = []
        for f, v in zip(fields(self), astuple(self)):
            if f.name == "accuracy":
                out.append(f"{v:.6f}")
            elif isinstance(v, float):
                out.append(f"{v:.4f}")
            else:
                out.append(str(v))
        return out


def write_results(records, path):
    """Append records as CSV rows, writing the header only for a new file."""
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    try:
        fh = open(path, "a", newline="")
    except OSError as exc:
        raise TsChiefError(f"cannot write results to {path}: {exc.strerror}") from None
    with fh:
        w = csv.writer(fh)
        if new:
            w.writerow(RESULTS_HEADER)
        for r in records:
            w.writerow(r.row())
            fh.flush()
