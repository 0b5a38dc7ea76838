"""Built-in classifiers and stratified cross-validation.

Four learners share a tiny ``fit(dataset) / predict(dataset)`` protocol:
a CART-style Gini tree, a bagged random forest of those trees, naive Bayes
(Gaussian numerics, multinomial categoricals) and k-nearest neighbours.
Every tie is broken by class order (or instance order for neighbours), so
results depend only on the data and the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels


@dataclass
class Dataset:
    numeric: np.ndarray
    categorical: np.ndarray
    y: np.ndarray
    class_names: list
    numeric_names: list = field(default_factory=list)
    categorical_names: list = field(default_factory=list)
    categorical_levels: list = field(default_factory=list)

    def __post_init__(self):
        self.numeric = np.asarray(self.numeric, dtype=np.float64).reshape(len(self.y), -1)
        self.categorical = np.asarray(self.categorical, dtype=np.int64).reshape(len(self.y), -1)
        self.y = np.asarray(self.y, dtype=np.int64)

    def __len__(self):
        return len(self.y)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def n_features(self) -> int:
        return self.numeric.shape[1] + self.categorical.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(
            self.numeric[idx],
            self.categorical[idx],
            self.y[idx],
            self.class_names,
            self.numeric_names,
            self.categorical_names,
            self.categorical_levels,
        )

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.n_classes)

    @classmethod
    def from_records(cls, numeric, categorical, targets, numeric_names=(), categorical_names=(), class_order=None):
        """Encode string categories and labels.

        Classes follow ``class_order`` (restricted to those present, unknown
        labels appended in sorted order); category codes follow sorted level
        names per column.
        """
        targets = list(targets)
        present = set(targets)
        order = [c for c in (class_order or ()) if c in present]
        order += sorted(present - set(order))
        code = {c: i for i, c in enumerate(order)}
        n = len(targets)
        cat_rows = [tuple(r) for r in categorical] if n else []
        q = len(cat_rows[0]) if cat_rows else len(categorical_names)
        levels = [sorted({r[j] for r in cat_rows}) for j in range(q)]
        cat = np.zeros((n, q), dtype=np.int64)
        for j in range(q):
            lv = {v: i for i, v in enumerate(levels[j])}
            for i, r in enumerate(cat_rows):
                cat[i, j] = lv[r[j]]
        num = np.asarray([list(r) for r in numeric], dtype=np.float64) if n else np.zeros((0, len(numeric_names)))
        return cls(num, cat, np.array([code[t] for t in targets], dtype=np.int64), order,
                   list(numeric_names), list(categorical_names), levels)


def gini_impurity(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum()
    return 0.0 if n == 0 else float(1.0 - ((counts / n) ** 2).sum())


def _majority(counts: np.ndarray) -> int:
    # argmax returns the first maximum: ties go to the earlier class
    return int(np.argmax(counts))


# --------------------------------------------------------------------------
# CART
# --------------------------------------------------------------------------


@dataclass
class _Node:
    prediction: int
    counts: np.ndarray
    feature: int = -1  # index into numeric, or numeric count + categorical index
    threshold: float = 0.0  # numeric: go left when x <= threshold; categorical: left when code == threshold
    left: "_Node | None" = None
    right: "_Node | None" = None

    @property
    def is_leaf(self):
        return self.left is None


class DecisionTree:
    """Binary Gini tree.

    Numeric splits sit at the midpoint between consecutive distinct values;
    categorical splits separate one level from the rest. A node is split only
    when the weighted Gini impurity strictly drops and both children keep at
    least ``min_leaf`` instances.
    """

    name = "tree"

    def __init__(self, min_leaf: int = 2, max_depth: int | None = None, max_features: int | None = None, seed=None):
        if min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        self.min_leaf = min_leaf
        self.max_depth = max_depth
        self.max_features = max_features
        self.seed = seed
        self.root = None

    def fit(self, data: Dataset) -> "DecisionTree":
        if len(data) == 0:
            raise ValueError("cannot train on an empty dataset")
        self.n_classes = data.n_classes
        self.n_numeric = data.numeric.shape[1]
        self._rng = np.random.default_rng(self.seed) if self.max_features else None
        self.root = self._grow(data.numeric, data.categorical, data.y, 0)
        self._rng = None
        return self

    def _candidate_features(self, m):
        if not self.max_features or self.max_features >= m:
            return range(m)
        return sorted(self._rng.choice(m, size=self.max_features, replace=False).tolist())

    def _grow(self, X, C, y, depth) -> _Node:
        counts = np.bincount(y, minlength=self.n_classes)
        node = _Node(_majority(counts), counts)
        n = len(y)
        if n < 2 * self.min_leaf or (counts > 0).sum() <= 1:
            return node
        if self.max_depth is not None and depth >= self.max_depth:
            return node
        parent = float((counts * counts).sum()) / n
        best, best_f, best_t = parent * (1.0 + 1e-12), -1, 0.0
        m_num = X.shape[1]
        for f in self._candidate_features(m_num + C.shape[1]):
            if f < m_num:
                col = X[:, f]
                order = np.argsort(col, kind="mergesort")
                xs = col[order]
                score, i = kernels.best_gini_split(xs, y[order], self.n_classes, self.min_leaf)
                if i >= 0 and score > best:
                    best, best_f, best_t = score, f, (xs[i] + xs[i + 1]) / 2.0
            else:
                col = C[:, f - m_num]
                for level in np.unique(col):
                    mask = col == level
                    n_l = int(mask.sum())
                    n_r = n - n_l
                    if n_l < self.min_leaf or n_r < self.min_leaf:
                        continue
                    left = np.bincount(y[mask], minlength=self.n_classes)
                    right = counts - left
                    score = float((left * left).sum()) / n_l + float((right * right).sum()) / n_r
                    if score > best:
                        best, best_f, best_t = score, f, float(level)
        if best_f < 0:
            return node
        if best_f < m_num:
            mask = X[:, best_f] <= best_t
        else:
            mask = C[:, best_f - m_num] == int(best_t)
        node.feature, node.threshold = best_f, best_t
        node.left = self._grow(X[mask], C[mask], y[mask], depth + 1)
        node.right = self._grow(X[~mask], C[~mask], y[~mask], depth + 1)
        return node

    def _leaf(self, x_num, x_cat) -> _Node:
        node = self.root
        while not node.is_leaf:
            f = node.feature
            if f < self.n_numeric:
                go_left = x_num[f] <= node.threshold
            else:
                go_left = x_cat[f - self.n_numeric] == int(node.threshold)
            node = node.left if go_left else node.right
        return node

    def predict(self, data: Dataset) -> np.ndarray:
        return np.array([self._leaf(a, b).prediction for a, b in zip(data.numeric, data.categorical)], dtype=np.int64)

    def depth(self) -> int:
        def walk(node):
            return 0 if node.is_leaf else 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)

    def n_leaves(self) -> int:
        def walk(node):
            return 1 if node.is_leaf else walk(node.left) + walk(node.right)

        return walk(self.root)


class RandomForest:
    name = "forest"

    def __init__(self, trees: int = 100, features_per_split: int | None = None, min_leaf: int = 1, seed: int = 0):
        self.trees = trees
        self.features_per_split = features_per_split
        self.min_leaf = min_leaf
        self.seed = seed

    def fit(self, data: Dataset) -> "RandomForest":
        if len(data) == 0:
            raise ValueError("cannot train on an empty dataset")
        m = data.n_features
        k = self.features_per_split or max(1, math.ceil(math.sqrt(m)))
        self.n_classes = data.n_classes
        seeds = np.random.SeedSequence(self.seed).spawn(self.trees)
        self.members = []
        n = len(data)
        for ss in seeds:
            rng = np.random.default_rng(ss)
            boot = rng.integers(0, n, size=n)
            tree = DecisionTree(min_leaf=self.min_leaf, max_features=k, seed=rng.integers(2**32))
            self.members.append(tree.fit(data.subset(boot)))
        return self

    def predict(self, data: Dataset) -> np.ndarray:
        votes = np.zeros((len(data), self.n_classes), dtype=np.int64)
        rows = np.arange(len(data))
        for tree in self.members:
            pred = tree.predict(data)
            # a bootstrap sample may miss classes; codes stay global
            votes[rows, pred] += 1
        return np.argmax(votes, axis=1).astype(np.int64)


class NaiveBayes:
    name = "nb"

    def __init__(self, var_floor: float = 1e-9):
        self.var_floor = var_floor

    def fit(self, data: Dataset) -> "NaiveBayes":
        if len(data) == 0:
            raise ValueError("cannot train on an empty dataset")
        k = data.n_classes
        counts = data.class_counts().astype(np.float64)
        self.log_prior = np.log(np.where(counts > 0, counts, 1.0) / counts.sum())
        self.log_prior[counts == 0] = -np.inf
        p = data.numeric.shape[1]
        self.mean = np.zeros((k, p))
        self.var = np.ones((k, p))
        for c in range(k):
            rows = data.numeric[data.y == c]
            if len(rows):
                self.mean[c] = rows.mean(axis=0)
                self.var[c] = np.maximum(rows.var(axis=0), self.var_floor)
        self.cat_logp = []
        for j, levels in enumerate(data.categorical_levels):
            L = len(levels)
            table = np.ones((k, L))
            np.add.at(table, (data.y, data.categorical[:, j]), 1.0)
            self.cat_logp.append(np.log(table / table.sum(axis=1, keepdims=True)))
        return self

    def log_joint(self, data: Dataset) -> np.ndarray:
        x = data.numeric
        out = np.tile(self.log_prior, (len(data), 1))
        if x.shape[1]:
            diff = x[:, None, :] - self.mean[None, :, :]
            out += (-0.5 * (np.log(2 * np.pi * self.var)[None] + diff * diff / self.var[None])).sum(axis=2)
        for j, table in enumerate(self.cat_logp):
            codes = data.categorical[:, j]
            known = codes < table.shape[1]
            out[known] += table[:, codes[known]].T
        return out

    def predict(self, data: Dataset) -> np.ndarray:
        return np.argmax(self.log_joint(data), axis=1).astype(np.int64)


class KNearest:
    name = "knn"

    def __init__(self, k: int = 1):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k

    def fit(self, data: Dataset) -> "KNearest":
        if len(data) == 0:
            raise ValueError("cannot train on an empty dataset")
        self.mu = data.numeric.mean(axis=0)
        sd = data.numeric.std(axis=0)
        self.sd = np.where(sd > 0, sd, 1.0)
        self.train_num = (data.numeric - self.mu) / self.sd
        self.train_cat = data.categorical
        self.train_y = data.y
        self.n_classes = data.n_classes
        return self

    def predict(self, data: Dataset) -> np.ndarray:
        q = (data.numeric - self.mu) / self.sd
        dist = kernels.mixed_distances(q, self.train_num, data.categorical, self.train_cat)
        k = min(self.k, dist.shape[1])
        # stable sort: equal distances keep the smaller training index first
        nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]
        out = np.empty(len(data), dtype=np.int64)
        for i, idx in enumerate(nearest):
            out[i] = _majority(np.bincount(self.train_y[idx], minlength=self.n_classes))
        return out


CLASSIFIERS = {"tree": DecisionTree, "forest": RandomForest, "nb": NaiveBayes, "knn": KNearest}


def make_classifier(name: str, seed: int = 0, **params):
    if name not in CLASSIFIERS:
        raise ValueError(f"unknown classifier {name!r}; choose from {sorted(CLASSIFIERS)}")
    if name == "forest":
        params.setdefault("seed", seed)
    return CLASSIFIERS[name](**params)


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------


def stratified_folds(y, k: int = 10, seed: int = 0) -> list[np.ndarray]:
    """Deal each class's shuffled instances round-robin over ``k`` folds.

    The dealing position carries over from one class to the next, which
    keeps fold sizes within one of each other.
    """
    if k < 2:
        raise ValueError("need at least 2 folds")
    y = np.asarray(y, dtype=np.int64)
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    pos = 0
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        rng.shuffle(idx)
        for i in idx:
            folds[pos % k].append(int(i))
            pos += 1
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def prf(confusion: np.ndarray):
    """Per-class precision, recall and F from a (true x predicted) matrix."""
    confusion = np.asarray(confusion, dtype=np.float64)
    tp = np.diag(confusion)
    pred = confusion.sum(axis=0)
    true = confusion.sum(axis=1)
    precision = np.divide(tp, pred, out=np.zeros_like(tp), where=pred > 0)
    recall = np.divide(tp, true, out=np.zeros_like(tp), where=true > 0)
    denom = precision + recall
    f = np.divide(2 * precision * recall, denom, out=np.zeros_like(tp), where=denom > 0)
    return precision, recall, f


@dataclass
class EvaluationReport:
    classifier: str
    class_names: list
    confusion: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f: np.ndarray
    folds: int
    seed: int
    fold_seeds: list
    missing: dict  # fold -> class names absent from its test part

    @property
    def class_distribution(self) -> np.ndarray:
        return self.confusion.sum(axis=1)

    @property
    def macro_f(self) -> float:
        return float(np.mean(self.f))

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.confusion) / self.confusion.sum())

    def f_by_class(self) -> dict:
        return {c: float(v) for c, v in zip(self.class_names, self.f)}

    def to_text(self, header: dict | None = None) -> str:
        lines = ["# evaluation report"]
        for key, value in (header or {}).items():
            lines.append(f"# {key} = {value}")
        lines.append(f"# classifier = {self.classifier}")
        lines.append(f"# folds = {self.folds}, seed = {self.seed}, fold seeds = {self.fold_seeds}")
        lines.append("# metrics computed from the confusion matrix aggregated over all folds")
        for fold, names in sorted(self.missing.items()):
            lines.append(f"# fold {fold} lacks test instances of: {' '.join(names)}")
        lines.append("")
        width = max(12, max(len(c) for c in self.class_names) + 2)
        lines.append(f"{'class':<{width}}{'n':>7}{'precision':>11}{'recall':>9}{'F':>8}")
        for i, c in enumerate(self.class_names):
            lines.append(
                f"{c:<{width}}{int(self.class_distribution[i]):>7}{self.precision[i]:>11.4f}{self.recall[i]:>9.4f}{self.f[i]:>8.4f}"
            )
        lines.append(f"{'macro':<{width}}{int(self.confusion.sum()):>7}{'':>11}{'':>9}{self.macro_f:>8.4f}")
        lines.append("")
        lines.append("confusion (rows true, columns predicted):")
        lines.append(" ".join([" " * width] + [f"{c[:8]:>8}" for c in self.class_names]))
        for i, c in enumerate(self.class_names):
            lines.append(" ".join([f"{c:<{width}}"] + [f"{int(v):>8}" for v in self.confusion[i]]))
        return "\n".join(lines) + "\n"

    def to_table(self, delimiter: str = ",") -> str:
        lines = [delimiter.join(["class", "n", "precision", "recall", "f"])]
        for i, c in enumerate(self.class_names):
            lines.append(delimiter.join([c, str(int(self.class_distribution[i])), repr(float(self.precision[i])),
                                         repr(float(self.recall[i])), repr(float(self.f[i]))]))
        return "\n".join(lines) + "\n"


def cross_validate(data: Dataset, classifier: str = "tree", k: int = 10, seed: int = 0, **params) -> EvaluationReport:
    """Stratified k-fold CV; metrics from the aggregated confusion matrix.

    Fold ``i`` trains its model with seed ``seed + i``.
    """
    folds = stratified_folds(data.y, k, seed)
    n_cls = data.n_classes
    confusion = np.zeros((n_cls, n_cls), dtype=np.int64)
    all_idx = np.arange(len(data))
    missing = {}
    fold_seeds = []
    for i, test in enumerate(folds):
        fold_seeds.append(seed + i)
        if len(test) == 0:
            continue
        train = np.setdiff1d(all_idx, test, assume_unique=True)
        test_data = data.subset(test)
        absent = [data.class_names[c] for c in range(n_cls) if not np.any(test_data.y == c)]
        if absent:
            missing[i] = absent
        if len(train) == 0:
            continue
        model = make_classifier(classifier, seed=seed + i, **params).fit(data.subset(train))
        pred = model.predict(test_data)
        np.add.at(confusion, (test_data.y, pred), 1)
    p, r, f = prf(confusion)
    return EvaluationReport(classifier, list(data.class_names), confusion, p, r, f, k, seed, fold_seeds, missing)
