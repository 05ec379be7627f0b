"""Simulated regression problems and airline-delay CSV ingestion.

The corrupted observation model draws a latent design X and responses
y = X beta + eps, but exposes Z = X + diag(u) W where u is a Bernoulli(pi)
row mask and W an independent noise matrix: a row is either observed clean
or with additive corruption.  Entries of X and W are i.i.d. N(0, sigma^2)
with the stated per-entry standard deviations.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParamsError, ParseError, SchemaError


@dataclass(frozen=True)
class Truth:
    """Latent components behind a simulated problem."""

    X: np.ndarray
    W: np.ndarray | None
    beta: np.ndarray
    corruption_mask: np.ndarray
    eps: np.ndarray
    sigma_x: float
    sigma_w: float
    sigma_eps: float
    pi: float


@dataclass(frozen=True)
class RegressionProblem:
    """Observed design and response, plus the generating truth if simulated."""

    Z: np.ndarray
    y: np.ndarray
    truth: Truth | None = None

    @property
    def n(self):
        return self.Z.shape[0]

    @property
    def p(self):
        return self.Z.shape[1]


@dataclass(frozen=True)
class SplitProblem:
    """Train/test pair with disjoint rows sharing one coefficient vector."""

    train: RegressionProblem
    test: RegressionProblem


def _check_scales(pi, sigma_x, sigma_w, sigma_eps):
    if not 0.0 <= pi <= 1.0:
        raise InvalidParamsError(f"need 0 <= pi <= 1, got {pi}")
    for name, val in (("sigma_x", sigma_x), ("sigma_w", sigma_w), ("sigma_eps", sigma_eps)):
        if val < 0:
            raise InvalidParamsError(f"need {name} >= 0, got {val}")


def _assemble_corrupted(rng, n, p, pi, sigma_x, sigma_w, sigma_eps, beta):
    X = rng.standard_normal((n, p)) * sigma_x
    W = rng.standard_normal((n, p)) * sigma_w
    mask = rng.random(n) < pi
    eps = rng.standard_normal(n) * sigma_eps
    Z = X + mask[:, None] * W
    y = X @ beta + eps
    truth = Truth(X, W, beta, mask, eps, sigma_x, sigma_w, sigma_eps, pi)
    return RegressionProblem(Z, y, truth)


def gen_corrupted(n, p, pi, sigma_x, sigma_w, sigma_eps, seed):
    """Corrupted-observation problem with i.i.d. Gaussian components.

    beta is standard normal; Z = X + diag(u) W and y = X beta + eps are
    exact functions of the stored truth.  Deterministic in ``seed``.
    """
    if n < 1 or p < 1:
        raise InvalidParamsError(f"need n, p >= 1, got n={n}, p={p}")
    _check_scales(pi, sigma_x, sigma_w, sigma_eps)
    rng = np.random.default_rng(seed)
    beta = rng.standard_normal(p)
    return _assemble_corrupted(rng, n, p, pi, sigma_x, sigma_w, sigma_eps, beta)


def gen_corrupted_split(
    n_train, n_test, p, pi, sigma_x, sigma_w, sigma_eps, seed, corrupt_test=False
):
    """Train/test corrupted problems sharing one beta.

    Test covariates are clean by default so test RMSE measures the fit
    against the true signal; pass corrupt_test=True to corrupt them with
    the same mechanism as the training rows.
    """
    if n_train < 1 or n_test < 1 or p < 1:
        raise InvalidParamsError("need positive n_train, n_test, p")
    _check_scales(pi, sigma_x, sigma_w, sigma_eps)
    rng = np.random.default_rng(seed)
    beta = rng.standard_normal(p)
    train = _assemble_corrupted(rng, n_train, p, pi, sigma_x, sigma_w, sigma_eps, beta)
    test_pi = pi if corrupt_test else 0.0
    test = _assemble_corrupted(rng, n_test, p, test_pi, sigma_x, sigma_w, sigma_eps, beta)
    return SplitProblem(train, test)


GAUSSIAN = "gaussian"
T3 = "t3"
T1 = "t1"
REGIMES = (GAUSSIAN, T3, T1)

_REGIME_DF = {GAUSSIAN: None, T3: 3, T1: 1}

REGIME_SIGMA_EPS = 0.1


def _regime_rows(rng, n, p, regime):
    X = rng.standard_normal((n, p))
    df = _REGIME_DF[regime]
    if df is not None:
        # multivariate-t rows: Gaussian over sqrt(chi2/df), per row
        X = X / np.sqrt(rng.chisquare(df, n) / df)[:, None]
    return X


def gen_leverage_regime(n, p, regime, seed):
    """Uncorrupted problem whose leverage profile is set by the row law.

    gaussian gives near-uniform leverages, t3 mildly heavy tails, t1
    Cauchy-like rows with a few dominant leverage scores.  The response is
    y = X beta + eps with sigma_eps = 0.1 and standard-normal beta.
    """
    if regime not in REGIMES:
        raise InvalidParamsError(f"unknown regime {regime!r}; expected one of {REGIMES}")
    if n <= p:
        raise InvalidParamsError(f"need n > p, got n={n}, p={p}")
    rng = np.random.default_rng(seed)
    beta = rng.standard_normal(p)
    X = _regime_rows(rng, n, p, regime)
    eps = rng.standard_normal(n) * REGIME_SIGMA_EPS
    truth = Truth(
        X, None, beta, np.zeros(n, dtype=bool), eps, 1.0, 0.0, REGIME_SIGMA_EPS, 0.0
    )
    return RegressionProblem(X, X @ beta + eps, truth)


def gen_regime_split(n_train, n_test, p, regime, seed):
    """Train/test pair from one leverage regime, shared beta."""
    if regime not in REGIMES:
        raise InvalidParamsError(f"unknown regime {regime!r}; expected one of {REGIMES}")
    if n_train <= p or n_test < 1:
        raise InvalidParamsError("need n_train > p and n_test >= 1")
    rng = np.random.default_rng(seed)
    beta = rng.standard_normal(p)
    parts = []
    for n in (n_train, n_test):
        X = _regime_rows(rng, n, p, regime)
        eps = rng.standard_normal(n) * REGIME_SIGMA_EPS
        truth = Truth(
            X, None, beta, np.zeros(n, dtype=bool), eps, 1.0, 0.0, REGIME_SIGMA_EPS, 0.0
        )
        parts.append(RegressionProblem(X, X @ beta + eps, truth))
    return SplitProblem(parts[0], parts[1])


class OneHotPairEncoder:
    """One-hot encoding of origin-destination pairs, learned on train rows.

    Pairs unseen at fit time map to the all-zero code.
    """

    def __init__(self):
        self.index = {}

    def fit(self, pairs):
        self.index = {}
        for pair in pairs:
            if pair not in self.index:
                self.index[pair] = len(self.index)
        return self

    @property
    def n_pairs(self):
        return len(self.index)

    def transform(self, pairs):
        out = np.zeros((len(pairs), len(self.index)))
        for row, pair in enumerate(pairs):
            col = self.index.get(pair)
            if col is not None:
                out[row, col] = 1.0
        return out

    def to_dict(self):
        return dict(self.index)

    @classmethod
    def from_dict(cls, mapping):
        enc = cls()
        enc.index = dict(mapping)
        return enc


AIRLINE_REQUIRED_COLUMNS = ("Origin", "Dest", "Distance", "ArrDelay")


def _parse_airline_rows(path):
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError("file is empty; expected a header row", AIRLINE_REQUIRED_COLUMNS)
        missing = [c for c in AIRLINE_REQUIRED_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"missing required columns: {missing}", missing)
        for record in reader:
            line_no = reader.line_num
            distance = (record["Distance"] or "").strip()
            delay = (record["ArrDelay"] or "").strip()
            if delay in ("", "NA") or distance in ("", "NA"):
                continue  # rows without a usable response or distance are dropped
            try:
                rows.append(
                    (record["Origin"], record["Dest"], float(distance), float(delay))
                )
            except ValueError as err:
                raise ParseError(f"line {line_no}: {err}", line_no) from err
    return rows


def load_airline_csv(path, n_train, n_test):
    """Load a flight-delay CSV into a train/test regression split.

    Features are a one-hot code over origin-destination pairs (learned from
    the training rows only; unseen pairs in test map to all zeros) plus the
    flight distance standardized by the training mean/sd.  Rows keep file
    order, so the split is temporal: first n_train rows train, next n_test
    test.  The response is the arrival delay in minutes.
    """
    rows = _parse_airline_rows(path)
    if len(rows) < n_train + n_test:
        raise InvalidParamsError(
            f"file has {len(rows)} usable rows, need n_train + n_test = {n_train + n_test}"
        )
    train_rows = rows[:n_train]
    test_rows = rows[n_train : n_train + n_test]
    encoder = OneHotPairEncoder().fit([(r[0], r[1]) for r in train_rows])

    def build(split_rows, mean, sd):
        pairs = [(r[0], r[1]) for r in split_rows]
        distance = np.array([r[2] for r in split_rows])
        delay = np.array([r[3] for r in split_rows])
        Z = np.column_stack([encoder.transform(pairs), (distance - mean) / sd])
        return RegressionProblem(Z, delay)

    train_distance = np.array([r[2] for r in train_rows])
    mean = float(train_distance.mean())
    sd = float(train_distance.std())
    if sd == 0.0:
        sd = 1.0
    return SplitProblem(build(train_rows, mean, sd), build(test_rows, mean, sd))
