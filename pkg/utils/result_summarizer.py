"""
Summaries of sampled results: weighted moments, quantiles, effective sample
size and distances between discrete distributions.
"""
from collections import defaultdict
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

QUANTILE_LEVELS = (0.05, 0.25, 0.5, 0.75, 0.95)


class ResultSummarizer:
    """Turns sample arrays into the per-target summaries reported by queries"""

    def __init__(self, quantile_levels: Sequence[float] = QUANTILE_LEVELS):
        self.quantile_levels = tuple(quantile_levels)

    def summarize(
        self,
        samples: np.ndarray,
        weights: Optional[np.ndarray],
        names: Sequence[str],
    ) -> Dict[str, Dict[str, object]]:
        """
        Summarize each column of ``samples``.

        Args:
            samples: Array of shape (n, len(names))
            weights: Nonnegative weights of length n, or None for equal weights
            names: Column names

        Returns:
            Dict name -> {mean, variance, std, quantiles}
        """
        samples = np.asarray(samples, dtype=float).reshape(len(samples), len(names))
        w = self._weights(weights, len(samples))
        summary = {}
        for j, name in enumerate(names):
            column = samples[:, j]
            mean = float(np.dot(w, column))
            variance = float(np.dot(w, (column - mean) ** 2))
            summary[name] = {
                "mean": mean,
                "variance": variance,
                "std": float(np.sqrt(variance)),
                "quantiles": {
                    f"q{int(round(level * 100)):02d}": self.quantile(column, w, level)
                    for level in self.quantile_levels
                },
            }
        return summary

    @staticmethod
    def _weights(weights: Optional[np.ndarray], n: int) -> np.ndarray:
        if weights is None:
            return np.full(n, 1.0 / n)
        w = np.asarray(weights, dtype=float)
        return w / w.sum()

    @staticmethod
    def quantile(values: np.ndarray, weights: np.ndarray, level: float) -> float:
        order = np.argsort(values, kind="stable")
        v = values[order]
        w = weights[order]
        cumulative = np.cumsum(w) - 0.5 * w
        return float(np.interp(level, cumulative, v))

    @staticmethod
    def effective_sample_size(chain: np.ndarray) -> float:
        """
        ESS of a 1-d chain from its autocorrelation, truncated by Geyer's
        initial monotone sequence.
        """
        x = np.asarray(chain, dtype=float)
        n = len(x)
        if n < 4:
            return float(n)
        x = x - x.mean()
        if not np.any(x):
            return float(n)
        spectrum = np.fft.rfft(x, 2 * n)
        acf = np.fft.irfft(spectrum * np.conj(spectrum))[:n]
        acf = acf / acf[0]

        pair_sums = acf[0:n - 1:2] + acf[1:n:2]
        total = 0.0
        previous = np.inf
        for gamma in pair_sums:
            if gamma <= 0:
                break
            gamma = min(gamma, previous)
            total += gamma
            previous = gamma
        tau = max(2.0 * total - 1.0, 1.0 / n)
        return float(min(n, n / tau))

    @staticmethod
    def empirical_pmf(rows: np.ndarray, weights: Optional[np.ndarray] = None) -> Dict[Tuple[float, ...], float]:
        rows = np.asarray(rows, dtype=float)
        w = ResultSummarizer._weights(weights, len(rows))
        pmf: Dict[Tuple[float, ...], float] = defaultdict(float)
        for row, weight in zip(map(tuple, rows.tolist()), w):
            pmf[row] += float(weight)
        return dict(pmf)

    @staticmethod
    def total_variation(p: Mapping[Tuple, float], q: Mapping[Tuple, float]) -> float:
        keys = set(p) | set(q)
        return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


# Singleton instance
_summarizer = None


def get_summarizer() -> ResultSummarizer:
    """Get or create singleton summarizer instance"""
    global _summarizer
    if _summarizer is None:
        _summarizer = ResultSummarizer()
    return _summarizer
