"""Monte Carlo verdicts: empirical Laplace transforms, reference CDFs,
Kolmogorov-Smirnov tests and the paired-coordinate independence check.

Reports are small serializable records; alpha defaults to 0.01 with
Bonferroni correction applied by the suites across per-coordinate tests.
"""

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import special, stats as sps

from .errors import DomainViolation, EmptySample

DEFAULT_ALPHA = 0.01


@dataclass
class TestReport:
    name: str
    statistic: float
    p_value: float | None
    n: int
    verdict: str               # "pass" | "fail"
    tolerance: str

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    def line(self) -> str:
        p = "-" if self.p_value is None else f"{self.p_value:.4g}"
        return f"[{self.verdict.upper():4s}] {self.name}: stat={self.statistic:.4g} p={p} n={self.n} ({self.tolerance})"


def empirical_laplace(samples, lam):
    """Sample mean and standard error of exp(-<lam, beta>) over beta samples."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise EmptySample("no samples")
    if samples.ndim == 1:
        samples = samples[:, None]
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    vals = np.exp(-(samples @ lam))
    m = vals.shape[0]
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return mean, se


def _check_positive_x(x):
    x = np.asarray(x, dtype=float)
    if (x <= 0).any():
        raise DomainViolation("x must be positive")
    return x


def ig_cdf(mu: float, shape: float, x):
    """Inverse-Gaussian CDF (mean mu, shape lambda) via the Gaussian composition.

    The exp(2*lambda/mu) factor is folded into log space to survive large
    shape/mean ratios.
    """
    if mu <= 0 or shape <= 0:
        raise DomainViolation("mu and shape must be positive")
    x = _check_positive_x(x)
    r = np.sqrt(shape / x)
    a = special.ndtr(r * (x / mu - 1.0))
    b = np.exp(2.0 * shape / mu + special.log_ndtr(-r * (x / mu + 1.0)))
    out = np.clip(a + b, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def gamma_cdf(shape: float, rate: float, x):
    """Regularized lower incomplete gamma at rate*x."""
    if shape <= 0 or rate <= 0:
        raise DomainViolation("shape and rate must be positive")
    x = _check_positive_x(x)
    out = special.gammainc(shape, rate * x)
    return float(out) if out.ndim == 0 else out


def ks_one_sample(samples, cdf, alpha: float = DEFAULT_ALPHA, name: str = "ks1") -> TestReport:
    """One-sample KS against a vectorized reference CDF."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise EmptySample("no samples")
    res = sps.kstest(samples, cdf)
    verdict = "pass" if res.pvalue > alpha else "fail"
    return TestReport(name, float(res.statistic), float(res.pvalue), samples.size, verdict,
                      f"KS alpha={alpha}")


def ks_two_sample(a, b, alpha: float = DEFAULT_ALPHA, name: str = "ks2") -> TestReport:
    """Two-sample KS; symmetric in its arguments."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise EmptySample("no samples")
    res = sps.ks_2samp(a, b, method="asymp")
    verdict = "pass" if res.pvalue > alpha else "fail"
    return TestReport(name, float(res.statistic), float(res.pvalue), a.size + b.size, verdict,
                      f"two-sample KS alpha={alpha}")


def se_band_report(name: str, value: float, target: float, se: float, n: int,
                   k: float = 3.0) -> TestReport:
    """Pass iff |value - target| <= k standard errors (k-sigma band)."""
    dev = abs(value - target)
    verdict = "pass" if dev <= k * se or dev == 0.0 else "fail"
    stat = dev / se if se > 0 else (0.0 if dev == 0.0 else math.inf)
    return TestReport(name, stat, None, n, verdict, f"|dev| <= {k} s.e.")


def independence_check(b_i, b_j, lambda1: float, lambda2: float,
                       k: float = 3.0, name: str = "independence") -> TestReport:
    """Compare E[e^{-l1 bi - l2 bj}] with the product of marginal means.

    The difference's standard error comes from the delta method (influence
    function of the covariance-style statistic). Pass iff within k s.e.
    """
    b_i = np.asarray(b_i, dtype=float)
    b_j = np.asarray(b_j, dtype=float)
    if b_i.size == 0 or b_i.shape != b_j.shape:
        raise EmptySample("paired samples required")
    x = np.exp(-lambda1 * b_i)
    y = np.exp(-lambda2 * b_j)
    mx, my = x.mean(), y.mean()
    diff = float((x * y).mean() - mx * my)
    infl = x * y - my * x - mx * y
    se = float(infl.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return se_band_report(name, diff, 0.0, se, x.size, k=k)


def bonferroni(reports, alpha: float = DEFAULT_ALPHA):
    """Re-verdict a family of p-value reports at alpha / family size."""
    m = len(reports)
    out = []
    for r in reports:
        if r.p_value is None:
            out.append(r)
            continue
        verdict = "pass" if r.p_value > alpha / m else "fail"
        out.append(TestReport(r.name, r.statistic, r.p_value, r.n, verdict,
                              f"KS alpha={alpha}/{m} (Bonferroni)"))
    return out


def write_reports(path, reports):
    """One JSON object per line."""
    with open(path, "w") as fh:
        for r in reports:
            fh.write(r.to_json() + "\n")
