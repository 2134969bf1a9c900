"""Gompertz distribution core and the alternative families of the power study.

The Gompertz law GO(eta, b) has density b*eta*exp(eta + b*x - eta*e^(b*x))
and CDF 1 - exp(-eta*(e^(b*x) - 1)) on x >= 0. All samplers draw from
deterministic seed-indexed Philox streams (see rng.substream); the same seed
always reproduces the same sample, and families driven by plain uniforms
share those uniforms, which keeps couplings like Pow(1) == U(0,1) exact.
"""

import math
from dataclasses import dataclass

import numpy as np

from .rng import substream

__all__ = [
    "GompertzParams",
    "AlternativeSpec",
    "as_sample",
    "gompertz_pdf",
    "gompertz_cdf",
    "gompertz_quantile",
    "gompertz_sample",
    "alt_sample",
    "alt_pdf",
]


@dataclass(frozen=True)
class GompertzParams:
    """Shape eta > 0 and rate/scale b > 0 of a Gompertz law."""

    eta: float
    b: float

    def __post_init__(self):
        eta, b = float(self.eta), float(self.b)
        if not (math.isfinite(eta) and eta > 0):
            raise ValueError(f"eta must be a positive finite real, got {self.eta!r}")
        if not (math.isfinite(b) and b > 0):
            raise ValueError(f"b must be a positive finite real, got {self.b!r}")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "b", b)


def as_sample(values):
    """Validate and return a 1-d float array of strictly positive finite values."""
    x = np.atleast_1d(np.asarray(values, dtype=float))
    if x.ndim != 1 or x.size < 1:
        raise ValueError("sample must be a nonempty one-dimensional collection")
    if not np.all(np.isfinite(x)) or np.any(x <= 0.0):
        raise ValueError("sample values must be strictly positive and finite")
    return x


def gompertz_pdf(p, x):
    """Density of GO(p.eta, p.b); zero for x < 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        val = p.b * p.eta * np.exp(p.eta + p.b * x - p.eta * np.exp(p.b * x))
    out = np.where(x >= 0.0, val, 0.0)
    return out if out.ndim else float(out)


def gompertz_cdf(p, x):
    """CDF of GO(p.eta, p.b); zero for x < 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        val = -np.expm1(-p.eta * np.expm1(p.b * x))
    out = np.where(x >= 0.0, val, 0.0)
    return out if out.ndim else float(out)


def gompertz_quantile(p, u):
    """Inverse CDF: (1/b) * log(1 - log(1-u)/eta) for u in (0, 1)."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise ValueError("quantile argument must lie strictly inside (0, 1)")
    out = _gompertz_quantile_raw(p.eta, p.b, u)
    return out if out.ndim else float(out)


def _gompertz_quantile_raw(eta, b, u):
    # Kept as a division by b so samples with b and b' differ exactly by b'/b.
    return np.log1p(-np.log1p(-u) / eta) / b


def gompertz_sample(p, n, seed):
    """n i.i.d. GO(p.eta, p.b) draws by inverse transform, seed-deterministic."""
    if n < 1:
        raise ValueError("n must be at least 1")
    u = _positive_uniforms(substream(seed), n)
    return _gompertz_quantile_raw(p.eta, p.b, u)


# family name -> required parameter names
_FAMILIES = {
    "gompertz": ("eta", "b"),
    "lognormal": ("sigma",),
    "gamma": ("k",),
    "invgauss": ("mu", "lam"),
    "weibull": ("k",),
    "uniform": ("c",),
    "power": ("nu",),
    "shifted_pareto": ("nu",),
    "linear_failure": ("nu",),
    "mixture": ("p",),
}

_ALIASES = {
    "go": "gompertz",
    "ln": "lognormal",
    "ig": "invgauss",
    "w": "weibull",
    "u": "uniform",
    "pow": "power",
    "sp": "shifted_pareto",
    "lf": "linear_failure",
    "mix": "mixture",
}


class AlternativeSpec:
    """One of the study's distribution families with its parameters.

    Families and parameters:
        gompertz(eta, b), lognormal(sigma), gamma(k), invgauss(mu, lam),
        weibull(k), uniform(c), power(nu), shifted_pareto(nu),
        linear_failure(nu), mixture(p).

    mixture(p) is p * GO(1,1) + (1-p) * Gamma(5) with p in [0, 1]; every
    other parameter must be strictly positive. Short aliases (ln, ig, w, u,
    pow, sp, lf, mix, go) are accepted for the family name.
    """

    __slots__ = ("family", "params")

    def __init__(self, family, **params):
        name = _ALIASES.get(str(family).lower(), str(family).lower())
        if name not in _FAMILIES:
            raise ValueError(f"unknown distribution family {family!r}")
        required = _FAMILIES[name]
        if set(params) != set(required):
            raise ValueError(
                f"family {name!r} takes parameters {required}, got {tuple(params)}"
            )
        clean = {}
        for key in required:
            v = float(params[key])
            if not math.isfinite(v):
                raise ValueError(f"{name}.{key} must be finite, got {params[key]!r}")
            if name == "mixture" and key == "p":
                if not 0.0 <= v <= 1.0:
                    raise ValueError(f"mixture weight p must lie in [0, 1], got {v}")
            elif v <= 0.0:
                raise ValueError(f"{name}.{key} must be strictly positive, got {v}")
            clean[key] = v
        object.__setattr__(self, "family", name)
        object.__setattr__(self, "params", clean)

    def __setattr__(self, *_):
        raise AttributeError("AlternativeSpec is immutable")

    def __reduce__(self):
        # the immutable __setattr__ defeats default pickling; rebuild by ctor
        return (_spec_from_state, (self.family, self.params))

    def __eq__(self, other):
        return (
            isinstance(other, AlternativeSpec)
            and self.family == other.family
            and self.params == other.params
        )

    def __hash__(self):
        return hash((self.family, tuple(sorted(self.params.items()))))

    def __repr__(self):
        kw = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"AlternativeSpec({self.family!r}, {kw})"

    def label(self):
        """Compact text tag, e.g. 'gamma(3)' or 'gompertz(0.5,1)'."""
        args = ",".join(f"{v:g}" for v in self.params.values())
        return f"{self.family}({args})"


def _spec_from_state(family, params):
    return AlternativeSpec(family, **params)


def _positive_uniforms(gen, n):
    # random() can return exactly 0.0; nudge it off so inverse transforms stay > 0.
    u = gen.random(n)
    return np.maximum(u, np.finfo(float).tiny)


def _sample_invgauss(gen, n, mu, lam):
    # Michael-Schucany-Haas transformation: one chi-square root, one uniform.
    nu = gen.standard_normal(n) ** 2
    x = mu + mu * mu * nu / (2.0 * lam) - (mu / (2.0 * lam)) * np.sqrt(
        4.0 * mu * lam * nu + (mu * nu) ** 2
    )
    u = gen.random(n)
    return np.where(u <= mu / (mu + x), x, mu * mu / x)


def alt_sample(spec, n, seed):
    """n i.i.d. draws from the family in `spec`, seed-deterministic.

    Inverse-transform families consume one uniform per draw from the same
    stream gompertz_sample uses, so e.g. power(nu=1) reproduces uniform(c=1)
    draw for draw under a shared seed.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    gen = substream(seed)
    prm = spec.params
    fam = spec.family
    if fam == "gompertz":
        return _gompertz_quantile_raw(prm["eta"], prm["b"], _positive_uniforms(gen, n))
    if fam == "lognormal":
        return np.exp(prm["sigma"] * gen.standard_normal(n))
    if fam == "gamma":
        return gen.standard_gamma(prm["k"], n)
    if fam == "invgauss":
        return _sample_invgauss(gen, n, prm["mu"], prm["lam"])
    if fam == "weibull":
        u = _positive_uniforms(gen, n)
        return (-np.log1p(-u)) ** (1.0 / prm["k"])
    if fam == "uniform":
        return prm["c"] * _positive_uniforms(gen, n)
    if fam == "power":
        return _positive_uniforms(gen, n) ** prm["nu"]
    if fam == "shifted_pareto":
        u = _positive_uniforms(gen, n)
        return np.expm1(-np.log1p(-u) / prm["nu"])
    if fam == "linear_failure":
        # Invert the survival exp(-nu*(x^2/2 + x)): x^2 + 2x - 2w/nu = 0.
        w = -np.log1p(-_positive_uniforms(gen, n))
        t = 2.0 * w / prm["nu"]
        return t / (np.sqrt(1.0 + t) + 1.0)
    if fam == "mixture":
        pick = gen.random(n)
        go = _gompertz_quantile_raw(1.0, 1.0, _positive_uniforms(gen, n))
        gam = gen.standard_gamma(5.0, n)
        return np.where(pick < prm["p"], go, gam)
    raise AssertionError(f"unhandled family {fam}")


def alt_pdf(spec, x):
    """Density of the family in `spec`, evaluated elementwise; 0 outside support."""
    x = np.asarray(x, dtype=float)
    prm = spec.params
    fam = spec.family
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if fam == "gompertz":
            return gompertz_pdf(GompertzParams(prm["eta"], prm["b"]), x)
        if fam == "lognormal":
            s = prm["sigma"]
            val = np.exp(-np.log(x) ** 2 / (2.0 * s * s)) / (x * s * math.sqrt(2.0 * math.pi))
            inside = x > 0.0
        elif fam == "gamma":
            k = prm["k"]
            val = x ** (k - 1.0) * np.exp(-x) / math.gamma(k)
            inside = x > 0.0
        elif fam == "invgauss":
            mu, lam = prm["mu"], prm["lam"]
            val = np.sqrt(lam / (2.0 * math.pi * x**3)) * np.exp(
                -lam * (x - mu) ** 2 / (2.0 * mu * mu * x)
            )
            inside = x > 0.0
        elif fam == "weibull":
            k = prm["k"]
            val = k * x ** (k - 1.0) * np.exp(-(x**k))
            inside = x > 0.0
        elif fam == "uniform":
            val = np.full_like(x, 1.0 / prm["c"])
            inside = (x > 0.0) & (x < prm["c"])
        elif fam == "power":
            nu = prm["nu"]
            val = x ** (1.0 / nu - 1.0) / nu
            inside = (x > 0.0) & (x <= 1.0)
        elif fam == "shifted_pareto":
            nu = prm["nu"]
            val = nu * (x + 1.0) ** (-nu - 1.0)
            inside = x > 0.0
        elif fam == "linear_failure":
            nu = prm["nu"]
            val = nu * (x + 1.0) * np.exp(-nu * (x * x / 2.0 + x))
            inside = x > 0.0
        elif fam == "mixture":
            p = prm["p"]
            go = np.exp(1.0 + x - np.exp(x))
            gam = x**4 * np.exp(-x) / math.gamma(5.0)
            val = p * go + (1.0 - p) * gam
            inside = x > 0.0
        else:
            raise AssertionError(f"unhandled family {fam}")
    out = np.where(inside, val, 0.0)
    return out if out.ndim else float(out)
