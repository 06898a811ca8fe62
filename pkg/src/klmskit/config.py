"""Experiment configuration: a flat text format with dotted keys.

One `key = value` pair per line; blank lines and `#` comments are ignored.
Unknown and duplicate keys are errors, and validation reports the complete
list of violations rather than stopping at the first.

Keys (defaults in brackets; system-dependent defaults listed as ex1/ex2):

  system                   example1 | example2            (required)
  system.noise_variance    observation noise power        [1e-4 / 1e-6]
  kernel.xi                Gaussian kernel width          [0.02 / 0.05]
  filter.eta               step size                      [0.01 / 0.05]
  filter.mu0               coherence threshold            [0.01]
  reg.kind                 none | l1 | adaptive_l1        [none]
  reg.lambda               penalty weight                 [0.0]
  reg.epsilon_alpha        adaptive reweighting floor     [0.01]
  input.segments           e.g. "20000 @ 0.35, 20000 @ 0.15"   (required)
  dictionary.mode          fixed | learned                [fixed]
  dictionary.spec          per-segment, ';' between segments, '+' between
                           blocks: "10 @ 0.35 ; 10 @ 0.15 + 10 @ 0.35"
                           (required when mode=fixed)
  dictionary.shape         iid | process                  [iid / process]
  model.enabled            true | false                   [false]
  model.L                  matched-element counts, one per segment,
                           e.g. "10, 0"                   [auto from sigmas]
  model.moment_samples     stream length for moment estimation  [2000000]
  mc.runs                  Monte Carlo runs               [200]
  mc.seed                  root seed                      [0]
  output.path              output directory               [.]
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .fobos import RegularizerSpec

__all__ = ["ExperimentConfig", "ConfigError", "validate_config", "load_config"]


class ConfigError(ValueError):
    """Carries the complete list of configuration violations."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass
class ExperimentConfig:
    system: str
    noise_variance: float
    xi: float
    eta: float
    mu0: float
    reg: RegularizerSpec
    segments: list
    dictionary_mode: str
    dictionary_spec: Optional[list]
    dictionary_shape: str
    model_enabled: bool
    model_L: Optional[list]
    moment_samples: int
    mc_runs: int
    mc_seed: int
    output_path: str


_KNOWN = (
    "system",
    "system.noise_variance",
    "kernel.xi",
    "filter.eta",
    "filter.mu0",
    "reg.kind",
    "reg.lambda",
    "reg.epsilon_alpha",
    "input.segments",
    "dictionary.mode",
    "dictionary.spec",
    "dictionary.shape",
    "model.enabled",
    "model.L",
    "model.moment_samples",
    "mc.runs",
    "mc.seed",
    "output.path",
)


def _scan(text: str):
    """Split raw text into a {key: (value, line)} map, catching syntax
    problems and duplicates."""
    entries = {}
    errors = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            errors.append(f"line {lineno}: empty key")
            continue
        if key in entries:
            errors.append(
                f"line {lineno}: duplicate key '{key}' (already set on line {entries[key][1]})"
            )
            continue
        entries[key] = (value, lineno)
    return entries, errors


def _parse_pair_list(value: str, what: str):
    """Parse 'count @ sigma' items separated by commas."""
    out = []
    for item in value.split(","):
        item = item.strip()
        if "@" not in item:
            raise ValueError(f"{what}: expected 'count @ sigma', got {item!r}")
        left, right = item.split("@", 1)
        count = int(left.strip())
        sigma = float(right.strip())
        out.append((count, sigma))
    return out


def _parse_dict_spec(value: str):
    """';' separates per-segment dictionaries, '+' concatenates blocks."""
    segments = []
    for seg in value.split(";"):
        blocks = []
        for block in seg.split("+"):
            block = block.strip()
            if "@" not in block:
                raise ValueError(f"expected 'count @ sigma', got {block!r}")
            left, right = block.split("@", 1)
            blocks.append((int(left.strip()), float(right.strip())))
        segments.append(blocks)
    return segments


def _sigma_close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=0.0)


def validate_config(raw: str) -> ExperimentConfig:
    """Parse and validate raw config text into a fully defaulted
    ExperimentConfig. Raises ConfigError carrying every violation found."""
    entries, errors = _scan(raw)
    for key in entries:
        if key not in _KNOWN:
            errors.append(f"line {entries[key][1]}: unknown key '{key}'")

    def take(key, parse, check=None, default=None):
        """Parse one key if present; append an error and fall back to the
        default otherwise."""
        if key not in entries:
            return default
        value, lineno = entries[key]
        try:
            parsed = parse(value)
        except ValueError as exc:
            errors.append(f"line {lineno}: {key}: {exc}")
            return default
        if check is not None:
            problem = check(parsed)
            if problem:
                errors.append(f"line {lineno}: {key} {problem}")
                return default
        return parsed

    def choice(options):
        def parse(value):
            if value not in options:
                raise ValueError(f"must be one of {', '.join(options)}; got {value!r}")
            return value

        return parse

    def boolean(value):
        if value.lower() in ("true", "false"):
            return value.lower() == "true"
        raise ValueError(f"must be true or false; got {value!r}")

    system = take("system", choice(("example1", "example2")))
    if system is None and "system" not in entries:
        errors.append("system is required")
    ex2 = system == "example2"

    noise_variance = take(
        "system.noise_variance",
        float,
        lambda v: None if v >= 0 else "must be nonnegative",
        default=1e-6 if ex2 else 1e-4,
    )
    xi = take(
        "kernel.xi", float, lambda v: None if v > 0 else "must be positive",
        default=0.05 if ex2 else 0.02,
    )
    eta = take(
        "filter.eta", float, lambda v: None if v > 0 else "must be positive",
        default=0.05 if ex2 else 0.01,
    )
    mu0 = take(
        "filter.mu0", float,
        lambda v: None if 0 <= v < 1 else "must lie in [0, 1)",
        default=0.01,
    )
    reg_kind = take("reg.kind", choice(("none", "l1", "adaptive_l1")), default="none")
    reg_lambda = take(
        "reg.lambda", float, lambda v: None if v >= 0 else "must be nonnegative",
        default=0.0,
    )
    reg_eps = take(
        "reg.epsilon_alpha", float, lambda v: None if v > 0 else "must be positive",
        default=1e-2,
    )
    segments = take(
        "input.segments",
        lambda v: _parse_pair_list(v, "input.segments"),
        lambda segs: (
            None
            if all(length >= 1 and sigma > 0 for length, sigma in segs)
            else "needs positive lengths and sigmas"
        ),
    )
    if "input.segments" not in entries:
        errors.append("input.segments is required")
    mode = take("dictionary.mode", choice(("fixed", "learned")), default="fixed")
    dict_spec = take(
        "dictionary.spec",
        _parse_dict_spec,
        lambda spec: (
            None
            if all(c >= 1 and s > 0 for blocks in spec for c, s in blocks)
            else "needs positive counts and sigmas"
        ),
    )
    shape = take(
        "dictionary.shape", choice(("iid", "process")),
        default="process" if ex2 else "iid",
    )
    model_enabled = take("model.enabled", boolean, default=False)
    model_L = take(
        "model.L",
        lambda v: [int(part.strip()) for part in v.split(",")],
        lambda ls: None if all(l >= 0 for l in ls) else "entries must be nonnegative",
    )
    moment_samples = take(
        "model.moment_samples", int,
        lambda v: None if v >= 1000 else "must be at least 1000",
        default=2_000_000,
    )
    mc_runs = take(
        "mc.runs", int, lambda v: None if v >= 1 else "must be at least 1", default=200
    )
    mc_seed = take("mc.seed", int, default=0)
    output_path = take("output.path", str, default=".")

    # cross-field constraints
    if shape == "process" and system == "example1":
        errors.append("dictionary.shape = process requires system = example2")
    if mode == "fixed":
        if dict_spec is None and "dictionary.spec" not in entries:
            errors.append("dictionary.spec is required when dictionary.mode = fixed")
        if dict_spec is not None and segments is not None and len(dict_spec) != len(segments):
            errors.append(
                f"dictionary.spec has {len(dict_spec)} segment(s) but input.segments has "
                f"{len(segments)}"
            )
    else:
        if "dictionary.spec" in entries:
            errors.append("dictionary.spec requires dictionary.mode = fixed")
        if model_enabled:
            errors.append("model.enabled requires dictionary.mode = fixed")
    if model_L is not None and not model_enabled:
        errors.append("model.L requires model.enabled = true")
    if model_enabled and ex2 and shape == "iid":
        errors.append(
            "model.enabled with system = example2 requires dictionary.shape = process "
            "(matched elements must share the input distribution)"
        )
    if (
        model_enabled
        and dict_spec is not None
        and segments is not None
        and len(dict_spec) == len(segments)
    ):
        if model_L is not None and len(model_L) != len(segments):
            errors.append(
                f"model.L has {len(model_L)} entries but there are {len(segments)} segments"
            )
        for k, (blocks, (_, sigma)) in enumerate(zip(dict_spec, segments)):
            M = sum(c for c, _ in blocks)
            mismatched = {s for _, s in blocks if not _sigma_close(s, sigma)}
            if len(mismatched) > 1:
                errors.append(
                    f"dictionary.spec segment {k + 1}: the model supports at most one "
                    "mismatched element class per segment"
                )
            if model_L is not None and len(model_L) == len(segments) and model_L[k] > M:
                errors.append(
                    f"model.L[{k}] = {model_L[k]} exceeds the segment's dictionary size {M}"
                )

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        system=system,
        noise_variance=noise_variance,
        xi=xi,
        eta=eta,
        mu0=mu0,
        reg=RegularizerSpec(kind=reg_kind, lam=reg_lambda, epsilon_alpha=reg_eps),
        segments=segments,
        dictionary_mode=mode,
        dictionary_spec=dict_spec if mode == "fixed" else None,
        dictionary_shape=shape,
        model_enabled=model_enabled,
        model_L=model_L,
        moment_samples=moment_samples,
        mc_runs=mc_runs,
        mc_seed=mc_seed,
        output_path=output_path,
    )


def load_config(path) -> ExperimentConfig:
    """Read and validate a config file."""
    with open(path, "r", encoding="utf-8") as handle:
        return validate_config(handle.read())
