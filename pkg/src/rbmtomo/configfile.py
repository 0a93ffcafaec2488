"""Line-oriented ``key = value`` run configuration.

One flat namespace covers the sweep grid, trainer hyperparameters,
estimator settings, and prune schedule; command-line flags override file
values.  Unknown keys are rejected so typos fail loudly.
"""

from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .estimator import EstimatorConfig
from .pruning import PruneSchedule
from .rbm import TrainConfig
from .sweeps import SweepConfig


def _to_int(text: str) -> int:
    return int(text)


def _to_float(text: str) -> float:
    return float(text)


def _to_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _to_int_list(text: str) -> tuple:
    return tuple(int(tok) for tok in text.replace(",", " ").split())


def _to_float_list(text: str) -> tuple:
    return tuple(float(tok) for tok in text.replace(",", " ").split())


# key -> (section, converter); sections name the dataclass the key feeds
_SCHEMA = {
    "qubit_sizes": ("sweep", _to_int_list),
    "field_ratios": ("sweep", _to_float_list),
    "coupling": ("sweep", _to_float),
    "hidden_start": ("sweep", _to_int),
    "hidden_step": ("sweep", _to_int),
    "hidden_max": ("sweep", _to_int),
    "sample_start": ("sweep", _to_int),
    "sample_step": ("sweep", _to_int),
    "sample_max": ("sweep", _to_int),
    "alpha_ratio": ("sweep", _to_float),
    "repeats": ("sweep", _to_int),
    "pool_size": ("sweep", _to_int),
    "epoch_budget": ("sweep", _to_int),
    "check_every": ("sweep", _to_int),
    "threshold": ("sweep", _to_float),
    "learning_rate": ("train", _to_float),
    "batch_size": ("train", _to_int),
    "cd_steps": ("train", _to_int),
    "init_scale": ("train", _to_float),
    "momentum": ("train", _to_float),
    "n_samples": ("estimator", _to_int),
    "n_chains": ("estimator", _to_int),
    "burn_in": ("estimator", _to_int),
    "keep_every": ("estimator", _to_int),
    "confidence_c": ("estimator", _to_float),
    "first_fraction": ("prune", _to_float),
    "later_fraction": ("prune", _to_float),
    "finetune_epoch_budget": ("prune", _to_int),
    "finetune_check_every": ("prune", _to_int),
    "retry_failed_once": ("prune", _to_bool),
    "seed": ("run", _to_int),
    "workers": ("run", _to_int),
}


@dataclass(frozen=True)
class RunSettings:
    sweep: SweepConfig
    train: TrainConfig  # template; epochs and seed are set per run
    estimator: EstimatorConfig
    prune: PruneSchedule
    seed: int = 0
    workers: int = 1

    def as_items(self) -> list:
        """Flat sorted (key, value-string) pairs; writing them back to a
        config file reproduces these settings exactly."""
        out = {}
        for key, (section, _) in _SCHEMA.items():
            if section == "sweep":
                val = getattr(self.sweep, key)
            elif section == "train":
                val = getattr(self.train, key)
            elif section == "estimator":
                val = getattr(self.estimator, key)
            elif section == "prune":
                attr = {
                    "threshold": "criterion_threshold",
                    "finetune_check_every": "check_every",
                }.get(key, key)
                val = getattr(self.prune, attr)
            else:
                val = getattr(self, key)
            if isinstance(val, tuple):
                out[key] = ",".join(repr(v) if isinstance(v, float) else str(v) for v in val)
            elif isinstance(val, bool):
                out[key] = "true" if val else "false"
            elif isinstance(val, float):
                out[key] = repr(val)
            else:
                out[key] = str(val)
        return sorted(out.items())


def parse_config_file(path) -> dict:
    """Read ``key = value`` lines; '#' starts a comment, blanks ignored."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def build_settings(raw: dict) -> RunSettings:
    """Typed settings from a flat string map; rejects unknown keys."""
    sections = {"sweep": {}, "train": {}, "estimator": {}, "prune": {}, "run": {}}
    for key, text in raw.items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown config key: {key!r}")
        section, convert = _SCHEMA[key]
        try:
            sections[section][key] = convert(str(text))
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {text!r} ({exc})") from exc

    prune_kwargs = dict(sections["prune"])
    if "finetune_check_every" in prune_kwargs:
        prune_kwargs["check_every"] = prune_kwargs.pop("finetune_check_every")
    if "threshold" in sections["sweep"]:
        prune_kwargs.setdefault(
            "criterion_threshold", sections["sweep"]["threshold"]
        )
    try:
        return RunSettings(
            sweep=SweepConfig(**sections["sweep"]),
            train=TrainConfig(epochs=1, **sections["train"]),
            estimator=EstimatorConfig(**sections["estimator"]),
            prune=PruneSchedule(**prune_kwargs),
            **sections["run"],
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def load_settings(config_path=None, overrides=None) -> RunSettings:
    """File values (if any) overlaid with explicit overrides."""
    raw = parse_config_file(config_path) if config_path else {}
    for key, val in (overrides or {}).items():
        if val is not None:
            raw[key] = str(val)
    return build_settings(raw)
