"""Bundled model instances used by the test suite, the CLI docs, and the demos."""

from importlib import resources
from pathlib import Path

from ..model import FsMacSpec, load_spec

NAMES = (
    "mod2-adder-noiseless",
    "mod2-adder-bsc01",
    "stateless-mac",
    "null-channel",
)


def spec_path(name: str) -> Path:
    """Filesystem path of a bundled spec (without the .json suffix)."""
    if name not in NAMES:
        raise KeyError(f"unknown bundled spec {name!r}, have {NAMES}")
    return Path(str(resources.files(__package__).joinpath(f"{name}.json")))


def load(name: str) -> FsMacSpec:
    return load_spec(spec_path(name))
