"""Flat key=value configuration: parsing, formatting, and the two typed
views (model shape vs training loop)."""

from dataclasses import dataclass, fields

from .errors import ConfigError


def parse_flat(text):
    """Parse "key=value" lines; '#' starts a comment, blanks are skipped."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("line %d: expected key=value, got %r" % (lineno, raw))
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError("line %d: empty key" % lineno)
        if key in out:
            raise ConfigError("line %d: duplicate key %r" % (lineno, key))
        out[key] = value.strip()
    return out


def format_flat(mapping):
    return "".join("%s=%s\n" % (k, mapping[k]) for k in sorted(mapping))


def load_flat(path):
    with open(path, encoding="utf-8") as fh:
        return parse_flat(fh.read())


def save_flat(mapping, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_flat(mapping))


def _get(mapping, key, cast, default):
    if key not in mapping:
        if default is None:
            raise ConfigError("missing required config key %r" % key)
        return default
    try:
        return cast(mapping[key])
    except ValueError as exc:
        raise ConfigError("config key %r: %s" % (key, exc)) from None


@dataclass
class ModelConfig:
    """Structural hyperparameters of the network."""
    word_vocab: int
    char_vocab: int = 69
    embed_dim: int = 200
    hidden: int = 256
    filters: int = 5
    widths: tuple = (2, 3, 4, 5)
    char_window: int = 40
    word_window: int = 5
    dropout: float = 0.3

    def __post_init__(self):
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must be in [0,1), got %r" % self.dropout)
        for name in ("word_vocab", "char_vocab", "embed_dim", "hidden",
                     "filters", "char_window", "word_window"):
            if getattr(self, name) < 1:
                raise ConfigError("%s must be positive" % name)
        if self.word_vocab < 4:
            raise ConfigError("word_vocab must cover the 4 reserved tokens")
        self.widths = tuple(int(w) for w in self.widths)
        if not self.widths or max(self.widths) > self.char_window:
            raise ConfigError("filter widths %r do not fit char window %d"
                              % (self.widths, self.char_window))

    @classmethod
    def from_flat(cls, mapping):
        widths = tuple(
            int(w) for w in _get(mapping, "widths", str, "2,3,4,5").split(","))
        return cls(
            word_vocab=_get(mapping, "word_vocab", int, None),
            char_vocab=_get(mapping, "char_vocab", int, 69),
            embed_dim=_get(mapping, "embed_dim", int, 200),
            hidden=_get(mapping, "hidden", int, 256),
            filters=_get(mapping, "filters", int, 5),
            widths=widths,
            char_window=_get(mapping, "char_window", int, 40),
            word_window=_get(mapping, "word_window", int, 5),
            dropout=_get(mapping, "dropout", float, 0.3),
        )

    def to_flat(self):
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = ",".join(str(w) for w in v) if f.name == "widths" \
                else str(v)
        return out


# named presets; hidden size is the only difference
PRESETS = {
    "base": {"hidden": 256},
    "compact": {"hidden": 128},
}


@dataclass
class TrainConfig:
    """Optimization-loop settings."""
    learning_rate: float = 0.002
    batch_size: int = 100
    epochs: int = 10
    seed: int = 0
    clip_norm: float = 5.0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size < 1 or self.epochs < 1:
            raise ConfigError("learning_rate, batch_size, epochs must be positive")
        if self.clip_norm <= 0:
            raise ConfigError("clip_norm must be positive")

    @classmethod
    def from_flat(cls, mapping):
        return cls(
            learning_rate=_get(mapping, "learning_rate", float, 0.002),
            batch_size=_get(mapping, "batch_size", int, 100),
            epochs=_get(mapping, "epochs", int, 10),
            seed=_get(mapping, "seed", int, 0),
            clip_norm=_get(mapping, "clip_norm", float, 5.0),
        )

    def to_flat(self):
        return {f.name: str(getattr(self, f.name)) for f in fields(self)}
