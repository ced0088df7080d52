"""Architecture configuration for the warm-start predictor."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ModelConfig:
    """Shapes of the dual-encoder regression model.

    One shared model serves all joints: per inference pass one joint's
    waypoints feed the source encoder and the remaining K-1 joints'
    waypoints feed the context encoder.
    """

    joints: int
    max_waypoints: int
    dim: int = 32
    heads: int = 8
    context_layers: int = 6
    source_layers: int = 6
    ffn_dim: int | None = None  # defaults to 4*dim
    dropout: float = 0.1

    def __post_init__(self):
        if self.joints < 2:
            raise ValueError("need at least two joints (source plus context)")
        if self.max_waypoints < 2:
            raise ValueError("need at least two waypoints")
        if self.dim % self.heads != 0:
            raise ValueError(
                f"embedding dim {self.dim} not divisible by {self.heads} heads"
            )
        if self.ffn_dim is None:
            object.__setattr__(self, "ffn_dim", 4 * self.dim)
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout rate must be in [0, 1)")

    @property
    def seq_len(self) -> int:
        """Padded token count L shared by both encoders."""
        return (self.joints - 1) * self.max_waypoints

    @property
    def coef_out(self) -> int:
        """Coefficient head width: control points at the longest path."""
        return self.max_waypoints + 4

    @property
    def knot_out(self) -> int:
        """Knot head width: knot count at the longest path."""
        return self.max_waypoints + 10

    @property
    def head_dim(self) -> int:
        return self.dim // self.heads

    def to_dict(self) -> dict:
        return {
            "joints": self.joints,
            "max_waypoints": self.max_waypoints,
            "dim": self.dim,
            "heads": self.heads,
            "context_layers": self.context_layers,
            "source_layers": self.source_layers,
            "ffn_dim": self.ffn_dim,
            "dropout": self.dropout,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)
