"""Triple-view contrastive learning and self-training for smart-contract Ponzi detection."""

__version__ = "0.1.0"
