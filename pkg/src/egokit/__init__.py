"""Egocentric video QA tooling: clip curation, QA scaffolding, grounding rewards,
toy GRPO and grounding metrics."""

__version__ = "0.1.0"
