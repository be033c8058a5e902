"""Recipe generation engine: corpus tools, small language models, sampling, scoring."""

__version__ = "0.1.0"
