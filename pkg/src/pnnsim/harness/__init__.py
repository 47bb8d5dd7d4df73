"""Experiment harness: waveforms, metrics, experiment runners and the CLI."""
