"""Benchmark harness: sequence I/O, synthetic scenarios, OPE metrics."""
