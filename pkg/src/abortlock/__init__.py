"""Executable model, checkers and native implementation of an abortable queue lock
with O(1) amortized RMR complexity in both the CC and DSM cost models."""

__version__ = "0.1.0"
