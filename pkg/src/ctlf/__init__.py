"""Satisfiability, model checking, reductions and minimal-model measurement
for temporal-operator and Boolean-clone fragments of CTL."""

__version__ = "0.1.0"
