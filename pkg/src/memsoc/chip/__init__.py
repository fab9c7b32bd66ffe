"""Chip models: description, devices, arrays, network, bridge, control plane and budgets."""
