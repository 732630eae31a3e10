"""Sharing equilibrium toolkit: exact solver, verifiers, simulator and generators."""
