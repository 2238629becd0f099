"""Intersection-crossing RL: simulator, Q-networks, DQN training, experiment tools."""

__version__ = "0.1.0"
