"""Multimodal ISAC vehicle-to-infrastructure simulator and optimizer.

Modules
-------
scenario : configuration constants and ground-truth vehicle kinematics
channel  : mmWave geometric channel and steering vectors
sensing  : semantic AoI, uncertainty, misalignment, Fisher information, PCRB
edge     : computing queues, energy ledger, Lyapunov surrogate and reward
policy   : non-learning baselines, constant-modulus beams, greedy optimizer
nn       : minimal reverse-mode autodiff kernel, LSTM cell, Adam
agent    : heterogeneous mixture-of-experts actor-critic and variants
harness  : episode runner, sweeps, metrics aggregation, persistence
"""

__version__ = "0.1.0"
