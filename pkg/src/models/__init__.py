"""Exact algebra: rational function fields, GL2(Z) groups, actions, chains and shared schemas."""
