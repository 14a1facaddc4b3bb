"""
Convergence diagnostics and free-boundary analyses
"""
