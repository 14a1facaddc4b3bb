"""
PME traveling-wave solver and free-boundary analyses
"""
