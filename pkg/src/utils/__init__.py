"""
Settings, logging, error handling and timing
"""
