"""
CSV, text and JSON artifact writers
"""
