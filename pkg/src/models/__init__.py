"""
Validated experiment configuration and run summaries
"""
