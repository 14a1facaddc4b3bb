"""
Config files, experiment runner and the click commands
"""
