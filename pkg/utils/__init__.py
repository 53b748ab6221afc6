"""
Utility functions package
Formatting helpers, numeric guards and validators
"""
