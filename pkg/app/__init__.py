"""
PI Estimator Toolkit
Command-line application package
"""

__version__ = "0.3.0"
