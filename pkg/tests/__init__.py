"""
Test suite for the PI Estimator Toolkit
"""
