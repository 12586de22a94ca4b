"""
Test package for the lattice laboratory modules
"""
