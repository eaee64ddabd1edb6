"""
CLI sub-command handlers for qcslab.
"""
