"""
Services for qcslab.
"""
