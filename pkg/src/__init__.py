# src/__init__.py
# Leave minimal imports to avoid circular dependencies

__version__ = '0.1.0'
