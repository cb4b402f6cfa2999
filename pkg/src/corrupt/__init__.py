from .transforms import CorruptionSpec, FOG_ATTENUATIONS, KINDS, apply

__all__ = ['CorruptionSpec', 'FOG_ATTENUATIONS', 'KINDS', 'apply']
