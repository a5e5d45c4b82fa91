"""Tree invariants, Whitehead presentations and tree statistics for right-angled Artin groups."""

__version__ = "0.4.0"
