"""Secure FH-ISAC waveform with keyed random frequency and PRI agility."""

__version__ = "0.1.0"
