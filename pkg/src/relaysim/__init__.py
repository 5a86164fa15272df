"""Discrete-event simulator of selfish MAC attacks in a two-hop 802.11 EDCA relay."""

__version__ = "0.1.0"
