"""Outage probability and transmission-capacity analysis for finite
frequency-hopping ad hoc networks in Nakagami fading and log-normal
shadowing."""

__version__ = "0.1.0"
