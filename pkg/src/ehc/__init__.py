"""Environmental Health Channel data platform.

Ingests citizen-contributed air-quality, health-survey, and story data from
CSV-over-HTTP sources, de-identifies and aggregates it by zip-code region,
and serves normalized summary statistics to an interactive web client.
"""

__version__ = "0.1.0"
