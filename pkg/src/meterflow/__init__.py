"""meterflow: embedded smart-meter analytics engine.

Hourly reading store, numerical primitives, load disaggregation and
profiling, forecasting baselines, streaming anomaly detection, a workflow
scheduler, and an HTTP/JSON API over all of it.
"""

__version__ = "0.1.0"
