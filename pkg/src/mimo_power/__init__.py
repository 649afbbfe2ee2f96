"""mimo-power - QoS-constrained downlink power minimization for multi-cell Massive MIMO."""

__version__ = "0.1.0"
