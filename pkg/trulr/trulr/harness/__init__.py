from trulr.harness.accumulators import ReplicationAccumulator
from trulr.harness.registry import register_cli_estimator
