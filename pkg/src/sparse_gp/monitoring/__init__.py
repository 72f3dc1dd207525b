"""Monitoring exports."""

from sparse_gp.monitoring.audit import AuditLog
from sparse_gp.monitoring.monitor import Monitor
from sparse_gp.monitoring.notifier import LogNotifier, Notifier, RecordingNotifier

__all__ = ["AuditLog", "LogNotifier", "Monitor", "Notifier", "RecordingNotifier"]
