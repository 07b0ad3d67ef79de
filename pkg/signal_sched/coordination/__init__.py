from .bus import MessageBus, read_message_log
from .messages import (
    OutflowMessage,
    ProjectedVehicle,
    merge_nonlocal,
    messages_by_receiver,
    project_outflows,
)

__all__ = [
    "MessageBus",
    "OutflowMessage",
    "ProjectedVehicle",
    "merge_nonlocal",
    "messages_by_receiver",
    "project_outflows",
    "read_message_log",
]
