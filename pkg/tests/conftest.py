import pytest
from loguru import logger


@pytest.fixture
def log_messages():
    """Collect loguru messages at WARNING and above for the duration of a test."""
    messages: list[str] = []
    handler_id = logger.add(lambda m: messages.append(m.record["message"]), level="WARNING")
    yield messages
    logger.remove(handler_id)
