import pytest

from jure_adapter.config import AdapterConfig
from jure_adapter.service import adapter_serve


@pytest.fixture(scope="session")
def service():
    handle = adapter_serve(AdapterConfig(bind="127.0.0.1:0"))
    yield handle
    handle.stop()
